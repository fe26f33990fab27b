#pragma once

#include "volcano/ensemble.hpp"
#include "volcano/fieldstats.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace volcano {

enum class Decision { Below, Above, Exhausted };

std::string_view to_string(Decision decision);

struct DecisionRecord {
    double coupling = 0.0;
    std::uint64_t realizations = 0;
    double product = 0.0;
    double std_error = 0.0;
    Decision decision = Decision::Exhausted;
};

struct BisectionConfig {
    double j_lo = 0.5;
    double j_hi = 6.0;
    double accuracy = 0.02;
    std::size_t batch = 100;
    std::size_t min_realizations = 100;
    std::size_t max_realizations = 100000;
    double margin = 1.5;
};

void validate(const BisectionConfig& config);

struct CriticalEstimate {
    double j_c = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::vector<DecisionRecord> log;

    /// Half-width of the final bracket.
    double uncertainty() const noexcept { return 0.5 * (hi - lo); }
};

/// Thrown when the initial bracket does not straddle the transition.
class InvalidBracket : public std::runtime_error {
public:
    InvalidBracket(DecisionRecord lo, DecisionRecord hi);
    DecisionRecord lo;
    DecisionRecord hi;
};

/// Mean r and mean 1/r of one realization.
struct RealizationMoments {
    double mean_r = 0.0;
    double mean_inverse = 0.0;
};

/// Moments of realizations [first, first + count) at coupling J, in index order.
using ProductBatch =
    std::function<std::vector<RealizationMoments>(double coupling, std::uint64_t first, std::size_t count)>;

using DecisionOracle = std::function<DecisionRecord(double coupling)>;

/// Adds realizations in batches until the pooled moment product is more than
/// margin standard errors from the volcano threshold, or the cap is reached.
/// The stopping rule is only applied at batch boundaries.
DecisionRecord decide_at_J(double coupling, const BisectionConfig& config, const ProductBatch& products);

/// Bisection on J. Requires Below at j_lo and Above at j_hi; an Exhausted
/// verdict ends the search with the midpoint as estimate.
CriticalEstimate estimate_jc(const BisectionConfig& config, const DecisionOracle& decide);

CriticalEstimate estimate_jc(const BisectionConfig& config, const ProductBatch& products);

/// Statistical error of J_c: standard error of the product at the decision nearest J_c,
/// divided by |d product / dJ| from a line through the decisions within `radius` of J_c.
/// NaN when fewer than two decisions qualify or the slope is not negative.
double statistical_uncertainty(const CriticalEstimate& estimate, double radius = 0.5);

/// Realization moments from the field protocol, run on `workers` threads.
/// Every J reuses realization indices 0, 1, 2, ... of the master seed.
ProductBatch field_product_batch(FieldProtocol protocol, unsigned workers);

} // namespace volcano
