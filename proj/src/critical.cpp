#include "volcano/critical.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace volcano {

std::string_view to_string(Decision decision) {
    switch (decision) {
    case Decision::Below:
        return "below";
    case Decision::Above:
        return "above";
    case Decision::Exhausted:
        return "exhausted";
    }
    return "exhausted";
}

void validate(const BisectionConfig& config) {
    if (!(config.j_lo < config.j_hi)) {
        throw std::invalid_argument("bisection bracket needs j_lo < j_hi");
    }
    if (!(config.accuracy > 0.0)) {
        throw std::invalid_argument("bisection accuracy must be > 0");
    }
    if (config.batch == 0 || config.max_realizations == 0) {
        throw std::invalid_argument("batch size and realization cap must be >= 1");
    }
    if (!(config.margin > 0.0)) {
        throw std::invalid_argument("z-margin must be > 0");
    }
}

namespace {

std::string bracket_message(const DecisionRecord& lo, const DecisionRecord& hi) {
    std::ostringstream os;
    os << "invalid bracket: J=" << lo.coupling << " is " << to_string(lo.decision) << " (product " << lo.product
       << " +/- " << lo.std_error << "), J=" << hi.coupling << " is " << to_string(hi.decision) << " (product "
       << hi.product << " +/- " << hi.std_error << "); expected below/above";
    return os.str();
}

} // namespace

InvalidBracket::InvalidBracket(DecisionRecord lo_, DecisionRecord hi_)
    : std::runtime_error(bracket_message(lo_, hi_)), lo(lo_), hi(hi_) {}

DecisionRecord decide_at_J(double coupling, const BisectionConfig& config, const ProductBatch& products) {
    validate(config);
    PooledProduct series;
    DecisionRecord rec;
    rec.coupling = coupling;
    while (series.count() < config.max_realizations) {
        const std::size_t count =
            std::min<std::size_t>(config.batch, config.max_realizations - series.count());
        for (const RealizationMoments& m : products(coupling, series.count(), count)) {
            series.add(m.mean_r, m.mean_inverse);
        }
        if (series.count() < config.min_realizations && series.count() < config.max_realizations) {
            continue;
        }
        const auto c = classify_volcano(series.estimate(), config.margin);
        if (c.side != VolcanoSide::Undecided) {
            rec.decision = c.side == VolcanoSide::Below ? Decision::Below : Decision::Above;
            break;
        }
    }
    if (series.count() >= config.max_realizations) {
        // the cap may coincide with a decisive batch; re-check before declaring exhaustion
        const auto c = classify_volcano(series.estimate(), config.margin);
        rec.decision = c.side == VolcanoSide::Below   ? Decision::Below
                       : c.side == VolcanoSide::Above ? Decision::Above
                                                      : Decision::Exhausted;
    }
    rec.realizations = series.count();
    rec.product = series.value();
    rec.std_error = series.std_error();
    return rec;
}

CriticalEstimate estimate_jc(const BisectionConfig& config, const DecisionOracle& decide) {
    validate(config);
    CriticalEstimate est;
    const DecisionRecord lo_rec = decide(config.j_lo);
    est.log.push_back(lo_rec);
    const DecisionRecord hi_rec = decide(config.j_hi);
    est.log.push_back(hi_rec);
    if (lo_rec.decision != Decision::Below || hi_rec.decision != Decision::Above) {
        throw InvalidBracket(lo_rec, hi_rec);
    }
    double lo = config.j_lo;
    double hi = config.j_hi;
    while (hi - lo > config.accuracy) {
        const double mid = 0.5 * (lo + hi);
        const DecisionRecord rec = decide(mid);
        est.log.push_back(rec);
        if (rec.decision == Decision::Below) {
            lo = mid;
        } else if (rec.decision == Decision::Above) {
            hi = mid;
        } else {
            est.j_c = mid;
            est.lo = lo;
            est.hi = hi;
            return est;
        }
    }
    est.j_c = 0.5 * (lo + hi);
    est.lo = lo;
    est.hi = hi;
    return est;
}

CriticalEstimate estimate_jc(const BisectionConfig& config, const ProductBatch& products) {
    return estimate_jc(config, [&](double coupling) { return decide_at_J(coupling, config, products); });
}

double statistical_uncertainty(const CriticalEstimate& estimate, double radius) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int n = 0;
    const DecisionRecord* nearest = nullptr;
    for (const DecisionRecord& d : estimate.log) {
        if (!nearest || std::abs(d.coupling - estimate.j_c) < std::abs(nearest->coupling - estimate.j_c)) {
            nearest = &d;
        }
        if (std::abs(d.coupling - estimate.j_c) > radius) {
            continue;
        }
        sx += d.coupling;
        sy += d.product;
        sxx += d.coupling * d.coupling;
        sxy += d.coupling * d.product;
        ++n;
    }
    const double den = n * sxx - sx * sx;
    if (n < 2 || !(den > 0.0)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const double slope = (n * sxy - sx * sy) / den;
    if (!(slope < 0.0)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return nearest->std_error / -slope;
}

ProductBatch field_product_batch(FieldProtocol protocol, unsigned workers) {
    validate(protocol);
    return [protocol, workers](double coupling, std::uint64_t first, std::size_t count) {
        return parallel_map(first, count, workers, [&](std::uint64_t index) {
            const FieldRealization run = run_field_realization(protocol, coupling, index);
            const MomentAccumulator& acc = run.moments;
            const auto n = static_cast<double>(acc.count());
            return RealizationMoments{acc.sum_r() / n, acc.sum_inverse() / n};
        });
    };
}

} // namespace volcano
