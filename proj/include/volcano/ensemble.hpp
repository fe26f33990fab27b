#pragma once

#include "volcano/fieldstats.hpp"
#include "volcano/model.hpp"

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace volcano {

/// Evaluates fn(index) for index in [first, first + count) on `workers` threads.
/// Results come back in index order, so any in-order reduction is independent
/// of the worker count. The first exception thrown by fn is rethrown.
template <class Fn>
auto parallel_map(std::uint64_t first, std::size_t count, unsigned workers, Fn&& fn)
    -> std::vector<decltype(fn(first))> {
    using Result = decltype(fn(first));
    std::vector<std::optional<Result>> slots(count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) {
                return;
            }
            try {
                slots[i].emplace(fn(first + i));
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                next.store(count);
                return;
            }
        }
    };
    const unsigned threads = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(count)));
    if (threads <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(work);
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
    std::vector<Result> out;
    out.reserve(count);
    for (auto& slot : slots) {
        out.push_back(std::move(*slot));
    }
    return out;
}

/// Per-realization protocol for local-field statistics.
struct FieldProtocol {
    CouplingKind kind = CouplingKind::LowRank;
    std::size_t n = 250;
    int rank = 4;
    double dt = 0.01;
    std::size_t transient_steps = 1000;
    std::size_t recorded_steps = 2000;
    std::size_t stride = 1;  // field samples taken every `stride` recorded steps
    InitialCondition init = InitialCondition::UniformRandom;
    std::uint64_t master_seed = 0;
};

void validate(const FieldProtocol& protocol);

struct FieldRealization {
    std::uint64_t seed = 0;
    MomentAccumulator moments;
    std::optional<RadialHistogram> histogram;
    double product = 0.0;  // M_{+1} M_{-1} of this realization alone
};

/// System of realization `index` at coupling J (fresh frequencies, vectors or matrix, phases).
SystemSpec realization_spec(const FieldProtocol& protocol, double coupling, std::uint64_t index);

/// Runs one realization and pools |P_j| over all oscillators and sampled steps.
/// When `histogram` is given, a copy with the same edges is filled as well.
FieldRealization run_field_realization(const FieldProtocol& protocol, double coupling, std::uint64_t index,
                                       const RadialHistogram* histogram = nullptr);

struct VolcanoEnsemble {
    double coupling = 0.0;
    MomentAccumulator pooled;  // every |P_j| of every realization
    PooledProduct products;    // realization-level moments, for classification
    RadialHistogram histogram;
    std::vector<std::uint64_t> seeds;
};

/// Realizations 0 .. count-1 at coupling J, merged in index order.
VolcanoEnsemble volcano_ensemble(const FieldProtocol& protocol, double coupling, std::size_t realizations,
                                 unsigned workers, std::size_t bins, double r_max);

/// Phase-difference density pooled over realizations 0 .. count-1. Each realization
/// contributes one snapshot per sampled step after the transient.
PhaseFieldDensity phase_field_ensemble(const FieldProtocol& protocol, double coupling, std::size_t realizations,
                                       unsigned workers, std::size_t coupling_bins, std::size_t phase_bins);

} // namespace volcano
