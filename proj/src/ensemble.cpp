#include "volcano/ensemble.hpp"

#include "volcano/integrator.hpp"
#include "volcano/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace volcano {

void validate(const FieldProtocol& protocol) {
    if (!(protocol.dt > 0.0)) {
        throw std::invalid_argument("dt must be > 0");
    }
    if (protocol.recorded_steps == 0) {
        throw std::invalid_argument("recorded steps must be >= 1");
    }
    if (protocol.stride == 0) {
        throw std::invalid_argument("record stride must be >= 1");
    }
    SystemSpec probe;
    probe.kind = protocol.kind;
    probe.n = protocol.n;
    probe.rank = protocol.rank;
    volcano::validate(probe);
}

SystemSpec realization_spec(const FieldProtocol& protocol, double coupling, std::uint64_t index) {
    SystemSpec spec;
    spec.kind = protocol.kind;
    spec.n = protocol.n;
    spec.rank = protocol.rank;
    spec.scale = coupling;
    spec.seed = realization_seed(protocol.master_seed, index);
    spec.init = protocol.init;
    return spec;
}

FieldRealization run_field_realization(const FieldProtocol& protocol, double coupling, std::uint64_t index,
                                       const RadialHistogram* histogram) {
    validate(protocol);
    const SystemSpec spec = realization_spec(protocol, coupling, index);
    FieldRealization out;
    out.seed = spec.seed;
    if (histogram != nullptr) {
        out.histogram.emplace(histogram->bins(), histogram->r_max());
    }
    Propagator prop(build_system(spec));
    for (std::size_t i = 0; i < protocol.transient_steps; ++i) {
        prop.step(protocol.dt);
    }
    std::vector<double> r(protocol.n);
    for (std::size_t i = 1; i <= protocol.recorded_steps; ++i) {
        prop.step(protocol.dt);
        if (i % protocol.stride != 0) {
            continue;
        }
        const LocalFields& fields = prop.fields();
        const double* re = fields.re.data();
        const double* im = fields.im.data();
        for (std::size_t j = 0; j < r.size(); ++j) {
            r[j] = std::sqrt(re[j] * re[j] + im[j] * im[j]);
        }
        out.moments.add(r);
        if (out.histogram) {
            out.histogram->add(r);
        }
    }
    out.product = out.moments.count() >= 2 ? moment_product(out.moments).value : 0.0;
    return out;
}

VolcanoEnsemble volcano_ensemble(const FieldProtocol& protocol, double coupling, std::size_t realizations,
                                 unsigned workers, std::size_t bins, double r_max) {
    validate(protocol);
    const RadialHistogram proto(bins, r_max);
    auto runs = parallel_map(0, realizations, workers, [&](std::uint64_t index) {
        return run_field_realization(protocol, coupling, index, &proto);
    });
    VolcanoEnsemble out{coupling, {}, {}, proto, {}};
    for (auto& run : runs) {
        out.pooled.merge(run.moments);
        out.products.add(run.moments);
        out.histogram.merge(*run.histogram);
        out.seeds.push_back(run.seed);
    }
    return out;
}

PhaseFieldDensity phase_field_ensemble(const FieldProtocol& protocol, double coupling, std::size_t realizations,
                                       unsigned workers, std::size_t coupling_bins, std::size_t phase_bins) {
    validate(protocol);
    if (protocol.kind != CouplingKind::LowRank) {
        throw std::invalid_argument("phase-field maps need the low-rank coupling");
    }
    auto runs = parallel_map(0, realizations, workers, [&](std::uint64_t index) {
        PhaseFieldDensity density(coupling_bins, phase_bins);
        Propagator prop(build_system(realization_spec(protocol, coupling, index)));
        for (std::size_t i = 0; i < protocol.transient_steps; ++i) {
            prop.step(protocol.dt);
        }
        for (std::size_t i = 1; i <= protocol.recorded_steps; ++i) {
            prop.step(protocol.dt);
            if (i % protocol.stride == 0) {
                const LocalFields& fields = prop.fields();
                density.add_snapshot(prop.system().coupling, prop.phases(), fields);
            }
        }
        return density;
    });
    PhaseFieldDensity out(coupling_bins, phase_bins);
    for (const auto& d : runs) {
        out.merge(d);
    }
    return out;
}

} // namespace volcano
