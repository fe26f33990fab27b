#include "volcano/model.hpp"
#include "volcano/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>
#include <doctest.h>

using namespace volcano;

namespace {

double cauchy_cdf(double w) { return 0.5 + std::atan(w) / std::numbers::pi; }

} // namespace

TEST_CASE("lorentzian quantile") {
    CHECK(lorentzian_quantile(0.5) == doctest::Approx(0.0));
    CHECK(lorentzian_quantile(0.75) == doctest::Approx(1.0));
    CHECK(lorentzian_quantile(0.25) == doctest::Approx(-1.0));
    CHECK(std::isfinite(lorentzian_quantile(0.0)));
    CHECK(std::isfinite(lorentzian_quantile(1.0)));
    CHECK(lorentzian_quantile(0.0) < -1e15);
}

TEST_CASE("frequency draws follow the unit Lorentzian (KS)") {
    const std::size_t n = 1000000;
    auto w = sample_frequencies(n, 123);
    REQUIRE(w.size() == n);
    CHECK(std::all_of(w.begin(), w.end(), [](double x) { return std::isfinite(x); }));
    std::sort(w.begin(), w.end());
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = cauchy_cdf(w[i]);
        d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(f - static_cast<double>(i + 1) / n)});
    }
    CHECK(d < 0.002);
    CHECK(sample_frequencies(100, 5) == sample_frequencies(100, 5));
    CHECK(sample_frequencies(100, 5) != sample_frequencies(100, 6));
}

TEST_CASE("interaction vectors") {
    CHECK_THROWS_WITH_AS(sample_interaction_vectors(10, 3, 1), doctest::Contains("K must be even"),
                         std::invalid_argument);
    CHECK_THROWS_AS(sample_interaction_vectors(10, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(sample_interaction_vectors(10, -2, 1), std::invalid_argument);

    const auto one = sample_interaction_vectors(1, 2, 9);
    CHECK(std::abs(one(0, 0)) == 1);
    CHECK(std::abs(one(0, 1)) == 1);

    const std::size_t n = 100000;
    const auto v = sample_interaction_vectors(n, 4, 77);
    for (int m = 0; m < 4; ++m) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) sum += v(j, m);
        CHECK(std::abs(sum / n) < 0.02);
    }
    std::vector<double> counts(16, 0.0);
    for (std::size_t j = 0; j < n; ++j) counts[v.pattern(j)] += 1.0;
    const double p = 1.0 / 16.0;
    const double se = std::sqrt(p * (1 - p) / n);
    for (double c : counts) CHECK(std::abs(c / n - p) < 4.0 * se);
}

TEST_CASE("pattern bits follow the canonical order") {
    SignMatrix s(1, 4);
    const int u[4] = {1, -1, -1, 1};
    for (int m = 0; m < 4; ++m) s.set(0, m, u[m]);
    CHECK(s.pattern(0) == 0b0110U);
}

TEST_CASE("low-rank coupling entries") {
    SignMatrix s(10, 2);
    for (std::size_t j = 0; j < 10; ++j) {
        s.set(j, 0, 1);
        s.set(j, 1, 1);
    }
    s.set(1, 1, -1);
    const Coupling c = make_lowrank_coupling(s, 1.0);
    CHECK(coupling_entry(c, 0, 1) == doctest::Approx(-0.2));
    CHECK(coupling_entry(c, 0, 2) == 0.0);
    CHECK_THROWS_AS(coupling_entry(c, 0, 10), std::out_of_range);

    const auto v = sample_interaction_vectors(40, 6, 3);
    const Coupling r = make_lowrank_coupling(v, 1.7);
    for (std::size_t j = 0; j < 40; ++j) {
        CHECK(coupling_entry(r, j, j) == 0.0);
        for (std::size_t k = 0; k < 40; ++k) {
            CHECK(coupling_entry(r, j, k) == coupling_entry(r, k, j));
        }
    }
}

TEST_CASE("low-rank coupling has rank at most K") {
    for (int K : {2, 4, 6}) {
        const std::size_t n = 60;
        const Coupling c = make_lowrank_coupling(sample_interaction_vectors(n, K, 10 + K), 1.3);
        const auto dense = dense_matrix(c);
        Eigen::MatrixXd m(n, n);
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) m(j, k) = dense[j * n + k];
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
        const auto& sv = svd.singularValues();
        for (Eigen::Index i = K; i < sv.size(); ++i) {
            CHECK(sv(i) < 1e-10 * sv(0));
        }
    }
}

TEST_CASE("gaussian coupling") {
    const std::size_t n = 1000;
    const Coupling g = build_gaussian_coupling(n, 2.0, 4);
    double sum = 0.0, sq = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < n; ++j) {
        CHECK(g.matrix[j * n + j] == 0.0);
        for (std::size_t k = j + 1; k < n; ++k) {
            REQUIRE(g.matrix[j * n + k] == g.matrix[k * n + j]);
            sum += g.matrix[j * n + k];
            sq += g.matrix[j * n + k] * g.matrix[j * n + k];
            ++count;
        }
    }
    const double mean = sum / count;
    const double var = (sq - count * mean * mean) / (count - 1);
    CHECK(std::abs(var / (4.0 / n) - 1.0) < 0.05);

    const Coupling zero = build_gaussian_coupling(50, 0.0, 4);
    CHECK(std::all_of(zero.matrix.begin(), zero.matrix.end(), [](double x) { return x == 0.0; }));
    CHECK_THROWS_AS(build_gaussian_coupling(1, 1.0, 4), std::invalid_argument);
}

TEST_CASE("dense coupling validation") {
    CHECK_THROWS_AS(make_dense_coupling({0.0, 1.0, 2.0, 0.0}, 2), std::invalid_argument);
    CHECK_THROWS_AS(make_dense_coupling({0.0, 1.0, 1.0}, 2), std::invalid_argument);
    const Coupling d = make_dense_coupling({0.0, 0.5, 0.5, 0.0}, 2);
    CHECK(coupling_entry(d, 0, 1) == 0.5);
    std::ostringstream os;
    write_matrix_csv(os, d);
    CHECK(os.str() == "0,0.5\n0.5,0\n");
}

TEST_CASE("K = N coupling approaches standard deviation J / sqrt(N)") {
    CHECK(std::abs(lowrank_limit_check(1000, 1.0, 1) / (1.0 / std::sqrt(1000.0)) - 1.0) < 0.10);
    CHECK(std::abs(lowrank_limit_check(100, 2.0, 2) / 0.2 - 1.0) < 0.15);
    CHECK(lowrank_limit_check(100, 0.0, 2) == 0.0);
    CHECK_THROWS_AS(lowrank_limit_check(kLimitCheckCap + 2, 1.0, 1), std::invalid_argument);
}

TEST_CASE("systems are pure functions of their spec") {
    SystemSpec spec;
    spec.n = 64;
    spec.rank = 4;
    spec.scale = 2.5;
    spec.seed = 99;
    const auto a = build_system(spec);
    const auto b = build_system(spec);
    CHECK(a.phases == b.phases);
    CHECK(a.frequencies == b.frequencies);
    CHECK(a.coupling.vectors == b.coupling.vectors);
    for (double p : a.phases) {
        CHECK(p >= 0.0);
        CHECK(p < 2.0 * std::numbers::pi);
    }
    spec.init = InitialCondition::AllZero;
    const auto z = build_system(spec);
    CHECK(std::all_of(z.phases.begin(), z.phases.end(), [](double p) { return p == 0.0; }));
    CHECK(z.frequencies == a.frequencies);

    spec.rank = 3;
    CHECK_THROWS_AS(build_system(spec), std::invalid_argument);
    spec.rank = 4;
    spec.kind = CouplingKind::Dense;
    CHECK_THROWS_AS(build_system(spec), std::invalid_argument);
}

TEST_CASE("system spec json round trip") {
    SystemSpec spec;
    spec.kind = CouplingKind::Gaussian;
    spec.n = 31;
    spec.rank = 2;
    spec.scale = 0.1;
    spec.seed = 0xdeadbeefcafeULL;
    spec.init = InitialCondition::AllZero;
    const nlohmann::json j = spec;
    const SystemSpec back = j.get<SystemSpec>();
    CHECK(back.kind == spec.kind);
    CHECK(back.n == spec.n);
    CHECK(back.scale == spec.scale);
    CHECK(back.seed == spec.seed);
    CHECK(back.init == spec.init);
    const auto s1 = build_system(spec);
    const auto s2 = build_system(back);
    CHECK(s1.coupling.matrix == s2.coupling.matrix);
}

TEST_CASE("enum parsing") {
    CHECK(parse_coupling_kind("lowrank") == CouplingKind::LowRank);
    CHECK(parse_coupling_kind("gaussian") == CouplingKind::Gaussian);
    CHECK(parse_initial_condition("zero") == InitialCondition::AllZero);
    CHECK_THROWS_AS(parse_coupling_kind("banana"), std::invalid_argument);
}
