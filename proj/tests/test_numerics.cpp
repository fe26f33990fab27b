#include "volcano/csv.hpp"
#include "volcano/exact_sum.hpp"
#include "volcano/phasor.hpp"
#include "volcano/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <doctest.h>

using namespace volcano;

TEST_CASE("realization seeds are distinct and schedule free") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 10000; ++i) {
        seen.insert(realization_seed(7, i));
    }
    CHECK(seen.size() == 10000);
    CHECK(realization_seed(7, 3) == realization_seed(7, 3));
    CHECK(realization_seed(7, 3) != realization_seed(8, 3));
    CHECK(stream_seed(1, Stream::Frequencies) != stream_seed(1, Stream::Phases));
}

TEST_CASE("uniform draws stay in [0, 1)") {
    Rng rng(42);
    double lo = 1.0, hi = 0.0, sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        sum += u;
    }
    CHECK(lo >= 0.0);
    CHECK(hi < 1.0);
    CHECK(std::abs(sum / n - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("exact sum matches a wide binary float oracle") {
    using Big = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<400>>;
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-60, 60);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> xs;
        for (int i = 0; i < 1000; ++i) {
            xs.push_back(std::ldexp(mant(gen), expo(gen)));
        }
        Big exact = 0;
        ExactSum acc;
        for (double x : xs) {
            exact += Big(x);
            acc.add(x);
        }
        const double want = exact.convert_to<double>();
        const double got = acc.value();
        CHECK(std::abs(got - want) <= 2.0 * std::abs(std::nextafter(want, 0.0) - want) + 1e-300);
    }
}

TEST_CASE("exact sum is order and merge independent") {
    std::vector<double> xs{1e100, 1.0, -1e100, 3e-300, 2.5, -1e-20, 7e15, -7e15};
    ExactSum forward;
    for (double x : xs) forward.add(x);
    CHECK(forward.value() == doctest::Approx(3.5 - 1e-20).epsilon(1e-15));

    std::mt19937_64 gen(11);
    std::vector<double> many(5000);
    std::normal_distribution<double> nd(0.0, 1e3);
    for (double& x : many) x = nd(gen);
    ExactSum a;
    for (double x : many) a.add(x);
    for (int k = 0; k < 5; ++k) {
        std::shuffle(many.begin(), many.end(), gen);
        ExactSum left, right;
        for (std::size_t i = 0; i < many.size(); ++i) {
            (i % 3 == 0 ? left : right).add(many[i]);
        }
        right.merge(left);
        CHECK(right.value() == a.value());
    }
}

TEST_CASE("exact sum of cancelling terms is exact") {
    ExactSum s;
    s.add(1.0);
    s.add(0x1p-60);
    s.add(-1.0);
    CHECK(s.value() == 0x1p-60);
    ExactSum z;
    CHECK(z.value() == 0.0);
}

TEST_CASE("phasors agree with std::cos and std::sin") {
    std::mt19937_64 gen(3);
    std::vector<double> theta;
    std::uniform_real_distribution<double> small(-10.0, 10.0);
    std::uniform_real_distribution<double> large(-2e5, 2e5);
    for (int i = 0; i < 20000; ++i) theta.push_back(small(gen));
    for (int i = 0; i < 2000; ++i) theta.push_back(large(gen));
    for (double x : {0.0, -0.0, std::numbers::pi, -std::numbers::pi / 2, 1e5, -1e5, 1e-300}) theta.push_back(x);
    std::vector<double> c(theta.size()), s(theta.size());
    phasors(theta, c, s);
    double err = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        err = std::max({err, std::abs(c[i] - std::cos(theta[i])), std::abs(s[i] - std::sin(theta[i]))});
    }
    CHECK(err < 1e-15);
}

TEST_CASE("phase wrapping") {
    const double tau = 2.0 * std::numbers::pi;
    CHECK(wrap_phase(0.0) == 0.0);
    CHECK(wrap_phase(tau) == doctest::Approx(0.0));
    CHECK(wrap_phase(-0.5) == doctest::Approx(tau - 0.5));
    std::vector<double> v{-100.0, -tau, -1e-18, 0.0, 3.0, tau, 7.0, 1e6};
    std::vector<double> w = v;
    wrap_phases(w);
    for (std::size_t i = 0; i < v.size(); ++i) {
        CHECK(w[i] >= 0.0);
        CHECK(w[i] < tau);
        CHECK(std::abs(std::remainder(w[i] - v[i], tau)) < 1e-9);
    }
    CHECK(wrap_signed(std::numbers::pi) == doctest::Approx(std::numbers::pi));
    CHECK(wrap_signed(-std::numbers::pi) == doctest::Approx(std::numbers::pi));
    CHECK(wrap_signed(4.0) == doctest::Approx(4.0 - tau));
}

TEST_CASE("csv numbers round trip exactly") {
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> d(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double x = d(gen) * std::pow(10.0, static_cast<int>(gen() % 40) - 20);
        const std::string s = format_double(x);
        double back = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), back);
        CHECK(back == x);
    }
    std::ostringstream os;
    CsvWriter csv(os, {"a", "b"});
    csv.row({1.0, 0.1});
    CHECK(os.str() == "a,b\n1,0.1\n");
}
