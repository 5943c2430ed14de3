#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "escm/quadrature.hpp"
#include "escm/rng.hpp"
#include "escm/stats.hpp"

using namespace escm;

namespace {

// Brute-force binomial upper tail by direct pmf summation; independent of the
// incomplete-beta path under test.
double tail_by_enumeration(int n, int k, double p) {
    double total = 0.0;
    for (int c = k; c <= n; ++c) {
        double term = 1.0;
        for (int i = 0; i < c; ++i) term *= p * static_cast<double>(n - i) / static_cast<double>(i + 1);
        for (int i = 0; i < n - c; ++i) term *= (1.0 - p);
        total += term;
    }
    return total;
}

}  // namespace

TEST_CASE("normal cdf basics") {
    CHECK(norm_cdf(0.0) == Catch::Approx(0.5).margin(1e-15));
    CHECK(norm_cdf(1.0) == Catch::Approx(0.841344746068543).margin(1e-12));
    CHECK(norm_cdf(-1.0) + norm_cdf(1.0) == Catch::Approx(1.0).margin(1e-15));
    CHECK(norm_cdf(6.0) > 1.0 - 1e-8);
}

TEST_CASE("normal quantile inverts the cdf") {
    for (double p : {1e-12, 1e-6, 0.01, 0.2, 0.5, 0.7, 0.975, 1.0 - 1e-9}) {
        double x = norm_quantile(p);
        CHECK(norm_cdf(x) == Catch::Approx(p).margin(1e-13));
    }
    CHECK(norm_quantile(0.5) == Catch::Approx(0.0).margin(1e-15));
    CHECK_THROWS_AS(norm_quantile(0.0), DomainError);
    CHECK_THROWS_AS(norm_quantile(1.0), DomainError);
}

TEST_CASE("regularized incomplete beta against identities") {
    // I_x(1,1) = x
    for (double x : {0.0, 0.1, 0.5, 0.9, 1.0}) {
        CHECK(reg_inc_beta(1.0, 1.0, x) == Catch::Approx(x).margin(1e-14));
    }
    // symmetry I_x(a,b) = 1 - I_{1-x}(b,a)
    for (double x : {0.05, 0.3, 0.62, 0.97}) {
        CHECK(reg_inc_beta(2.5, 7.0, x) ==
              Catch::Approx(1.0 - reg_inc_beta(7.0, 2.5, 1.0 - x)).margin(1e-13));
    }
    CHECK(reg_inc_beta(5.0, 5.0, 0.5) == Catch::Approx(0.5).margin(1e-14));
    CHECK_THROWS_AS(reg_inc_beta(0.0, 1.0, 0.5), DomainError);
    CHECK_THROWS_AS(reg_inc_beta(1.0, 1.0, 1.5), DomainError);
}

TEST_CASE("binomial upper tail matches enumeration") {
    for (int n : {1, 3, 7, 15, 25}) {
        for (double p : {0.1, 0.37, 0.5, 0.64, 0.9}) {
            for (int k = 0; k <= n; k += std::max(1, n / 4)) {
                CAPTURE(n, k, p);
                CHECK(binomial_upper_tail(n, k, p) ==
                      Catch::Approx(tail_by_enumeration(n, k, p)).margin(1e-12));
            }
        }
    }
    CHECK(binomial_upper_tail(501, 0, 0.3) == 1.0);
    CHECK(binomial_upper_tail(501, 502, 0.3) == 0.0);
    // large-n value stays in [0,1] and is monotone in p
    double lo = binomial_upper_tail(501, 251, 0.49);
    double hi = binomial_upper_tail(501, 251, 0.51);
    CHECK(lo > 0.0);
    CHECK(hi < 1.0);
    CHECK(lo < hi);
}

TEST_CASE("binomial pmf table sums to one and matches moments") {
    for (int n : {0, 1, 10, 200}) {
        for (double p : {0.0, 0.2, 0.5, 0.93, 1.0}) {
            auto pmf = binomial_pmf_table(n, p);
            REQUIRE(pmf.size() == static_cast<std::size_t>(n) + 1);
            double total = 0.0, mean = 0.0;
            for (int c = 0; c <= n; ++c) {
                total += pmf[static_cast<std::size_t>(c)];
                mean += c * pmf[static_cast<std::size_t>(c)];
            }
            CHECK(total == Catch::Approx(1.0).margin(1e-12));
            CHECK(mean == Catch::Approx(n * p).margin(1e-9));
        }
    }
}

TEST_CASE("adaptive quadrature on known integrals") {
    auto poly = integrate_adaptive([](double x) { return 3.0 * x * x; }, 0.0, 1.0);
    CHECK(poly.value == Catch::Approx(1.0).margin(1e-12));

    auto cosine = integrate_adaptive([](double x) { return std::cos(x); }, 0.0, 2.0);
    CHECK(cosine.value == Catch::Approx(std::sin(2.0)).margin(1e-10));

    // peaked but smooth
    auto peak = integrate_adaptive([](double x) { return std::exp(-500.0 * (x - 0.3) * (x - 0.3)); },
                                   0.0, 1.0);
    CHECK(peak.value == Catch::Approx(std::sqrt(kPi / 500.0)).margin(1e-9));

    CHECK(integrate_adaptive([](double) { return 1.0; }, 0.5, 0.5).value == 0.0);
    CHECK_THROWS_AS(integrate_adaptive([](double) { return 1.0; }, 1.0, 0.0), DomainError);
}

TEST_CASE("quadrature failure is reported, not fudged") {
    // A discontinuous comb the rule cannot resolve at this tolerance/budget.
    auto comb = [](double x) { return std::fmod(std::floor(x * 1e7), 2.0) == 0.0 ? 1.0 : 0.0; };
    CHECK_THROWS_AS(integrate_adaptive(comb, 0.0, 1.0, 1e-12, 64), QuadratureFailure);
}

TEST_CASE("substream seeds decorrelate and reproduce") {
    CHECK(substream_seed(42, 0) == substream_seed(42, 0));
    CHECK(substream_seed(42, 0) != substream_seed(42, 1));
    CHECK(substream_seed(42, 5) != substream_seed(43, 5));
    auto a = make_rng(7);
    auto b = make_rng(7);
    for (int i = 0; i < 8; ++i) CHECK(a() == b());
}

TEST_CASE("fnv1a digest is order sensitive and stable") {
    Fnv1a h1, h2, h3;
    h1.update(1);
    h1.update(2);
    h2.update(2);
    h2.update(1);
    h3.update(1);
    h3.update(2);
    CHECK(h1.digest() != h2.digest());
    CHECK(h1.digest() == h3.digest());
}
