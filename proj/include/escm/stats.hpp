#pragma once

// Scalar special functions: normal pdf/cdf/quantile, log-beta, the
// regularized incomplete beta function, and stable binomial helpers.
// The incomplete beta uses the textbook continued fraction with the
// modified Lentz algorithm; the normal quantile is Acklam's rational
// approximation polished by one Halley step against erfc.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "escm/errors.hpp"

namespace escm {

inline constexpr double kPi = 3.14159265358979323846;

inline double norm_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
}

inline double norm_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

inline double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("norm_quantile: p must lie in (0,1)");
    }
    static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                -2.759285104469687e+02, 1.383577518672690e+02,
                                -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                -1.556989798598866e+02, 6.680131188771972e+01,
                                -1.328068155288572e+01};
    static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                -2.400758277161838e+00, -2.549732539343734e+00,
                                4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        double q = p - 0.5;
        double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // One Halley step drives the rational approximation to ~1 ulp.
    double e = norm_cdf(x) - p;
    double u = e * std::sqrt(2.0 * kPi) * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
    return x;
}

inline double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace detail {

// Continued fraction for the incomplete beta, modified Lentz iteration.
inline double inc_beta_cf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double eps = 1e-15;
    double qab = a + b;
    double qap = a + 1.0;
    double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double reg_inc_beta(double a, double b, double x) {
    if (!(a > 0.0 && b > 0.0)) {
        throw DomainError("reg_inc_beta: shape parameters must be positive");
    }
    if (!(x >= 0.0 && x <= 1.0)) {
        throw DomainError("reg_inc_beta: x must lie in [0,1]");
    }
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    if (a == b && x == 0.5) return 0.5;  // symmetry, exact
    double front = std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * detail::inc_beta_cf(a, b, x) / a;
    }
    return 1.0 - std::exp(b * std::log1p(-x) + a * std::log(x) - log_beta(b, a)) *
                     detail::inc_beta_cf(b, a, 1.0 - x) / b;
}

// Pr(Bin(n, p) >= k) via the incomplete beta identity; stable for large n.
inline double binomial_upper_tail(std::int64_t n, std::int64_t k, double p) {
    if (n < 0 || k < 0) throw DomainError("binomial_upper_tail: negative argument");
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binomial_upper_tail: p outside [0,1]");
    if (k <= 0) return 1.0;
    if (k > n) return 0.0;
    return reg_inc_beta(static_cast<double>(k), static_cast<double>(n - k + 1), p);
}

// Binomial pmf table over c = 0..n at success probability p, in log space so
// extreme p stays finite. Degenerate p collapses to a point mass.
inline std::vector<double> binomial_pmf_table(int n, double p) {
    if (n < 0) throw DomainError("binomial_pmf_table: n must be nonnegative");
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binomial_pmf_table: p outside [0,1]");
    std::vector<double> pmf(static_cast<std::size_t>(n) + 1, 0.0);
    if (p == 0.0) {
        pmf.front() = 1.0;
        return pmf;
    }
    if (p == 1.0) {
        pmf.back() = 1.0;
        return pmf;
    }
    double logp = std::log(p);
    double logq = std::log1p(-p);
    double lgn = std::lgamma(n + 1.0);
    for (int c = 0; c <= n; ++c) {
        double lchoose = lgn - std::lgamma(c + 1.0) - std::lgamma(n - c + 1.0);
        pmf[static_cast<std::size_t>(c)] = std::exp(lchoose + c * logp + (n - c) * logq);
    }
    return pmf;
}

}  // namespace escm
