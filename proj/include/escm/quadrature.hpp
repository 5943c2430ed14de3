#pragma once

// Globally adaptive Gauss-Kronrod 15(7) integration on a finite interval.
// Keeps a max-heap of subintervals keyed by error estimate and bisects the
// worst one until the summed estimate meets an absolute tolerance.

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <vector>

#include "escm/errors.hpp"

namespace escm {

namespace detail {

// QUADPACK dqk15 abscissae/weights on [-1, 1].
inline constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct GkEstimate {
    double integral;
    double error;
};

template <class F>
GkEstimate gauss_kronrod_15(F&& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double fv[15];
    double fc = f(center);
    fv[7] = fc;
    for (int i = 0; i < 7; ++i) {
        double dx = half * kKronrodNodes[i];
        fv[i] = f(center - dx);
        fv[14 - i] = f(center + dx);
    }
    double kronrod = kKronrodWeights[7] * fc;
    for (int i = 0; i < 7; ++i) {
        kronrod += kKronrodWeights[i] * (fv[i] + fv[14 - i]);
    }
    // Gauss nodes sit at the odd Kronrod indices (1, 3, 5) plus the center.
    double gauss = kGaussWeights[3] * fc;
    for (int i = 0; i < 3; ++i) {
        gauss += kGaussWeights[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);
    }
    kronrod *= half;
    gauss *= half;
    double diff = std::fabs(kronrod - gauss);
    // QUADPACK error heuristic: sharper than |K - G| once convergence sets in.
    double err = diff;
    if (diff > 0.0) {
        err = std::min(diff, std::pow(200.0 * diff, 1.5));
    }
    return {kronrod, err};
}

}  // namespace detail

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int intervals = 0;
};

// Integrates f over [a, b] to absolute tolerance abs_tol. Throws
// QuadratureFailure if the tolerance is still unmet after max_intervals
// bisections.
template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, double abs_tol = 1e-8,
                                    int max_intervals = 4000) {
    if (!(b > a)) {
        if (a == b) return {0.0, 0.0, 0};
        throw DomainError("integrate_adaptive: interval bounds out of order");
    }
    struct Interval {
        double a, b, integral, error;
        bool operator<(const Interval& o) const { return error < o.error; }
    };
    std::priority_queue<Interval> heap;
    auto first = detail::gauss_kronrod_15(f, a, b);
    heap.push({a, b, first.integral, first.error});
    double total = first.integral;
    double total_err = first.error;
    int count = 1;
    while (total_err > abs_tol && count < max_intervals) {
        Interval worst = heap.top();
        heap.pop();
        double mid = 0.5 * (worst.a + worst.b);
        auto left = detail::gauss_kronrod_15(f, worst.a, mid);
        auto right = detail::gauss_kronrod_15(f, mid, worst.b);
        total += left.integral + right.integral - worst.integral;
        total_err += left.error + right.error - worst.error;
        heap.push({worst.a, mid, left.integral, left.error});
        heap.push({mid, worst.b, right.integral, right.error});
        ++count;
    }
    if (!(total_err <= abs_tol) || !std::isfinite(total)) {
        throw QuadratureFailure("integrate_adaptive: tolerance " + std::to_string(abs_tol) +
                                " not reached (error estimate " + std::to_string(total_err) +
                                " after " + std::to_string(count) + " intervals)");
    }
    return {total, total_err, count};
}

}  // namespace escm
