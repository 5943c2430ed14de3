#pragma once

// Closed-form and quadrature evaluation of collective success probabilities:
// the exact binomial tail for unweighted majority, and the Gaussian
// approximation P(T_n > 0) for the weighted aggregate signal T_n = sum w_i Y_i,
// with the per-voter weight moments taken over the assessment outcome
// distribution Binomial(l_a, p).
//
// Two variance estimands are exposed. "paper" keeps sigma_T^2 =
// E_f[E[w^2|p] (1 - (2p-1)^2)], the expected conditional signal variance.
// "total_variance" is the exact per-voter variance of wY under the full
// generative model, E_f[E[w^2|p]] - mu_T^2, which is what a Monte Carlo
// estimate of Var(wY) converges to. They are different quantities; results
// record which one they carry.

#include <cmath>
#include <vector>

#include "escm/competence.hpp"
#include "escm/errors.hpp"
#include "escm/stats.hpp"
#include "escm/weighting.hpp"

namespace escm {

enum class VarianceMode { paper, total_variance };

inline const char* to_string(VarianceMode mode) {
    return mode == VarianceMode::paper ? "paper" : "total_variance";
}

struct SignalMoments {
    double mu_T = 0.0;
    double sigma_T_sq = 0.0;
    VarianceMode mode = VarianceMode::paper;
};

enum class SuccessMethod { exact_binomial, gaussian_clt, monte_carlo };

inline const char* to_string(SuccessMethod method) {
    switch (method) {
        case SuccessMethod::exact_binomial: return "exact_binomial";
        case SuccessMethod::gaussian_clt: return "gaussian_clt";
        case SuccessMethod::monte_carlo: return "monte_carlo";
    }
    return "?";
}

struct SuccessProbability {
    double value = 0.0;
    SuccessMethod method = SuccessMethod::exact_binomial;
};

namespace detail {

// Weight attained for each correct count c = 0..l_a; the binomial outcome is
// the only randomness left once p is fixed.
struct WeightByCount {
    std::vector<double> w;
    std::vector<double> w_sq;
};

inline WeightByCount weight_by_count(const MechanismParams& params, const WeightMapSpec& map) {
    validate(params);
    validate(map);
    WeightByCount table;
    table.w.resize(static_cast<std::size_t>(params.l_a) + 1);
    table.w_sq.resize(static_cast<std::size_t>(params.l_a) + 1);
    for (int c = 0; c <= params.l_a; ++c) {
        double s = score_from_correct_count(c, params.l_a, params.q, params.s_min);
        double w = apply_weight_map(normalize_score(s, params.l_a), map);
        table.w[static_cast<std::size_t>(c)] = w;
        table.w_sq[static_cast<std::size_t>(c)] = w * w;
    }
    return table;
}

struct WeightMoments {
    double e_w;
    double e_w_sq;
};

inline WeightMoments weight_moments_at(double p, int l_a, const WeightByCount& table) {
    auto pmf = binomial_pmf_table(l_a, p);
    double e_w = 0.0, e_w_sq = 0.0;
    for (std::size_t c = 0; c < pmf.size(); ++c) {
        e_w += pmf[c] * table.w[c];
        e_w_sq += pmf[c] * table.w_sq[c];
    }
    return {e_w, e_w_sq};
}

}  // namespace detail

struct WeightMoments {
    double e_w;     // E[w(s_bar(C)) | p]
    double e_w_sq;  // E[w(s_bar(C))^2 | p]
};

// Exact finite sum over the l_a + 1 assessment outcomes; no sampling.
inline WeightMoments expected_weight_given_p(double p, const MechanismParams& params,
                                             const WeightMapSpec& map) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("expected_weight_given_p: p outside [0,1]");
    auto table = detail::weight_by_count(params, map);
    auto m = detail::weight_moments_at(p, params.l_a, table);
    return {m.e_w, m.e_w_sq};
}

// Per-voter moments of the weighted signal w(p) Y under dist.
inline SignalMoments signal_moments(const CompetenceDistribution& dist,
                                    const MechanismParams& params, const WeightMapSpec& map,
                                    VarianceMode mode) {
    auto table = detail::weight_by_count(params, map);
    const int l_a = params.l_a;
    double mu = expect(dist, [&](double p) {
        return detail::weight_moments_at(p, l_a, table).e_w * (2.0 * p - 1.0);
    });
    double sigma_sq;
    if (mode == VarianceMode::paper) {
        sigma_sq = expect(dist, [&](double p) {
            double y = 2.0 * p - 1.0;
            return detail::weight_moments_at(p, l_a, table).e_w_sq * (1.0 - y * y);
        });
    } else {
        double second = expect(dist, [&](double p) {
            return detail::weight_moments_at(p, l_a, table).e_w_sq;
        });
        sigma_sq = second - mu * mu;
    }
    return {mu, sigma_sq, mode};
}

// Exact Pr(Bin(n, mu_bar) >= (n+1)/2) through the incomplete beta identity.
inline SuccessProbability cjt_success(int n, double mu_bar) {
    if (n < 1 || n % 2 == 0) throw DomainError("cjt_success: n must be odd and positive");
    if (!(mu_bar >= 0.0 && mu_bar <= 1.0)) throw DomainError("cjt_success: mu_bar outside [0,1]");
    return {binomial_upper_tail(n, (n + 1) / 2, mu_bar), SuccessMethod::exact_binomial};
}

// Gaussian tail Phi(sqrt(n) mu_T / sigma_T).
inline SuccessProbability escm_success(int n, const SignalMoments& moments) {
    if (n < 1) throw DomainError("escm_success: n must be positive");
    if (!(moments.sigma_T_sq > 0.0)) {
        throw DegenerateVariance("escm_success: sigma_T^2 must be positive");
    }
    double z = std::sqrt(static_cast<double>(n)) * moments.mu_T / std::sqrt(moments.sigma_T_sq);
    return {norm_cdf(z), SuccessMethod::gaussian_clt};
}

// Degenerate-variance limit: the aggregate is deterministic, success follows
// the sign of the mean.
inline double success_with_degenerate_guard(int n, const SignalMoments& moments) {
    if (moments.sigma_T_sq > 0.0) return escm_success(n, moments).value;
    if (moments.mu_T > 0.0) return 1.0;
    if (moments.mu_T < 0.0) return 0.0;
    return 0.5;
}

struct GainResult {
    double gain;
    SuccessProbability escm;
    SuccessProbability cjt;
};

// P_escm - P_cjt at matched population mean.
inline GainResult gain(const CompetenceDistribution& dist, const MechanismParams& params,
                       const WeightMapSpec& map, int n, VarianceMode mode = VarianceMode::paper) {
    auto mom = signal_moments(dist, params, map, mode);
    auto cjt = cjt_success(n, moments(dist).mean);
    SuccessProbability escm{success_with_degenerate_guard(n, mom), SuccessMethod::gaussian_clt};
    return {escm.value - cjt.value, escm, cjt};
}

}  // namespace escm
