#pragma once

// Assessment scoring and the score -> voting-weight maps, with the induced
// weight bounds. The scoring rule is the penalized correct count with a
// strictly positive floor; maps are linear, power(k), smoothed log-odds, and
// a constant unit map used to embed the unweighted-majority baseline.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "escm/errors.hpp"

namespace escm {

enum class WeightMapKind { linear, power, log_odds, unit };

struct WeightMapSpec {
    WeightMapKind kind = WeightMapKind::linear;
    double k = 1.0;        // power exponent
    double epsilon = 0.1;  // log-odds smoothing

    static WeightMapSpec linear() { return {WeightMapKind::linear, 1.0, 0.1}; }
    static WeightMapSpec power(double k) { return {WeightMapKind::power, k, 0.1}; }
    static WeightMapSpec log_odds(double epsilon) { return {WeightMapKind::log_odds, 1.0, epsilon}; }
    static WeightMapSpec unit() { return {WeightMapKind::unit, 1.0, 0.1}; }
};

inline const char* to_string(WeightMapKind kind) {
    switch (kind) {
        case WeightMapKind::linear: return "linear";
        case WeightMapKind::power: return "power";
        case WeightMapKind::log_odds: return "log_odds";
        case WeightMapKind::unit: return "unit";
    }
    return "?";
}

inline void validate(const WeightMapSpec& spec) {
    if (spec.kind == WeightMapKind::power && !(spec.k > 0.0)) {
        throw DomainError("WeightMapSpec: power exponent k must be positive");
    }
    if (spec.kind == WeightMapKind::log_odds && !(spec.epsilon > 0.0)) {
        throw DomainError("WeightMapSpec: log-odds epsilon must be positive");
    }
}

struct MechanismParams {
    int q = 4;        // options per assessment item
    int l_w = 4;      // items authored per participant
    int l_r = 12;     // review capacity per participant
    int l_a = 10;     // assessment length
    int m = 3;        // reviewers per item
    double s_min = 0.5;
    double review_threshold = 0.5;
    WeightMapSpec weight_map = WeightMapSpec::log_odds(0.1);
    // Off by default so the closed-form signal moments apply exactly.
    bool difficulty_modulated = false;
};

inline void validate(const MechanismParams& p) {
    if (p.q < 2) throw DomainError("MechanismParams: q must be >= 2");
    if (p.l_w < 0) throw DomainError("MechanismParams: l_w must be >= 0");
    if (p.l_r < 0) throw DomainError("MechanismParams: l_r must be >= 0");
    if (p.l_a < 1) throw DomainError("MechanismParams: l_a must be >= 1");
    if (p.m < 1) throw DomainError("MechanismParams: m must be >= 1");
    if (!(p.s_min > 0.0)) throw DomainError("MechanismParams: s_min must be positive");
    if (!(p.s_min < p.l_a)) throw DomainError("MechanismParams: s_min must be below l_a");
    if (!(p.review_threshold >= 0.0 && p.review_threshold <= 1.0)) {
        throw DomainError("MechanismParams: review_threshold must lie in [0,1]");
    }
    validate(p.weight_map);
}

// Penalized linear score from a correct count: s = max(s_min, C - W/(q-1)).
inline double score_from_correct_count(int correct, int l_a, int q, double s_min) {
    if (q < 2) throw DomainError("score: q must be >= 2");
    if (!(s_min > 0.0)) throw DomainError("score: s_min must be positive");
    if (correct < 0 || correct > l_a) throw DomainError("score: correct count outside [0, l_a]");
    double raw = correct - static_cast<double>(l_a - correct) / (q - 1);
    return raw > s_min ? raw : s_min;
}

inline double score_assessment(const std::vector<bool>& correct_flags, int q, double s_min) {
    int correct = 0;
    for (bool b : correct_flags) correct += b ? 1 : 0;
    return score_from_correct_count(correct, static_cast<int>(correct_flags.size()), q, s_min);
}

inline double normalize_score(double s, int l_a) {
    if (l_a < 1) throw DomainError("normalize_score: l_a must be >= 1");
    if (!(s > 0.0 && s <= static_cast<double>(l_a))) {
        throw DomainError("normalize_score: score " + std::to_string(s) +
                          " outside (0, l_a=" + std::to_string(l_a) + "]");
    }
    return s / l_a;
}

inline double apply_weight_map(double s_bar, const WeightMapSpec& spec) {
    if (!(s_bar >= 0.0 && s_bar <= 1.0)) {
        throw DomainError("apply_weight_map: normalized score outside [0,1]");
    }
    validate(spec);
    switch (spec.kind) {
        case WeightMapKind::linear: return s_bar;
        case WeightMapKind::power: return std::pow(s_bar, spec.k);
        case WeightMapKind::log_odds:
            return std::log((s_bar + spec.epsilon) / (1.0 - s_bar + spec.epsilon));
        case WeightMapKind::unit: return 1.0;
    }
    throw DomainError("apply_weight_map: unknown map kind");
}

struct WeightBounds {
    double omega_min;
    double omega_max;
    bool contains(double w) const { return w >= omega_min && w <= omega_max; }
};

// Attainable weight interval: every map is monotone, so the bounds are the
// images of the floored and the perfect normalized score.
inline WeightBounds weight_bounds(const MechanismParams& params) {
    validate(params);
    double lo = params.s_min / params.l_a;
    return {apply_weight_map(lo, params.weight_map), apply_weight_map(1.0, params.weight_map)};
}

}  // namespace escm
