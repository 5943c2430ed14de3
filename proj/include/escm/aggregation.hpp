#pragma once

// Vote aggregation rules and influence metrics: weighted plurality with an
// explicit tie source, the known-competence log-odds benchmark weights, the
// likelihood-optimal rule over reliability profiles, and Herfindahl/Gini
// concentration indices on weight vectors.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "escm/errors.hpp"

namespace escm {

struct PluralityOutcome {
    int winner;
    bool tie;
};

// argmax_x sum_i w_i 1{v_i = x}; ties broken uniformly with the caller's rng.
inline PluralityOutcome aggregate_weighted_plurality(std::span<const int> votes,
                                                     std::span<const double> weights,
                                                     int num_alternatives, std::mt19937_64& rng) {
    if (votes.empty()) throw EmptyElection("aggregate_weighted_plurality: no votes");
    if (votes.size() != weights.size()) {
        throw DomainError("aggregate_weighted_plurality: votes/weights length mismatch");
    }
    if (num_alternatives < 2) throw DomainError("aggregate_weighted_plurality: need >= 2 alternatives");
    std::vector<double> tally(static_cast<std::size_t>(num_alternatives), 0.0);
    for (std::size_t i = 0; i < votes.size(); ++i) {
        if (votes[i] < 0 || votes[i] >= num_alternatives) {
            throw DomainError("aggregate_weighted_plurality: vote index out of range");
        }
        tally[static_cast<std::size_t>(votes[i])] += weights[i];
    }
    double best = *std::max_element(tally.begin(), tally.end());
    std::vector<int> leaders;
    for (int x = 0; x < num_alternatives; ++x) {
        if (tally[static_cast<std::size_t>(x)] == best) leaders.push_back(x);
    }
    if (leaders.size() == 1) return {leaders.front(), false};
    std::uniform_int_distribution<std::size_t> pick(0, leaders.size() - 1);
    return {leaders[pick(rng)], true};
}

// Normalized log-odds weights for known competences: w_i = logit(p_i) / sum_j logit(p_j).
inline std::vector<double> nitzan_paroush_weights(std::span<const double> p) {
    if (p.empty()) throw DomainError("nitzan_paroush_weights: empty competence vector");
    std::vector<double> logits(p.size());
    double denom = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(p[i] > 0.0 && p[i] < 1.0)) {
            throw DomainError("nitzan_paroush_weights: competences must lie in (0,1)");
        }
        logits[i] = std::log(p[i] / (1.0 - p[i]));
        denom += logits[i];
    }
    if (std::fabs(denom) <= 1e-12) {
        throw DegenerateDenominator("nitzan_paroush_weights: log-odds sum is zero");
    }
    for (auto& w : logits) w /= denom;
    return logits;
}

// Conditional signal table p(s | x), stored row-major by signal; every
// column (fixed true state) must sum to 1.
class ReliabilityProfile {
  public:
    ReliabilityProfile(int num_alternatives, std::vector<double> conditional)
        : m_(num_alternatives), table_(std::move(conditional)) {
        if (m_ < 2) throw DomainError("ReliabilityProfile: need >= 2 alternatives");
        if (table_.size() != static_cast<std::size_t>(m_) * static_cast<std::size_t>(m_)) {
            throw DomainError("ReliabilityProfile: table size mismatch");
        }
        for (int x = 0; x < m_; ++x) {
            double col = 0.0;
            for (int s = 0; s < m_; ++s) col += at(s, x);
            if (std::fabs(col - 1.0) > 1e-12) {
                throw DomainError("ReliabilityProfile: column for state " + std::to_string(x) +
                                  " sums to " + std::to_string(col));
            }
        }
    }

    // p(signal = s | true state = x)
    double at(int s, int x) const {
        return table_[static_cast<std::size_t>(s) * static_cast<std::size_t>(m_) +
                      static_cast<std::size_t>(x)];
    }
    int num_alternatives() const { return m_; }

    // Correct with probability p, errors uniform over the wrong alternatives.
    static ReliabilityProfile symmetric(double p, int num_alternatives) {
        if (!(p >= 0.0 && p <= 1.0)) throw DomainError("ReliabilityProfile: p outside [0,1]");
        int m = num_alternatives;
        std::vector<double> t(static_cast<std::size_t>(m) * static_cast<std::size_t>(m));
        for (int s = 0; s < m; ++s) {
            for (int x = 0; x < m; ++x) {
                t[static_cast<std::size_t>(s) * m + x] = (s == x) ? p : (1.0 - p) / (m - 1);
            }
        }
        return ReliabilityProfile(m, std::move(t));
    }

  private:
    int m_;
    std::vector<double> table_;
};

// argmax_x sum_i log p_i(v_i | x). States with a zero conditional are
// impossible; if every state is impossible the vote profile has likelihood
// zero everywhere.
inline PluralityOutcome log_likelihood_aggregate(std::span<const int> votes,
                                                 std::span<const ReliabilityProfile> profiles,
                                                 std::mt19937_64& rng) {
    if (votes.empty()) throw EmptyElection("log_likelihood_aggregate: no votes");
    if (votes.size() != profiles.size()) {
        throw DomainError("log_likelihood_aggregate: votes/profiles length mismatch");
    }
    int m = profiles.front().num_alternatives();
    std::vector<double> score(static_cast<std::size_t>(m), 0.0);
    std::vector<bool> possible(static_cast<std::size_t>(m), true);
    for (std::size_t i = 0; i < votes.size(); ++i) {
        if (profiles[i].num_alternatives() != m) {
            throw DomainError("log_likelihood_aggregate: inconsistent alternative counts");
        }
        for (int x = 0; x < m; ++x) {
            double c = profiles[i].at(votes[i], x);
            if (c <= 0.0) {
                possible[static_cast<std::size_t>(x)] = false;
            } else {
                score[static_cast<std::size_t>(x)] += std::log(c);
            }
        }
    }
    double best = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (int x = 0; x < m; ++x) {
        if (!possible[static_cast<std::size_t>(x)]) continue;
        any = true;
        best = std::max(best, score[static_cast<std::size_t>(x)]);
    }
    if (!any) throw ZeroLikelihood("log_likelihood_aggregate: all alternatives impossible");
    std::vector<int> leaders;
    for (int x = 0; x < m; ++x) {
        if (possible[static_cast<std::size_t>(x)] && score[static_cast<std::size_t>(x)] == best) {
            leaders.push_back(x);
        }
    }
    if (leaders.size() == 1) return {leaders.front(), false};
    std::uniform_int_distribution<std::size_t> pick(0, leaders.size() - 1);
    return {leaders[pick(rng)], true};
}

// H = sum w_i^2 on a normalized nonnegative vector. Uniform input
// short-circuits to the closed form 1/n so the equality is exact.
inline double herfindahl(std::span<const double> weights) {
    if (weights.empty()) throw DomainError("herfindahl: empty weight vector");
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw DomainError("herfindahl: weights must be nonnegative");
        total += w;
    }
    if (std::fabs(total - 1.0) > 1e-9) {
        throw DomainError("herfindahl: weights must be normalized (sum=" + std::to_string(total) + ")");
    }
    auto [lo, hi] = std::minmax_element(weights.begin(), weights.end());
    if (*lo == *hi) return 1.0 / static_cast<double>(weights.size());
    double h = 0.0;
    for (double w : weights) h += w * w;
    return h;
}

// Gini via the sorted-index formula sum (2i - n - 1) w_(i) / (n sum w).
inline double gini(std::span<const double> weights) {
    if (weights.empty()) throw DomainError("gini: empty weight vector");
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw DomainError("gini: weights must be nonnegative");
        total += w;
    }
    if (total == 0.0) throw AllZeroWeights("gini: all weights are zero");
    std::vector<double> sorted(weights.begin(), weights.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() == sorted.back()) return 0.0;  // exact for uniform input
    double n = static_cast<double>(sorted.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        acc += (2.0 * static_cast<double>(i + 1) - n - 1.0) * sorted[i];
    }
    return acc / (n * total);
}

// Influence shares |w|/sum|w| used to feed the concentration indices; under
// the log-odds map weights can be negative and influence is their magnitude.
inline std::vector<double> influence_shares(std::span<const double> weights) {
    if (weights.empty()) throw DomainError("influence_shares: empty weight vector");
    double total = 0.0;
    std::vector<double> shares(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        shares[i] = std::fabs(weights[i]);
        total += shares[i];
    }
    if (total == 0.0) throw AllZeroWeights("influence_shares: all weights are zero");
    bool uniform = true;
    for (double s : shares) uniform = uniform && s == shares.front();
    if (uniform) {
        std::fill(shares.begin(), shares.end(), 1.0 / static_cast<double>(shares.size()));
        return shares;
    }
    for (auto& s : shares) s /= total;
    return shares;
}

struct SteepnessRatio {
    double exact;   // (1 - 1/l_a)^k
    double approx;  // exp(-k/l_a)
};

// Weight ratio between a perfect assessment and a single mistake under the
// power map; the dimensionless hardness parameter is k/l_a.
inline SteepnessRatio steepness_ratio(int l_a, double k) {
    if (l_a < 1) throw DomainError("steepness_ratio: l_a must be >= 1");
    if (!(k > 0.0)) throw DomainError("steepness_ratio: k must be positive");
    double base = 1.0 - 1.0 / static_cast<double>(l_a);
    return {std::pow(base, k), std::exp(-k / static_cast<double>(l_a))};
}

}  // namespace escm
