#pragma once

// Simulation oracle for the aggregation rules: repeated seeded elections on
// either the assessment-only fast path or the full six-step pipeline,
// exhaustive small-jury optimality checks, and the estimated-weights ->
// known-competence-weights convergence experiment.
//
// Trials draw their RNG from counter-derived substreams of the master seed
// and land in per-trial slots, so a parallel run reduces to exactly the same
// report as a serial one.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "escm/aggregation.hpp"
#include "escm/analytics.hpp"
#include "escm/competence.hpp"
#include "escm/parallel.hpp"
#include "escm/pipeline.hpp"
#include "escm/rng.hpp"
#include "escm/weighting.hpp"

namespace escm {

enum class VoteRule { escm, cjt_majority, nitzan_paroush_oracle, likelihood_oracle };

inline const char* to_string(VoteRule rule) {
    switch (rule) {
        case VoteRule::escm: return "escm";
        case VoteRule::cjt_majority: return "cjt_majority";
        case VoteRule::nitzan_paroush_oracle: return "nitzan_paroush_oracle";
        case VoteRule::likelihood_oracle: return "likelihood_oracle";
    }
    return "?";
}

struct TrialConfig {
    CompetenceDistribution dist = BetaSpec(2, 2);
    MechanismParams params;
    int n = 501;
    std::int64_t trials = 10000;
    std::uint64_t seed = 0;
    bool pipeline = false;  // full Steps 1-6 instead of the assessment fast path
    VoteRule rule = VoteRule::escm;
    int num_alternatives = 2;
    VarianceMode clt_mode = VarianceMode::total_variance;
    unsigned threads = 0;
};

struct TrialReport {
    double success_rate = 0.0;
    double standard_error = 0.0;
    double mean_herfindahl = 0.0;
    double mean_gini = 0.0;
    double tie_rate = 0.0;
    std::optional<double> clt_prediction;
    std::string seeds_hash;
    std::int64_t trials = 0;
};

namespace detail {

struct TrialOutcome {
    bool success = false;
    bool tie = false;
    double herfindahl = 0.0;
    double gini = 0.0;
};

// One fast-path election: sample competences, assess, weight, vote, tally.
inline TrialOutcome run_fast_trial(const TrialConfig& config, std::mt19937_64& rng) {
    const int n = config.n;
    const auto& params = config.params;
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::uniform_int_distribution<int> wrong(1, config.num_alternatives - 1);
    std::vector<double> weights(static_cast<std::size_t>(n), 1.0);
    std::vector<int> votes(static_cast<std::size_t>(n));
    std::vector<double> competences;
    if (config.rule == VoteRule::likelihood_oracle) competences.resize(static_cast<std::size_t>(n));

    for (int i = 0; i < n; ++i) {
        double p = sample_one(config.dist, rng);
        switch (config.rule) {
            case VoteRule::escm: {
                int c = 0;
                for (int j = 0; j < params.l_a; ++j) c += uni(rng) < p ? 1 : 0;
                double s = score_from_correct_count(c, params.l_a, params.q, params.s_min);
                weights[static_cast<std::size_t>(i)] =
                    apply_weight_map(normalize_score(s, params.l_a), params.weight_map);
                break;
            }
            case VoteRule::cjt_majority:
                break;
            case VoteRule::nitzan_paroush_oracle: {
                // unnormalized log-odds; scale does not change the rule
                weights[static_cast<std::size_t>(i)] = std::log(p / (1.0 - p));
                break;
            }
            case VoteRule::likelihood_oracle:
                competences[static_cast<std::size_t>(i)] = p;
                break;
        }
        votes[static_cast<std::size_t>(i)] =
            uni(rng) < p ? 0 : (config.num_alternatives == 2 ? 1 : wrong(rng));
    }

    TrialOutcome out;
    PluralityOutcome result{};
    if (config.rule == VoteRule::likelihood_oracle) {
        std::vector<ReliabilityProfile> profiles;
        profiles.reserve(static_cast<std::size_t>(n));
        for (double p : competences) {
            profiles.push_back(ReliabilityProfile::symmetric(p, config.num_alternatives));
        }
        result = log_likelihood_aggregate(votes, profiles, rng);
        out.herfindahl = 1.0 / n;
        out.gini = 0.0;
    } else {
        result = aggregate_weighted_plurality(votes, weights, config.num_alternatives, rng);
        auto shares = influence_shares(weights);
        out.herfindahl = herfindahl(shares);
        out.gini = gini(shares);
    }
    out.success = result.winner == 0;
    out.tie = result.tie;
    return out;
}

}  // namespace detail

inline TrialReport simulate(const TrialConfig& config) {
    validate(config.params);
    if (config.n < 1) throw DomainError("simulate: n must be >= 1");
    if (config.trials < 1) throw DomainError("simulate: trials must be >= 1");
    if (config.num_alternatives < 2) throw DomainError("simulate: need >= 2 alternatives");
    if (config.pipeline && config.rule != VoteRule::escm) {
        throw DomainError("simulate: the pipeline path only runs the escm rule");
    }

    std::vector<detail::TrialOutcome> outcomes(static_cast<std::size_t>(config.trials));
    parallel_for_index(static_cast<std::size_t>(config.trials), config.threads, [&](std::size_t t) {
        std::uint64_t sub = substream_seed(config.seed, t);
        if (config.pipeline) {
            auto record = run_pipeline(config.dist, config.params, config.n,
                                       config.num_alternatives, sub);
            outcomes[t] = {record.winner == 0, record.tie, record.herfindahl_index,
                           record.gini_index};
        } else {
            auto rng = make_rng(sub);
            outcomes[t] = detail::run_fast_trial(config, rng);
        }
    });

    TrialReport report;
    report.trials = config.trials;
    std::int64_t successes = 0, ties = 0;
    double h_sum = 0.0, g_sum = 0.0;
    Fnv1a hash;
    for (std::size_t t = 0; t < outcomes.size(); ++t) {
        successes += outcomes[t].success ? 1 : 0;
        ties += outcomes[t].tie ? 1 : 0;
        h_sum += outcomes[t].herfindahl;
        g_sum += outcomes[t].gini;
        hash.update(substream_seed(config.seed, t));
    }
    double trials = static_cast<double>(config.trials);
    report.success_rate = static_cast<double>(successes) / trials;
    report.standard_error = std::sqrt(report.success_rate * (1.0 - report.success_rate) / trials);
    report.mean_herfindahl = h_sum / trials;
    report.mean_gini = g_sum / trials;
    report.tie_rate = static_cast<double>(ties) / trials;
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash.digest()));
    report.seeds_hash = buf;

    if (config.num_alternatives == 2) {
        if (config.rule == VoteRule::escm) {
            auto mom = signal_moments(config.dist, config.params, config.params.weight_map,
                                      config.clt_mode);
            report.clt_prediction = success_with_degenerate_guard(config.n, mom);
        } else if (config.rule == VoteRule::cjt_majority && config.n % 2 == 1) {
            report.clt_prediction = cjt_success(config.n, moments(config.dist).mean).value;
        }
    }
    return report;
}

struct CltValidation {
    TrialReport mc;
    double paper_prediction = 0.0;
    double total_prediction = 0.0;
    double paper_gap = 0.0;
    double total_gap = 0.0;
    VarianceMode better_mode = VarianceMode::total_variance;
};

// Runs the escm fast path and reports how far each variance mode's Gaussian
// prediction sits from the estimate.
inline CltValidation validate_clt(const CompetenceDistribution& dist, const MechanismParams& params,
                                  int n, std::int64_t trials, std::uint64_t seed,
                                  unsigned threads = 0) {
    if (trials < 10000) throw DomainError("validate_clt: needs at least 10^4 trials");
    TrialConfig config;
    config.dist = dist;
    config.params = params;
    config.n = n;
    config.trials = trials;
    config.seed = seed;
    config.rule = VoteRule::escm;
    config.threads = threads;
    CltValidation v;
    v.mc = simulate(config);
    v.paper_prediction = success_with_degenerate_guard(
        n, signal_moments(dist, params, params.weight_map, VarianceMode::paper));
    v.total_prediction = success_with_degenerate_guard(
        n, signal_moments(dist, params, params.weight_map, VarianceMode::total_variance));
    v.paper_gap = std::fabs(v.mc.success_rate - v.paper_prediction);
    v.total_gap = std::fabs(v.mc.success_rate - v.total_prediction);
    v.better_mode = v.total_gap <= v.paper_gap ? VarianceMode::total_variance : VarianceMode::paper;
    return v;
}

// Exact success probability of a weighted-majority rule for known
// competences, by enumeration of all 2^n correctness patterns; exact ties
// count one half.
inline double exhaustive_weighted_majority_success(std::span<const double> p,
                                                   std::span<const double> w) {
    if (p.size() != w.size()) throw DomainError("exhaustive success: length mismatch");
    int n = static_cast<int>(p.size());
    if (n < 1) throw DomainError("exhaustive success: empty jury");
    if (n > 15) throw TooLargeForExhaustive("exhaustive success: n > 15");
    double total = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        double prob = 1.0;
        double margin = 0.0;
        for (int i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                prob *= p[static_cast<std::size_t>(i)];
                margin += w[static_cast<std::size_t>(i)];
            } else {
                prob *= 1.0 - p[static_cast<std::size_t>(i)];
                margin -= w[static_cast<std::size_t>(i)];
            }
        }
        if (margin > 0.0) {
            total += prob;
        } else if (margin == 0.0) {
            total += 0.5 * prob;
        }
    }
    return total;
}

struct OptimalityReport {
    double np_success = 0.0;
    std::vector<double> comparison_success;
    double max_violation = 0.0;  // positive if some comparison beats the optimum
};

// Known-competence log-odds weighting against caller-supplied comparison
// weight vectors. Uses the raw logits: dividing by the logit sum preserves
// the rule only while that sum is positive, and juries dominated by
// below-chance voters have a negative one.
inline OptimalityReport optimality_check(std::span<const double> p,
                                         const std::vector<std::vector<double>>& comparisons) {
    std::vector<double> np(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(p[i] > 0.0 && p[i] < 1.0)) {
            throw DomainError("optimality_check: competences must lie in (0,1)");
        }
        np[i] = std::log(p[i] / (1.0 - p[i]));
    }
    OptimalityReport report;
    report.np_success = exhaustive_weighted_majority_success(p, np);
    for (const auto& w : comparisons) {
        double s = exhaustive_weighted_majority_success(p, w);
        report.comparison_success.push_back(s);
        report.max_violation = std::max(report.max_violation, s - report.np_success);
    }
    return report;
}

// Mean max-norm distance between normalized estimated log-odds weights and
// the known-competence optimum, per assessment length. The score here is the
// raw correct count (the consistent estimator of p); epsilon anneals as
// 1/l_a so the smoothed map converges to the plain log-odds.
inline std::vector<double> np_convergence_distances(std::span<const double> p,
                                                    std::span<const int> l_a_values, int num_seeds,
                                                    std::uint64_t master_seed, double s_min = 0.5) {
    auto np = nitzan_paroush_weights(p);
    std::vector<double> means;
    means.reserve(l_a_values.size());
    for (std::size_t li = 0; li < l_a_values.size(); ++li) {
        int l_a = l_a_values[li];
        if (l_a < 1) throw DomainError("np_convergence_distances: l_a must be >= 1");
        WeightMapSpec map = WeightMapSpec::log_odds(1.0 / l_a);
        double acc = 0.0;
        int used = 0;
        for (int s = 0; s < num_seeds; ++s) {
            auto rng = make_rng(substream_seed(master_seed, (li << 20) + static_cast<std::uint64_t>(s)));
            std::vector<double> w(p.size());
            double sum = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) {
                std::binomial_distribution<int> bin(l_a, p[i]);
                int c = bin(rng);
                double score = std::max(s_min, static_cast<double>(c));
                w[i] = apply_weight_map(score / l_a, map);
                sum += w[i];
            }
            if (std::fabs(sum) < 1e-9) continue;  // measure-zero degenerate draw
            double dist = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) {
                dist = std::max(dist, std::fabs(w[i] / sum - np[i]));
            }
            acc += dist;
            ++used;
        }
        means.push_back(acc / std::max(used, 1));
    }
    return means;
}

}  // namespace escm
