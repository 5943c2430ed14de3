#pragma once

// The six-step mechanism run end to end on a synthetic population: item
// authoring, peer review with acceptance filtering, difficulty-balanced
// assignment, penalized assessment scoring, weight construction, weighted
// plurality. The generative model for items and reviews is simulation
// plumbing: informed authors tend to write better items, careless reviewers
// score them noisily.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "escm/aggregation.hpp"
#include "escm/competence.hpp"
#include "escm/errors.hpp"
#include "escm/rng.hpp"
#include "escm/weighting.hpp"

namespace escm {

struct ReviewScores {
    double relevance = 0.0;
    double clarity = 0.0;
    double absence_of_bias = 0.0;
    double factual_correctness = 0.0;
    double scientific_accuracy = 0.0;
    double principle_adherence = 0.0;
    double difficulty = 0.0;

    // Acceptance quality: mean of the six quality dimensions. Difficulty is a
    // calibration dimension and stays out.
    double mean_quality() const {
        return (relevance + clarity + absence_of_bias + factual_correctness +
                scientific_accuracy + principle_adherence) / 6.0;
    }
};

struct Review {
    int reviewer = -1;
    ReviewScores scores;
};

struct Item {
    int id = -1;
    int author = -1;
    double latent_quality = 0.0;     // simulation-only ground truth
    double latent_difficulty = 0.0;  // simulation-only ground truth
    std::vector<Review> reviews;
    bool accepted = false;
    double mean_difficulty = std::numeric_limits<double>::quiet_NaN();
};

struct Participant {
    int id = -1;
    double competence = 0.5;  // latent p_i
    std::vector<int> authored;
    std::vector<int> reviewed;
    std::vector<int> assigned;
    std::vector<bool> correct;  // per assigned item, after the assessment
    double score = 0.0;
    double normalized_score = 0.0;
    double weight = 0.0;
    int vote = -1;
};

namespace detail {

inline double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

// Response model when difficulty modulation is enabled.
inline constexpr double kDifficultySteepness = 4.0;

}  // namespace detail

// Step 1. Every participant authors l_w items; item quality correlates with
// the author's competence via Beta(2 + 4p, 2 + 4(1-p)).
inline std::vector<Item> author_items(std::vector<Participant>& participants,
                                      const MechanismParams& params, std::mt19937_64& rng) {
    validate(params);
    std::vector<Item> items;
    items.reserve(participants.size() * static_cast<std::size_t>(params.l_w));
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    int next_id = 0;
    for (auto& author : participants) {
        author.authored.clear();
        for (int k = 0; k < params.l_w; ++k) {
            Item item;
            item.id = next_id++;
            item.author = author.id;
            double p = author.competence;
            item.latent_quality = sample_one(BetaSpec(2.0 + 4.0 * p, 2.0 + 4.0 * (1.0 - p)), rng);
            item.latent_difficulty = uni(rng);
            author.authored.push_back(item.id);
            items.push_back(std::move(item));
        }
    }
    return items;
}

namespace detail {

// m distinct reviewers per item, none its author, nobody above l_r reviews.
// Randomized least-loaded greedy; a circulant schedule is the fallback when
// the greedy paints itself into a corner.
inline std::vector<std::vector<int>> plan_reviews(const std::vector<Item>& items,
                                                  const std::vector<Participant>& participants,
                                                  const MechanismParams& params,
                                                  std::mt19937_64& rng) {
    const int n = static_cast<int>(participants.size());
    const std::size_t total = items.size();
    if (static_cast<long long>(n) * params.l_r < static_cast<long long>(params.m) * static_cast<long long>(total)) {
        throw InfeasibleReviewLoad("peer_review: capacity n*l_r = " + std::to_string(n * params.l_r) +
                                   " below demand m*|Q0| = " + std::to_string(params.m * total));
    }
    if (n < params.m + 1) {
        throw InfeasibleReviewLoad("peer_review: need at least m+1 participants to exclude authors");
    }
    for (int attempt = 0; attempt < 50; ++attempt) {
        std::vector<std::vector<int>> plan(total);
        std::vector<int> load(static_cast<std::size_t>(n), 0);
        std::vector<std::size_t> order(total);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        bool ok = true;
        for (std::size_t idx : order) {
            const Item& item = items[idx];
            std::vector<int> eligible;
            for (int r = 0; r < n; ++r) {
                if (participants[static_cast<std::size_t>(r)].id != item.author &&
                    load[static_cast<std::size_t>(r)] < params.l_r) {
                    eligible.push_back(r);
                }
            }
            if (static_cast<int>(eligible.size()) < params.m) {
                ok = false;
                break;
            }
            std::shuffle(eligible.begin(), eligible.end(), rng);
            std::stable_sort(eligible.begin(), eligible.end(), [&](int a, int b) {
                return load[static_cast<std::size_t>(a)] < load[static_cast<std::size_t>(b)];
            });
            for (int j = 0; j < params.m; ++j) {
                plan[idx].push_back(eligible[static_cast<std::size_t>(j)]);
                load[static_cast<std::size_t>(eligible[static_cast<std::size_t>(j)])]++;
            }
        }
        if (ok) return plan;
    }
    // Circulant fallback: works whenever each author wrote at most l_r / m items.
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> pos(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pos[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = i;
    std::vector<std::vector<int>> plan(total);
    std::vector<int> load(static_cast<std::size_t>(n), 0);
    std::vector<int> author_index(static_cast<std::size_t>(n), -1);
    for (int i = 0; i < n; ++i) author_index[static_cast<std::size_t>(participants[static_cast<std::size_t>(i)].id)] = i;
    for (std::size_t idx = 0; idx < total; ++idx) {
        int a = author_index[static_cast<std::size_t>(items[idx].author)];
        int k = pos[static_cast<std::size_t>(a)];
        for (int j = 1; j <= params.m; ++j) {
            int r = perm[static_cast<std::size_t>((k + j) % n)];
            plan[idx].push_back(r);
            load[static_cast<std::size_t>(r)]++;
        }
    }
    for (int r = 0; r < n; ++r) {
        if (load[static_cast<std::size_t>(r)] > params.l_r) {
            throw InfeasibleReviewLoad("peer_review: no reviewer schedule within capacity l_r=" +
                                       std::to_string(params.l_r));
        }
    }
    return plan;
}

}  // namespace detail

// Step 2. Each item gets m peer reviews; acceptance requires the mean of the
// six quality dimensions, averaged over reviewers, to reach the threshold.
inline void peer_review(std::vector<Item>& items, std::vector<Participant>& participants,
                        const MechanismParams& params, std::mt19937_64& rng) {
    validate(params);
    auto plan = detail::plan_reviews(items, participants, params, rng);
    for (auto& p : participants) p.reviewed.clear();
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t idx = 0; idx < items.size(); ++idx) {
        Item& item = items[idx];
        item.reviews.clear();
        double quality_sum = 0.0;
        double difficulty_sum = 0.0;
        for (int r : plan[idx]) {
            Participant& reviewer = participants[static_cast<std::size_t>(r)];
            reviewer.reviewed.push_back(item.id);
            double noise = (1.0 - reviewer.competence) * 0.25;
            ReviewScores s;
            s.relevance = detail::clamp01(item.latent_quality + noise * gauss(rng));
            s.clarity = detail::clamp01(item.latent_quality + noise * gauss(rng));
            s.absence_of_bias = detail::clamp01(item.latent_quality + noise * gauss(rng));
            s.factual_correctness = detail::clamp01(item.latent_quality + noise * gauss(rng));
            s.scientific_accuracy = detail::clamp01(item.latent_quality + noise * gauss(rng));
            s.principle_adherence = detail::clamp01(item.latent_quality + noise * gauss(rng));
            s.difficulty = detail::clamp01(item.latent_difficulty + noise * gauss(rng));
            quality_sum += s.mean_quality();
            difficulty_sum += s.difficulty;
            item.reviews.push_back({reviewer.id, s});
        }
        double review_count = static_cast<double>(item.reviews.size());
        item.mean_difficulty = difficulty_sum / review_count;
        item.accepted = quality_sum / review_count >= params.review_threshold;
    }
}

// Step 3. Assign l_a accepted items per participant, excluding own and
// reviewed items, balanced across difficulty terciles (per-tercile counts
// differ by at most one whenever eligibility allows it).
inline void assign_items(const std::vector<Item>& items, std::vector<Participant>& participants,
                         const MechanismParams& params, std::mt19937_64& rng) {
    validate(params);
    std::vector<std::size_t> accepted;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i].accepted) accepted.push_back(i);
    }
    std::stable_sort(accepted.begin(), accepted.end(), [&](std::size_t a, std::size_t b) {
        if (items[a].mean_difficulty != items[b].mean_difficulty) {
            return items[a].mean_difficulty < items[b].mean_difficulty;
        }
        return items[a].id < items[b].id;
    });
    // tercile index per accepted item
    std::vector<int> tercile_of(items.size(), -1);
    std::size_t count = accepted.size();
    for (std::size_t rank = 0; rank < count; ++rank) {
        tercile_of[accepted[rank]] = static_cast<int>(rank * 3 / std::max<std::size_t>(count, 1));
    }
    for (auto& participant : participants) {
        std::vector<std::size_t> eligible[3];
        for (std::size_t i : accepted) {
            const Item& item = items[i];
            if (item.author == participant.id) continue;
            if (std::find(participant.reviewed.begin(), participant.reviewed.end(), item.id) !=
                participant.reviewed.end()) {
                continue;
            }
            eligible[tercile_of[i]].push_back(i);
        }
        std::size_t total_eligible = eligible[0].size() + eligible[1].size() + eligible[2].size();
        if (total_eligible < static_cast<std::size_t>(params.l_a)) {
            throw InsufficientPool("assign_items: participant " + std::to_string(participant.id) +
                                   " has eligible pool of " + std::to_string(total_eligible) +
                                   " < l_a = " + std::to_string(params.l_a));
        }
        int quota[3] = {params.l_a / 3, params.l_a / 3, params.l_a / 3};
        int extra = params.l_a % 3;
        std::array<int, 3> tercile_order = {0, 1, 2};
        std::shuffle(tercile_order.begin(), tercile_order.end(), rng);
        for (int j = 0; j < extra; ++j) quota[tercile_order[static_cast<std::size_t>(j)]]++;
        for (auto& bucket : eligible) std::shuffle(bucket.begin(), bucket.end(), rng);
        // Move unfillable quota to terciles that still have spare items.
        for (int t = 0; t < 3; ++t) {
            int avail = static_cast<int>(eligible[t].size());
            if (quota[t] <= avail) continue;
            int deficit = quota[t] - avail;
            quota[t] = avail;
            while (deficit > 0) {
                int best = -1;
                for (int u = 0; u < 3; ++u) {
                    if (static_cast<int>(eligible[u].size()) > quota[u] &&
                        (best < 0 || quota[u] < quota[best])) {
                        best = u;
                    }
                }
                quota[best]++;
                --deficit;
            }
        }
        participant.assigned.clear();
        for (int t = 0; t < 3; ++t) {
            for (int j = 0; j < quota[t]; ++j) {
                participant.assigned.push_back(items[eligible[t][static_cast<std::size_t>(j)]].id);
            }
        }
    }
}

// Step 4 + 5. Answer the assigned items, score with the penalty rule, map the
// normalized score to a voting weight.
inline void run_assessment(const std::vector<Item>& items, std::vector<Participant>& participants,
                           const MechanismParams& params, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<double> difficulty_of(items.size(), 0.5);
    for (const auto& item : items) {
        if (!item.reviews.empty()) difficulty_of[static_cast<std::size_t>(item.id)] = item.mean_difficulty;
    }
    for (auto& participant : participants) {
        participant.correct.clear();
        for (int item_id : participant.assigned) {
            double p = participant.competence;
            if (params.difficulty_modulated) {
                double gap = p - difficulty_of[static_cast<std::size_t>(item_id)];
                p = 1.0 / (1.0 + std::exp(-detail::kDifficultySteepness * gap));
            }
            participant.correct.push_back(uni(rng) < p);
        }
        participant.score = score_assessment(participant.correct, params.q, params.s_min);
        participant.normalized_score = normalize_score(participant.score, params.l_a);
        participant.weight = apply_weight_map(participant.normalized_score, params.weight_map);
    }
}

// Sincere voting: correct with probability p_i, otherwise uniform over the
// wrong alternatives. True state is alternative 0.
inline void cast_votes(std::vector<Participant>& participants, int num_alternatives,
                       std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::uniform_int_distribution<int> wrong(1, num_alternatives - 1);
    for (auto& participant : participants) {
        participant.vote = uni(rng) < participant.competence ? 0 : wrong(rng);
    }
}

struct ElectionRecord {
    int n = 0;
    int num_alternatives = 2;
    std::uint64_t seed = 0;
    MechanismParams params;
    int items_authored = 0;
    int items_accepted = 0;
    int winner = -1;
    bool tie = false;
    double herfindahl_index = 0.0;
    double gini_index = 0.0;
    std::string params_hash;
    std::vector<Participant> participants;
};

inline std::string params_digest(const MechanismParams& p, int n, int num_alternatives) {
    std::ostringstream os;
    os << p.q << '|' << p.l_w << '|' << p.l_r << '|' << p.l_a << '|' << p.m << '|' << p.s_min << '|'
       << p.review_threshold << '|' << to_string(p.weight_map.kind) << '|' << p.weight_map.k << '|'
       << p.weight_map.epsilon << '|' << p.difficulty_modulated << '|' << n << '|' << num_alternatives;
    Fnv1a h;
    auto s = os.str();
    h.update_bytes(s.data(), s.size());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h.digest()));
    return std::string(buf);
}

// Steps 1-6 composed on a population sampled from dist. Pure function of
// (dist, params, n, num_alternatives, seed).
inline ElectionRecord run_pipeline(const CompetenceDistribution& dist, const MechanismParams& params,
                                   int n, int num_alternatives, std::uint64_t seed) {
    validate(params);
    if (n < 1) throw DomainError("run_pipeline: n must be >= 1");
    if (num_alternatives < 2) throw DomainError("run_pipeline: need >= 2 alternatives");
    auto rng = make_rng(seed);
    ElectionRecord record;
    record.n = n;
    record.num_alternatives = num_alternatives;
    record.seed = seed;
    record.params = params;
    record.params_hash = params_digest(params, n, num_alternatives);

    record.participants.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        record.participants[static_cast<std::size_t>(i)].id = i;
        record.participants[static_cast<std::size_t>(i)].competence = sample_one(dist, rng);
    }
    auto items = author_items(record.participants, params, rng);
    record.items_authored = static_cast<int>(items.size());
    peer_review(items, record.participants, params, rng);
    record.items_accepted = static_cast<int>(
        std::count_if(items.begin(), items.end(), [](const Item& it) { return it.accepted; }));
    assign_items(items, record.participants, params, rng);
    run_assessment(items, record.participants, params, rng);
    cast_votes(record.participants, num_alternatives, rng);

    std::vector<int> votes;
    std::vector<double> weights;
    votes.reserve(record.participants.size());
    weights.reserve(record.participants.size());
    for (const auto& p : record.participants) {
        votes.push_back(p.vote);
        weights.push_back(p.weight);
    }
    auto outcome = aggregate_weighted_plurality(votes, weights, num_alternatives, rng);
    record.winner = outcome.winner;
    record.tie = outcome.tie;
    auto shares = influence_shares(weights);
    record.herfindahl_index = herfindahl(shares);
    record.gini_index = gini(shares);
    return record;
}

// Line-oriented tabular dump: one row per participant plus a summary record
// in the comment header.
inline void write_election_record(const ElectionRecord& record, std::ostream& os) {
    char buf[128];
    os << "# escm election record\n";
    std::snprintf(buf, sizeof(buf), "# n: %d alternatives: %d seed: %llu\n", record.n,
                  record.num_alternatives, static_cast<unsigned long long>(record.seed));
    os << buf;
    std::snprintf(buf, sizeof(buf), "# items: authored=%d accepted=%d\n", record.items_authored,
                  record.items_accepted);
    os << buf;
    std::snprintf(buf, sizeof(buf), "# summary: winner=%d tie=%d herfindahl=%.9g gini=%.9g params_hash=%s\n",
                  record.winner, record.tie ? 1 : 0, record.herfindahl_index, record.gini_index,
                  record.params_hash.c_str());
    os << buf;
    os << "id,p,s,s_bar,w,v\n";
    for (const auto& p : record.participants) {
        std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g,%.9g,%d\n", p.id, p.competence, p.score,
                      p.normalized_score, p.weight, p.vote);
        os << buf;
    }
}

}  // namespace escm
