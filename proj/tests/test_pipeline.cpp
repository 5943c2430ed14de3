#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <sstream>

#include "escm/pipeline.hpp"

using namespace escm;

namespace {

std::vector<Participant> make_population(int n, double competence) {
    std::vector<Participant> ps(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        ps[static_cast<std::size_t>(i)].id = i;
        ps[static_cast<std::size_t>(i)].competence = competence;
    }
    return ps;
}

MechanismParams demo_params() {
    MechanismParams p;
    p.q = 4;
    p.l_w = 4;
    p.l_r = 12;
    p.l_a = 10;
    p.m = 3;
    p.s_min = 0.5;
    p.review_threshold = 0.5;
    p.weight_map = WeightMapSpec::log_odds(0.1);
    return p;
}

// Profile with a wide feasibility margin for randomized-seed sweeps: with
// n = 15 the eligible pool stays far above l_a for any plausible draw.
MechanismParams roomy_params() {
    MechanismParams p;
    p.q = 4;
    p.l_w = 5;
    p.l_r = 10;
    p.l_a = 10;
    p.m = 2;
    p.s_min = 0.5;
    p.review_threshold = 0.35;
    p.weight_map = WeightMapSpec::log_odds(0.1);
    return p;
}

}  // namespace

TEST_CASE("authoring produces n*l_w items") {
    auto rng = make_rng(1);
    auto ps = make_population(10, 0.6);
    MechanismParams params = demo_params();
    params.l_w = 5;
    auto items = author_items(ps, params, rng);
    CHECK(items.size() == 50);
    for (const auto& p : ps) CHECK(p.authored.size() == 5);
    for (const auto& item : items) {
        CHECK((item.latent_quality >= 0.0 && item.latent_quality <= 1.0));
        CHECK((item.latent_difficulty >= 0.0 && item.latent_difficulty <= 1.0));
    }

    auto none = make_population(3, 0.6);
    params.l_w = 0;
    auto rng2 = make_rng(1);
    CHECK(author_items(none, params, rng2).empty());
}

TEST_CASE("authoring is deterministic in the seed") {
    MechanismParams params = demo_params();
    auto ps1 = make_population(6, 0.6);
    auto ps2 = make_population(6, 0.6);
    auto rng1 = make_rng(42);
    auto rng2 = make_rng(42);
    auto a = author_items(ps1, params, rng1);
    auto b = author_items(ps2, params, rng2);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].latent_quality == b[i].latent_quality);
        CHECK(a[i].latent_difficulty == b[i].latent_difficulty);
        CHECK(a[i].author == b[i].author);
    }
}

TEST_CASE("peer review acceptance rule at the extremes") {
    // noise-free reviewers (competence 1) score exactly the latent quality
    auto ps = make_population(5, 1.0);
    MechanismParams params = demo_params();
    params.m = 3;
    params.l_r = 10;
    std::vector<Item> items(2);
    items[0] = {0, 0, 1.0, 0.5, {}, false, 0.0};
    items[1] = {1, 1, 0.0, 0.5, {}, false, 0.0};
    auto rng = make_rng(3);
    peer_review(items, ps, params, rng);
    CHECK(items[0].accepted);
    CHECK(!items[1].accepted);
    for (const auto& item : items) {
        CHECK(item.reviews.size() == 3);
        for (const auto& review : item.reviews) CHECK(review.reviewer != item.author);
    }
}

TEST_CASE("review load infeasibility") {
    auto ps = make_population(5, 0.6);
    MechanismParams params = demo_params();
    params.l_w = 2;
    params.l_r = 2;
    params.m = 3;
    auto rng = make_rng(4);
    auto items = author_items(ps, params, rng);
    REQUIRE(items.size() == 10);  // n*l_r = 10 < m*|Q0| = 30
    CHECK_THROWS_AS(peer_review(items, ps, params, rng), InfeasibleReviewLoad);
}

TEST_CASE("peer review respects structural constraints") {
    auto rng = make_rng(9);
    std::vector<Participant> ps(12);
    std::uniform_real_distribution<double> uni(0.1, 0.95);
    for (int i = 0; i < 12; ++i) {
        ps[static_cast<std::size_t>(i)].id = i;
        ps[static_cast<std::size_t>(i)].competence = uni(rng);
    }
    MechanismParams params = demo_params();
    auto items = author_items(ps, params, rng);
    peer_review(items, ps, params, rng);
    std::vector<int> load(12, 0);
    for (const auto& item : items) {
        REQUIRE(item.reviews.size() == static_cast<std::size_t>(params.m));
        std::set<int> reviewers;
        double quality = 0.0, difficulty = 0.0;
        for (const auto& review : item.reviews) {
            CHECK(review.reviewer != item.author);
            reviewers.insert(review.reviewer);
            load[static_cast<std::size_t>(review.reviewer)]++;
            quality += review.scores.mean_quality();
            difficulty += review.scores.difficulty;
        }
        CHECK(reviewers.size() == static_cast<std::size_t>(params.m));  // distinct reviewers
        CHECK(item.accepted == (quality / params.m >= params.review_threshold));
        CHECK(item.mean_difficulty == Catch::Approx(difficulty / params.m).margin(1e-12));
    }
    for (int i = 0; i < 12; ++i) {
        CHECK(load[static_cast<std::size_t>(i)] <= params.l_r);
        CHECK(load[static_cast<std::size_t>(i)] == static_cast<int>(ps[static_cast<std::size_t>(i)].reviewed.size()));
    }
}

TEST_CASE("assignment takes the whole pool when it is exactly l_a") {
    std::vector<Item> items(10);
    for (int i = 0; i < 10; ++i) {
        items[static_cast<std::size_t>(i)] =
            {i, 99, 0.8, 0.0, {}, true, (i + 0.5) / 10.0};
    }
    std::vector<Participant> ps = make_population(1, 0.7);
    MechanismParams params = demo_params();
    params.l_a = 10;
    auto rng = make_rng(5);
    assign_items(items, ps, params, rng);
    REQUIRE(ps[0].assigned.size() == 10);
    std::set<int> got(ps[0].assigned.begin(), ps[0].assigned.end());
    CHECK(got.size() == 10);

    params.l_a = 11;
    params.s_min = 0.5;
    CHECK_THROWS_AS(assign_items(items, ps, params, rng), InsufficientPool);
}

TEST_CASE("assignment balances difficulty terciles") {
    std::vector<Item> items(30);
    for (int i = 0; i < 30; ++i) {
        items[static_cast<std::size_t>(i)] =
            {i, 99, 0.8, 0.0, {}, true, (i + 0.5) / 30.0};
    }
    auto ps = make_population(4, 0.7);
    MechanismParams params = demo_params();
    params.l_a = 9;
    auto rng = make_rng(6);
    assign_items(items, ps, params, rng);
    for (const auto& p : ps) {
        REQUIRE(p.assigned.size() == 9);
        int per_tercile[3] = {0, 0, 0};
        for (int id : p.assigned) {
            // items are pre-sorted by difficulty, id order = difficulty order
            per_tercile[id / 10]++;
        }
        CHECK(per_tercile[0] == 3);
        CHECK(per_tercile[1] == 3);
        CHECK(per_tercile[2] == 3);
    }
}

TEST_CASE("assignment never hands out own or reviewed items") {
    auto rng = make_rng(12);
    std::vector<Participant> ps(12);
    std::uniform_real_distribution<double> uni(0.3, 0.95);
    for (int i = 0; i < 12; ++i) {
        ps[static_cast<std::size_t>(i)].id = i;
        ps[static_cast<std::size_t>(i)].competence = uni(rng);
    }
    MechanismParams params = demo_params();
    params.review_threshold = 0.3;  // keep the pool comfortably large
    auto items = author_items(ps, params, rng);
    peer_review(items, ps, params, rng);
    assign_items(items, ps, params, rng);
    for (const auto& p : ps) {
        REQUIRE(p.assigned.size() == static_cast<std::size_t>(params.l_a));
        std::set<int> assigned(p.assigned.begin(), p.assigned.end());
        CHECK(assigned.size() == p.assigned.size());
        for (int id : p.authored) CHECK(assigned.count(id) == 0);
        for (int id : p.reviewed) CHECK(assigned.count(id) == 0);
        for (int id : assigned) CHECK(items[static_cast<std::size_t>(id)].accepted);
    }
}

TEST_CASE("perfect voters always win") {
    MechanismParams params = demo_params();
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto record = run_pipeline(PointMassSpec(1.0), params, 51, 2, seed);
        CHECK(record.winner == 0);
        CHECK(!record.tie);
        for (const auto& p : record.participants) {
            CHECK(p.vote == 0);
            CHECK(p.score == 10.0);
            CHECK(p.weight == Catch::Approx(std::log(11.0)).margin(1e-12));
        }
    }
}

TEST_CASE("pipeline is reproducible from the seed") {
    MechanismParams params = demo_params();
    auto a = run_pipeline(BetaSpec(2, 2), params, 21, 2, 77);
    auto b = run_pipeline(BetaSpec(2, 2), params, 21, 2, 77);
    CHECK(a.winner == b.winner);
    CHECK(a.herfindahl_index == b.herfindahl_index);
    CHECK(a.gini_index == b.gini_index);
    REQUIRE(a.participants.size() == b.participants.size());
    for (std::size_t i = 0; i < a.participants.size(); ++i) {
        CHECK(a.participants[i].competence == b.participants[i].competence);
        CHECK(a.participants[i].score == b.participants[i].score);
        CHECK(a.participants[i].weight == b.participants[i].weight);
        CHECK(a.participants[i].vote == b.participants[i].vote);
        CHECK(a.participants[i].assigned == b.participants[i].assigned);
    }
    auto c = run_pipeline(BetaSpec(2, 2), params, 21, 2, 78);
    bool any_diff = c.winner != a.winner;
    for (std::size_t i = 0; i < a.participants.size() && !any_diff; ++i) {
        any_diff = a.participants[i].competence != c.participants[i].competence;
    }
    CHECK(any_diff);
}

TEST_CASE("emitted weights stay within the published bounds") {
    std::vector<WeightMapSpec> maps = {WeightMapSpec::linear(), WeightMapSpec::power(2.0),
                                       WeightMapSpec::log_odds(0.1)};
    for (const auto& map : maps) {
        MechanismParams params = roomy_params();
        params.weight_map = map;
        auto bounds = weight_bounds(params);
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            auto record = run_pipeline(BetaSpec(2, 2), params, 15, 2, seed);
            for (const auto& p : record.participants) {
                CHECK(bounds.contains(p.weight));
            }
        }
    }
}

TEST_CASE("coin-flip population is a coin-flip election") {
    MechanismParams params = demo_params();
    params.weight_map = WeightMapSpec::linear();
    int successes = 0;
    const int runs = 10000;
    for (int seed = 0; seed < runs; ++seed) {
        auto record = run_pipeline(PointMassSpec(0.5), params, 51, 2,
                                   static_cast<std::uint64_t>(seed));
        if (record.winner == 0) ++successes;
    }
    double rate = static_cast<double>(successes) / runs;
    CHECK(rate == Catch::Approx(0.5).margin(0.015));
}

TEST_CASE("difficulty modulation keeps the contract intact") {
    MechanismParams params = roomy_params();
    params.difficulty_modulated = true;
    auto record = run_pipeline(BetaSpec(5, 3), params, 15, 2, 3);
    auto bounds = weight_bounds(params);
    for (const auto& p : record.participants) {
        CHECK(p.correct.size() == static_cast<std::size_t>(params.l_a));
        CHECK(bounds.contains(p.weight));
    }
}

TEST_CASE("election record serialization") {
    MechanismParams params = roomy_params();
    auto record = run_pipeline(BetaSpec(2, 2), params, 9, 2, 5);
    std::ostringstream os1, os2;
    write_election_record(record, os1);
    write_election_record(record, os2);
    CHECK(os1.str() == os2.str());
    std::istringstream in(os1.str());
    std::string line;
    int comments = 0, rows = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.rfind("#", 0) == 0) {
            ++comments;
        } else if (line == "id,p,s,s_bar,w,v") {
            header_seen = true;
        } else if (!line.empty()) {
            ++rows;
        }
    }
    CHECK(header_seen);
    CHECK(comments == 4);
    CHECK(rows == 9);
    CHECK(record.params_hash.size() == 16);
    CHECK(record.params_hash == params_digest(params, 9, 2));
    CHECK(params_digest(params, 9, 2) != params_digest(params, 11, 2));
    CHECK(params_digest(params, 9, 2) != params_digest(demo_params(), 9, 2));
}
