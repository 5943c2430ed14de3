#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "escm/montecarlo.hpp"

using namespace escm;

namespace {

MechanismParams fast_params() {
    MechanismParams p;
    p.l_a = 10;
    p.q = 4;
    p.s_min = 0.5;
    p.weight_map = WeightMapSpec::log_odds(0.1);
    return p;
}

}  // namespace

TEST_CASE("perfect point mass wins every majority trial") {
    TrialConfig config;
    config.dist = PointMassSpec(1.0);
    config.params = fast_params();
    config.rule = VoteRule::cjt_majority;
    config.n = 51;
    config.trials = 2000;
    config.seed = 1;
    auto report = simulate(config);
    CHECK(report.success_rate == 1.0);
    CHECK(report.standard_error == 0.0);
    CHECK(report.tie_rate == 0.0);
    CHECK(report.mean_herfindahl == Catch::Approx(1.0 / 51).margin(1e-15));
    CHECK(report.mean_gini == 0.0);
    REQUIRE(report.clt_prediction.has_value());
    CHECK(*report.clt_prediction == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("coin-flip majority stays at one half") {
    TrialConfig config;
    config.dist = PointMassSpec(0.5);
    config.params = fast_params();
    config.rule = VoteRule::cjt_majority;
    config.n = 501;
    config.trials = 100000;
    config.seed = 3;
    config.threads = 2;
    auto report = simulate(config);
    CHECK(report.success_rate == Catch::Approx(0.5).margin(0.005));
    REQUIRE(report.clt_prediction.has_value());
    CHECK(*report.clt_prediction == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("simulation is deterministic and thread-count independent") {
    TrialConfig config;
    config.dist = BetaSpec(2, 2);
    config.params = fast_params();
    config.rule = VoteRule::escm;
    config.n = 51;
    config.trials = 400;
    config.seed = 9;
    config.threads = 1;
    auto a = simulate(config);
    config.threads = 4;
    auto b = simulate(config);
    CHECK(a.success_rate == b.success_rate);
    CHECK(a.mean_herfindahl == b.mean_herfindahl);
    CHECK(a.mean_gini == b.mean_gini);
    CHECK(a.tie_rate == b.tie_rate);
    CHECK(a.seeds_hash == b.seeds_hash);
    config.seed = 10;
    auto c = simulate(config);
    CHECK(a.seeds_hash != c.seeds_hash);
}

TEST_CASE("escm estimate tracks the gaussian prediction") {
    TrialConfig config;
    config.params = fast_params();
    config.rule = VoteRule::escm;
    config.n = 501;
    config.trials = 20000;
    config.seed = 11;
    config.threads = 2;

    config.dist = beta_from_mu_sigma({0.52, 0.15});
    config.params.weight_map = WeightMapSpec::linear();
    auto r1 = simulate(config);
    REQUIRE(r1.clt_prediction.has_value());
    CHECK(std::fabs(r1.success_rate - *r1.clt_prediction) <= 0.02);

    config.dist = cmm3_wide(0.45, 0.55);
    auto r2 = simulate(config);
    REQUIRE(r2.clt_prediction.has_value());
    CHECK(std::fabs(r2.success_rate - *r2.clt_prediction) <= 0.02);
    // the informative tails push success above the majority baseline
    CHECK(r2.success_rate > cjt_success(501, moments(CompetenceDistribution(config.dist)).mean).value);
}

TEST_CASE("two-voter ties are frequent and fair") {
    TrialConfig config;
    config.dist = PointMassSpec(0.5);
    config.params = fast_params();
    config.rule = VoteRule::cjt_majority;
    config.n = 2;
    config.trials = 20000;
    config.seed = 5;
    auto report = simulate(config);
    CHECK(report.tie_rate == Catch::Approx(0.5).margin(0.02));
    CHECK(report.success_rate == Catch::Approx(0.5).margin(0.015));
}

TEST_CASE("majority estimate sits within four standard errors of exact almost always") {
    CompetenceDistribution dist = BetaSpec(5, 3);
    double exact = cjt_success(51, moments(dist).mean).value;
    int covered = 0;
    const int meta_runs = 200;
    for (int run = 0; run < meta_runs; ++run) {
        TrialConfig config;
        config.dist = dist;
        config.params = fast_params();
        config.rule = VoteRule::cjt_majority;
        config.n = 51;
        config.trials = 1000;
        config.seed = 1000 + static_cast<std::uint64_t>(run);
        auto report = simulate(config);
        double se = std::max(report.standard_error, 1e-12);
        if (std::fabs(report.success_rate - exact) <= 4.0 * se) ++covered;
    }
    CHECK(covered >= 198);
}

TEST_CASE("pipeline path agrees with the fast path") {
    MechanismParams params;
    params.q = 4;
    params.l_w = 5;
    params.l_r = 10;
    params.l_a = 10;
    params.m = 2;
    params.s_min = 0.5;
    params.review_threshold = 0.35;
    params.weight_map = WeightMapSpec::log_odds(0.1);

    TrialConfig config;
    config.dist = BetaSpec(2, 2);
    config.params = params;
    config.rule = VoteRule::escm;
    config.n = 15;
    config.trials = 3000;
    config.seed = 21;
    config.threads = 2;
    auto fast = simulate(config);
    config.pipeline = true;
    auto full = simulate(config);
    double combined = std::sqrt(fast.standard_error * fast.standard_error +
                                full.standard_error * full.standard_error);
    CHECK(std::fabs(fast.success_rate - full.success_rate) <= 3.0 * combined);
}

TEST_CASE("validate_clt reports both variance modes") {
    auto params = fast_params();
    params.weight_map = WeightMapSpec::linear();
    auto v = validate_clt(BetaSpec(2, 2), params, 51, 10000, 31, 2);
    CHECK(std::isfinite(v.paper_prediction));
    CHECK(std::isfinite(v.total_prediction));
    CHECK(v.paper_gap == Catch::Approx(std::fabs(v.mc.success_rate - v.paper_prediction)).margin(1e-15));
    CHECK(v.total_gap == Catch::Approx(std::fabs(v.mc.success_rate - v.total_prediction)).margin(1e-15));
    bool better_is_recorded = v.better_mode == VarianceMode::paper ||
                              v.better_mode == VarianceMode::total_variance;
    CHECK(better_is_recorded);
    CHECK_THROWS_AS(validate_clt(BetaSpec(2, 2), params, 51, 5000, 31), DomainError);
}

TEST_CASE("validate_clt sanity anchor under the unit embedding") {
    auto params = fast_params();
    params.weight_map = WeightMapSpec::unit();
    CompetenceDistribution dist = beta_from_mu_sigma({0.52, 0.15});
    auto v = validate_clt(dist, params, 501, 10000, 41, 2);
    double exact = cjt_success(501, moments(dist).mean).value;
    CHECK(std::fabs(v.mc.success_rate - exact) <= 4.0 * v.mc.standard_error);
}

TEST_CASE("validate_clt degenerates cleanly at a perfect point mass") {
    auto params = fast_params();
    auto v = validate_clt(PointMassSpec(1.0), params, 501, 10000, 51, 2);
    CHECK(v.mc.success_rate == Catch::Approx(1.0).margin(1e-6));
    CHECK(v.paper_prediction == Catch::Approx(1.0).margin(1e-6));
    CHECK(v.total_prediction == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("exhaustive optimality of known-competence weights") {
    std::vector<double> expert = {0.9, 0.6, 0.6};
    std::vector<std::vector<double>> comparisons = {{1.0, 1.0, 1.0}, {0.2, 0.5, 0.9}};
    auto report = optimality_check(expert, comparisons);
    CHECK(report.np_success == Catch::Approx(0.9).margin(1e-12));
    CHECK(report.comparison_success[0] == Catch::Approx(0.792).margin(1e-12));
    CHECK(report.max_violation <= 1e-12);

    std::vector<double> homogeneous = {0.7, 0.7, 0.7};
    std::vector<std::vector<double>> unweighted = {{1.0, 1.0, 1.0}};
    auto homo = optimality_check(homogeneous, unweighted);
    CHECK(homo.np_success == Catch::Approx(homo.comparison_success[0]).margin(1e-15));

    std::vector<double> five = {0.9, 0.55, 0.55, 0.55, 0.55};
    auto wide = optimality_check(five, {{1.0, 1.0, 1.0, 1.0, 1.0}});
    CHECK(wide.np_success > wide.comparison_success[0] + 1e-6);

    std::vector<double> too_big(16, 0.6);
    std::vector<double> w16(16, 1.0);
    CHECK_THROWS_AS(exhaustive_weighted_majority_success(too_big, w16), TooLargeForExhaustive);
}

TEST_CASE("optimality holds when below-chance voters dominate the jury") {
    // the logit sum is negative here; the optimal rule must still win
    std::vector<double> weak = {0.30, 0.45, 0.52};
    std::vector<std::vector<double>> comparisons = {{1.0, 1.0, 1.0}, {0.1, 0.2, 0.7}};
    auto report = optimality_check(weak, comparisons);
    CHECK(report.max_violation <= 1e-12);
    // inverting the weakest voter beats trusting everyone equally
    CHECK(report.np_success > report.comparison_success[0]);
}

TEST_CASE("estimated log-odds weights approach the known-competence optimum") {
    auto population = sample(CompetenceDistribution(BetaSpec(4, 2)), 21, 2025);
    std::vector<int> lengths = {10, 100, 1000};
    auto distances = np_convergence_distances(population, lengths, 50, 7);
    REQUIRE(distances.size() == 3);
    CHECK(distances[0] > distances[1]);
    CHECK(distances[1] > distances[2]);
    CHECK(distances[2] < 0.02);
}
