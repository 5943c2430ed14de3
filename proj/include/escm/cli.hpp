#pragma once

// Command-line front end: config-file plus flag parsing into a validated
// RunConfig, and the dispatcher that executes it and writes artifacts.
// Exit-code contract (enforced by the binary): 0 success, 1 runtime failure,
// 2 usage error.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "escm/config_json.hpp"
#include "escm/heatmap_image.hpp"
#include "escm/montecarlo.hpp"
#include "escm/pipeline.hpp"
#include "escm/scan.hpp"
#include "escm/version.hpp"

namespace escm {

namespace fs = std::filesystem;

struct RunConfig {
    enum class Command { scan_beta, scan_cmm, simulate, validate, weights_report, pipeline_demo };

    Command command = Command::simulate;
    CompetenceDistribution dist = BetaSpec(2, 2);
    MechanismParams params;
    GridSpec grid;  // family/axes prefilled per scan command
    int n = 501;
    std::int64_t trials = 10000;
    VoteRule rule = VoteRule::escm;
    bool pipeline = false;
    int num_alternatives = 2;
    VarianceMode sim_mode = VarianceMode::total_variance;
    int demo_n = 12;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    fs::path output_dir = "escm_out";
    PaletteOptions palette;
};

inline const char* to_string(RunConfig::Command command) {
    switch (command) {
        case RunConfig::Command::scan_beta: return "scan-beta";
        case RunConfig::Command::scan_cmm: return "scan-cmm";
        case RunConfig::Command::simulate: return "simulate";
        case RunConfig::Command::validate: return "validate";
        case RunConfig::Command::weights_report: return "weights-report";
        case RunConfig::Command::pipeline_demo: return "pipeline-demo";
    }
    return "?";
}

inline json config_to_json(const RunConfig& config) {
    json j;
    j["command"] = to_string(config.command);
    j["dist"] = dist_to_json(config.dist);
    j["params"] = params_to_json(config.params);
    j["grid"] = {{"x", axis_to_json(config.grid.x_axis)},
                 {"y", axis_to_json(config.grid.y_axis)},
                 {"family", to_string(config.grid.family)},
                 {"n", config.grid.n},
                 {"mode", to_string(config.grid.mode)}};
    j["n"] = config.n;
    j["trials"] = config.trials;
    j["rule"] = to_string(config.rule);
    j["pipeline"] = config.pipeline;
    j["alternatives"] = config.num_alternatives;
    j["sim_mode"] = to_string(config.sim_mode);
    j["demo_n"] = config.demo_n;
    j["seed"] = config.seed;
    j["threads"] = config.threads;
    j["output_dir"] = config.output_dir.string();
    j["palette"] = {{"reverse", config.palette.reverse}, {"cell_px", config.palette.cell_px}};
    return j;
}

namespace detail {

// Staging area: CLI11 fills these, counts tell which flags were present.
struct FlagStage {
    std::string config_file;
    std::string dist;
    std::string map;
    std::string mode;
    std::string rule;
    std::string out;
    int n = 0, la = 0, lw = 0, lr = 0, m = 0, q = 0;
    double smin = 0, review_threshold = 0, k = 0, eps = 0;
    std::int64_t trials = 0;
    int alternatives = 0, demo_n = 0, cell_px = 0;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    bool pipeline = false;
    bool reverse_palette = false;
    double x_min = 0, x_max = 0;
    int x_steps = 0;
    double y_min = 0, y_max = 0;
    int y_steps = 0;
};

inline void apply_config_file(RunConfig& config, const std::string& path) {
    std::ifstream is(path);
    if (!is) throw UsageError("--config: cannot open " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw UsageError("--config: " + path + " is not valid JSON (" + e.what() + ")");
    }
    if (j.contains("dist")) config.dist = dist_from_json(j.at("dist"));
    if (j.contains("params")) params_from_json(j.at("params"), config.params);
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        if (g.contains("x")) axis_from_json(g.at("x"), config.grid.x_axis);
        if (g.contains("y")) axis_from_json(g.at("y"), config.grid.y_axis);
        if (g.contains("n")) config.grid.n = g.at("n").get<int>();
        if (g.contains("mode")) {
            config.grid.mode = variance_mode_from_string(g.at("mode").get<std::string>());
        }
    }
    if (j.contains("n")) config.n = j.at("n").get<int>();
    if (j.contains("trials")) config.trials = j.at("trials").get<std::int64_t>();
    if (j.contains("rule")) config.rule = rule_from_string(j.at("rule").get<std::string>());
    if (j.contains("pipeline")) config.pipeline = j.at("pipeline").get<bool>();
    if (j.contains("alternatives")) config.num_alternatives = j.at("alternatives").get<int>();
    if (j.contains("sim_mode")) {
        config.sim_mode = variance_mode_from_string(j.at("sim_mode").get<std::string>());
    }
    if (j.contains("demo_n")) config.demo_n = j.at("demo_n").get<int>();
    if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads")) config.threads = j.at("threads").get<unsigned>();
    if (j.contains("output_dir")) config.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("palette")) {
        const auto& p = j.at("palette");
        if (p.contains("reverse")) config.palette.reverse = p.at("reverse").get<bool>();
        if (p.contains("cell_px")) config.palette.cell_px = p.at("cell_px").get<int>();
    }
}

inline void collect(std::vector<std::string>& violations, const char* label, auto&& check) {
    try {
        check();
    } catch (const Error& e) {
        violations.push_back(std::string(label) + ": " + e.what());
    }
}

inline std::vector<std::string> validate_config(const RunConfig& config) {
    std::vector<std::string> violations;
    const auto& p = config.params;
    if (p.q < 2) violations.push_back("q: q must be >= 2");
    if (p.l_w < 0) violations.push_back("lw: must be >= 0");
    if (p.l_r < 0) violations.push_back("lr: must be >= 0");
    if (p.l_a < 1) violations.push_back("la: must be >= 1");
    if (p.m < 1) violations.push_back("m: must be >= 1");
    if (!(p.s_min > 0.0)) violations.push_back("smin: must be positive");
    if (p.l_a >= 1 && p.s_min > 0.0 && !(p.s_min < p.l_a)) {
        violations.push_back("smin: must be below l_a");
    }
    if (!(p.review_threshold >= 0.0 && p.review_threshold <= 1.0)) {
        violations.push_back("review-threshold: must lie in [0,1]");
    }
    collect(violations, "map", [&] { validate(p.weight_map); });
    bool is_scan = config.command == RunConfig::Command::scan_beta ||
                   config.command == RunConfig::Command::scan_cmm;
    if (is_scan) {
        for (const auto* axis : {&config.grid.x_axis, &config.grid.y_axis}) {
            if (axis->steps < 2) violations.push_back(axis->name + ": steps must be >= 2");
            if (!(axis->min < axis->max)) violations.push_back(axis->name + ": min must be below max");
        }
        if (config.grid.n < 1 || config.grid.n % 2 == 0) {
            violations.push_back("n: must be odd and positive for scans");
        }
        if (config.grid.family == GridFamily::cmm3_wide) {
            if (!(config.grid.x_axis.min > 0.0 && config.grid.x_axis.max < 0.5)) {
                violations.push_back("mu1 axis: must lie inside (0, 0.5)");
            }
            if (!(config.grid.y_axis.min > 0.5 && config.grid.y_axis.max < 1.0)) {
                violations.push_back("mu3 axis: must lie inside (0.5, 1)");
            }
        }
    } else {
        if (config.n < 1) violations.push_back("n: must be >= 1");
        if (config.trials < 1) violations.push_back("trials: must be >= 1");
        if (config.num_alternatives < 2) violations.push_back("alternatives: must be >= 2");
    }
    if (config.command == RunConfig::Command::validate && config.trials < 10000) {
        violations.push_back("trials: validate needs at least 10000 trials");
    }
    if (config.command == RunConfig::Command::pipeline_demo) {
        if (config.demo_n > 20) violations.push_back("demo_n: the worked demo caps at n = 20");
        if (config.demo_n < config.params.m + 1) {
            violations.push_back("demo_n: need at least m+1 participants");
        }
    }
    if (config.palette.cell_px < 1) violations.push_back("cell_px: must be >= 1");
    return violations;
}

}  // namespace detail

// Parses argv-style arguments (without the program name). Returns nullopt if
// help was requested (help text goes to out). Throws UsageError on invalid
// input, listing every violated constraint.
inline std::optional<RunConfig> parse_and_validate(const std::vector<std::string>& args,
                                                   std::ostream& out) {
    CLI::App app{"escm: bounded epistemic weighting laboratory"};
    app.require_subcommand(1);
    detail::FlagStage stage;

    struct CommandOptions {
        CLI::App* cmd;
        CLI::Option* config = nullptr;
        CLI::Option* dist = nullptr;
        CLI::Option* out_dir = nullptr;
        CLI::Option* seed = nullptr;
        CLI::Option* threads = nullptr;
        CLI::Option* n = nullptr;
        CLI::Option* la = nullptr;
        CLI::Option* lw = nullptr;
        CLI::Option* lr = nullptr;
        CLI::Option* m = nullptr;
        CLI::Option* q = nullptr;
        CLI::Option* smin = nullptr;
        CLI::Option* review_threshold = nullptr;
        CLI::Option* map = nullptr;
        CLI::Option* k = nullptr;
        CLI::Option* eps = nullptr;
        CLI::Option* mode = nullptr;
        CLI::Option* trials = nullptr;
        CLI::Option* rule = nullptr;
        CLI::Option* pipeline = nullptr;
        CLI::Option* alternatives = nullptr;
        CLI::Option* demo_n = nullptr;
        CLI::Option* x_min = nullptr, *x_max = nullptr, *x_steps = nullptr;
        CLI::Option* y_min = nullptr, *y_max = nullptr, *y_steps = nullptr;
        CLI::Option* cell_px = nullptr;
        CLI::Option* reverse_palette = nullptr;
    };

    auto add_common = [&](CLI::App* cmd) {
        CommandOptions opts;
        opts.cmd = cmd;
        opts.config = cmd->add_option("--config", stage.config_file, "JSON config file");
        opts.dist = cmd->add_option("--dist", stage.dist,
                                    "competence distribution (beta:a,b | beta-ms:mu,sigma | "
                                    "tnorm:loc,scale | cmm3:mu1,mu3 | point:p)");
        opts.out_dir = cmd->add_option("--out", stage.out, "output directory");
        opts.seed = cmd->add_option("--seed", stage.seed, "master seed");
        opts.threads = cmd->add_option("--threads", stage.threads, "worker cap (0 = all cores)");
        opts.n = cmd->add_option("--n", stage.n, "electorate size");
        opts.la = cmd->add_option("--la", stage.la, "assessment length l_a");
        opts.lw = cmd->add_option("--lw", stage.lw, "items authored per participant");
        opts.lr = cmd->add_option("--lr", stage.lr, "review capacity per participant");
        opts.m = cmd->add_option("--m", stage.m, "reviewers per item");
        opts.q = cmd->add_option("--q", stage.q, "options per assessment item");
        opts.smin = cmd->add_option("--smin", stage.smin, "score floor s_min");
        opts.review_threshold =
            cmd->add_option("--review-threshold", stage.review_threshold, "acceptance threshold");
        opts.map = cmd->add_option("--map", stage.map, "weight map: linear|power|logodds|unit");
        opts.k = cmd->add_option("--k", stage.k, "power map exponent");
        opts.eps = cmd->add_option("--eps", stage.eps, "log-odds smoothing epsilon");
        opts.mode = cmd->add_option("--mode", stage.mode, "variance mode: paper|total_variance");
        return opts;
    };

    auto* scan_beta_cmd = app.add_subcommand("scan-beta", "scan the Beta (mu, sigma) plane");
    auto beta_opts = add_common(scan_beta_cmd);
    auto* scan_cmm_cmd = app.add_subcommand("scan-cmm", "scan the mixture (mu1, mu3) plane");
    auto cmm_opts = add_common(scan_cmm_cmd);
    for (auto* opts : {&beta_opts, &cmm_opts}) {
        auto* cmd = opts->cmd;
        opts->x_min = cmd->add_option("--x-min", stage.x_min, "x axis minimum");
        opts->x_max = cmd->add_option("--x-max", stage.x_max, "x axis maximum");
        opts->x_steps = cmd->add_option("--x-steps", stage.x_steps, "x axis steps");
        opts->y_min = cmd->add_option("--y-min", stage.y_min, "y axis minimum");
        opts->y_max = cmd->add_option("--y-max", stage.y_max, "y axis maximum");
        opts->y_steps = cmd->add_option("--y-steps", stage.y_steps, "y axis steps");
        opts->cell_px = cmd->add_option("--cell-px", stage.cell_px, "pixels per heatmap cell");
        opts->reverse_palette =
            cmd->add_flag("--reverse-palette", stage.reverse_palette, "reverse the color mapping");
    }

    auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo election runs");
    auto sim_opts = add_common(simulate_cmd);
    sim_opts.trials = simulate_cmd->add_option("--trials", stage.trials, "number of trials");
    sim_opts.rule = simulate_cmd->add_option(
        "--rule", stage.rule, "aggregation rule: escm|cjt|np|likelihood");
    sim_opts.pipeline =
        simulate_cmd->add_flag("--pipeline", stage.pipeline, "run the full six-step pipeline");
    sim_opts.alternatives =
        simulate_cmd->add_option("--alternatives", stage.alternatives, "number of alternatives");

    auto* validate_cmd = app.add_subcommand("validate", "Monte Carlo vs CLT validation report");
    auto val_opts = add_common(validate_cmd);
    val_opts.trials = validate_cmd->add_option("--trials", stage.trials, "number of trials");

    auto* weights_cmd = app.add_subcommand("weights-report", "weight bounds and score tables");
    auto weights_opts = add_common(weights_cmd);

    auto* demo_cmd = app.add_subcommand("pipeline-demo", "worked six-step election, n <= 20");
    auto demo_opts = add_common(demo_cmd);
    demo_opts.demo_n = demo_cmd->add_option("--demo-n", stage.demo_n, "demo population size");
    demo_opts.alternatives =
        demo_cmd->add_option("--alternatives", stage.alternatives, "number of alternatives");

    std::vector<const char*> argv;
    argv.push_back("escm");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return std::nullopt;
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    RunConfig config;
    const CommandOptions* opts = nullptr;
    if (scan_beta_cmd->parsed()) {
        config.command = RunConfig::Command::scan_beta;
        config.grid = GridSpec::default_beta();
        config.grid.mode = VarianceMode::paper;
        opts = &beta_opts;
    } else if (scan_cmm_cmd->parsed()) {
        config.command = RunConfig::Command::scan_cmm;
        config.grid = GridSpec::default_cmm();
        config.grid.mode = VarianceMode::paper;
        opts = &cmm_opts;
    } else if (simulate_cmd->parsed()) {
        config.command = RunConfig::Command::simulate;
        opts = &sim_opts;
    } else if (validate_cmd->parsed()) {
        config.command = RunConfig::Command::validate;
        config.trials = 100000;
        opts = &val_opts;
    } else if (weights_cmd->parsed()) {
        config.command = RunConfig::Command::weights_report;
        opts = &weights_opts;
    } else {
        config.command = RunConfig::Command::pipeline_demo;
        opts = &demo_opts;
    }

    if (const char* env = std::getenv("ESCM_OUTPUT_DIR")) config.output_dir = env;
    if (opts->config->count() > 0) detail::apply_config_file(config, stage.config_file);

    auto present = [](CLI::Option* opt) { return opt != nullptr && opt->count() > 0; };
    if (present(opts->dist)) config.dist = dist_from_flag(stage.dist);
    if (present(opts->out_dir)) config.output_dir = stage.out;
    if (present(opts->seed)) config.seed = stage.seed;
    if (present(opts->threads)) config.threads = stage.threads;
    if (present(opts->n)) {
        config.n = stage.n;
        config.grid.n = stage.n;
    }
    if (present(opts->la)) config.params.l_a = stage.la;
    if (present(opts->lw)) config.params.l_w = stage.lw;
    if (present(opts->lr)) config.params.l_r = stage.lr;
    if (present(opts->m)) config.params.m = stage.m;
    if (present(opts->q)) config.params.q = stage.q;
    if (present(opts->smin)) config.params.s_min = stage.smin;
    if (present(opts->review_threshold)) config.params.review_threshold = stage.review_threshold;
    if (present(opts->map)) config.params.weight_map.kind = weight_map_kind_from_string(stage.map);
    if (present(opts->k)) config.params.weight_map.k = stage.k;
    if (present(opts->eps)) config.params.weight_map.epsilon = stage.eps;
    if (present(opts->mode)) {
        auto mode = variance_mode_from_string(stage.mode);
        config.grid.mode = mode;
        config.sim_mode = mode;
    }
    if (present(opts->trials)) config.trials = stage.trials;
    if (present(opts->rule)) config.rule = rule_from_string(stage.rule);
    if (present(opts->pipeline)) config.pipeline = stage.pipeline;
    if (present(opts->alternatives)) config.num_alternatives = stage.alternatives;
    if (present(opts->demo_n)) config.demo_n = stage.demo_n;
    if (present(opts->x_min)) config.grid.x_axis.min = stage.x_min;
    if (present(opts->x_max)) config.grid.x_axis.max = stage.x_max;
    if (present(opts->x_steps)) config.grid.x_axis.steps = stage.x_steps;
    if (present(opts->y_min)) config.grid.y_axis.min = stage.y_min;
    if (present(opts->y_max)) config.grid.y_axis.max = stage.y_max;
    if (present(opts->y_steps)) config.grid.y_axis.steps = stage.y_steps;
    if (present(opts->cell_px)) config.palette.cell_px = stage.cell_px;
    if (present(opts->reverse_palette)) config.palette.reverse = stage.reverse_palette;

    config.grid.params = config.params;
    config.grid.threads = config.threads;

    auto violations = detail::validate_config(config);
    if (!violations.empty()) {
        std::string message = "invalid configuration:";
        for (const auto& v : violations) message += "\n  - " + v;
        throw UsageError(message);
    }
    if (auto warning = regime_warning(config.dist)) {
        out << "warning: " << *warning << "\n";
    }
    return config;
}

namespace detail {

inline void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string());
    os << text;
    if (!os) throw IoError("write failed for " + path.string());
}

inline void write_metadata(const RunConfig& config, const fs::path& path,
                           const json& extra = json::object()) {
    json meta;
    meta["version"] = kVersion;
    meta["config"] = config_to_json(config);
    for (auto it = extra.begin(); it != extra.end(); ++it) meta[it.key()] = it.value();
    write_text_file(path, meta.dump(2) + "\n");
}

inline std::string map_file_tag(const WeightMapSpec& map) {
    switch (map.kind) {
        case WeightMapKind::linear: return "linear";
        case WeightMapKind::power: return "power";
        case WeightMapKind::log_odds: return "logodds";
        case WeightMapKind::unit: return "unit";
    }
    return "map";
}

inline void run_scan_command(const RunConfig& config, std::ostream& out) {
    bool beta = config.command == RunConfig::Command::scan_beta;
    auto result = beta ? scan_beta(config.grid) : scan_cmm3(config.grid);
    std::string prefix = std::string(beta ? "beta" : "cmm") + "_" + map_file_tag(config.params.weight_map);
    int masked = 0;
    for (auto m : result.p_cjt.mask) masked += m;
    for (const auto* grid : {&result.p_cjt, &result.p_escm, &result.gain}) {
        fs::path csv = config.output_dir / (prefix + "_" + to_string(grid->metric) + ".csv");
        emit_csv(*grid, csv);
        fs::path png = config.output_dir / (prefix + "_" + to_string(grid->metric) + ".png");
        render_heatmap(*grid, png, config.palette);
    }
    json extra;
    extra["cells"] = result.p_cjt.cell_count();
    extra["masked_cells"] = masked;
    extra["diagnostics"] = result.diagnostics;
    write_metadata(config, config.output_dir / (prefix + "_meta.json"), extra);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "%s: %zu cells (%d masked), outputs %s_{p_cjt,p_escm,gain}.{csv,png} + meta\n",
                  beta ? "scan-beta" : "scan-cmm", result.p_cjt.cell_count(), masked,
                  prefix.c_str());
    out << buf;
    for (const auto& d : result.diagnostics) out << "  note: " << d << "\n";
}

inline void run_simulate_command(const RunConfig& config, std::ostream& out) {
    TrialConfig tc;
    tc.dist = config.dist;
    tc.params = config.params;
    tc.n = config.n;
    tc.trials = config.trials;
    tc.seed = config.seed;
    tc.pipeline = config.pipeline;
    tc.rule = config.rule;
    tc.num_alternatives = config.num_alternatives;
    tc.clt_mode = config.sim_mode;
    tc.threads = config.threads;
    auto report = simulate(tc);

    std::ostringstream body;
    char buf[160];
    body << "# escm simulate report\nkey,value\n";
    auto kv = [&](const char* key, const std::string& value) {
        body << key << ',' << value << '\n';
    };
    auto kvf = [&](const char* key, double value) {
        std::snprintf(buf, sizeof(buf), "%.12g", value);
        kv(key, buf);
    };
    kv("rule", to_string(config.rule));
    kv("path", config.pipeline ? "pipeline" : "fast");
    kvf("n", config.n);
    kvf("trials", static_cast<double>(report.trials));
    std::snprintf(buf, sizeof(buf), "%llu", static_cast<unsigned long long>(config.seed));
    kv("seed", buf);
    kvf("success_rate", report.success_rate);
    kvf("standard_error", report.standard_error);
    kvf("tie_rate", report.tie_rate);
    kvf("mean_herfindahl", report.mean_herfindahl);
    kvf("mean_gini", report.mean_gini);
    if (report.clt_prediction) {
        kvf("clt_prediction", *report.clt_prediction);
        kvf("clt_gap", std::fabs(report.success_rate - *report.clt_prediction));
        kv("clt_mode", to_string(config.sim_mode));
    } else {
        kv("clt_prediction", "NA");
    }
    kv("seeds_hash", report.seeds_hash);
    write_text_file(config.output_dir / "simulate_report.csv", body.str());
    write_metadata(config, config.output_dir / "simulate_meta.json");

    std::snprintf(buf, sizeof(buf), "simulate %s: n=%d trials=%lld\n", to_string(config.rule),
                  config.n, static_cast<long long>(report.trials));
    out << buf;
    std::snprintf(buf, sizeof(buf), "  success %.5f +/- %.5f   ties %.5f\n", report.success_rate,
                  report.standard_error, report.tie_rate);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  herfindahl %.5f   gini %.5f\n", report.mean_herfindahl,
                  report.mean_gini);
    out << buf;
    if (report.clt_prediction) {
        std::snprintf(buf, sizeof(buf), "  clt prediction %.5f (gap %.5f, %s mode)\n",
                      *report.clt_prediction, std::fabs(report.success_rate - *report.clt_prediction),
                      to_string(config.sim_mode));
        out << buf;
    }
}

inline void run_validate_command(const RunConfig& config, std::ostream& out) {
    auto v = validate_clt(config.dist, config.params, config.n, config.trials, config.seed,
                          config.threads);
    std::ostringstream body;
    char buf[160];
    body << "# escm clt validation report\nkey,value\n";
    auto kvf = [&](const char* key, double value) {
        std::snprintf(buf, sizeof(buf), "%.12g", value);
        body << key << ',' << buf << '\n';
    };
    kvf("n", config.n);
    kvf("trials", static_cast<double>(v.mc.trials));
    kvf("mc_success_rate", v.mc.success_rate);
    kvf("mc_standard_error", v.mc.standard_error);
    kvf("paper_prediction", v.paper_prediction);
    kvf("total_prediction", v.total_prediction);
    kvf("paper_gap", v.paper_gap);
    kvf("total_gap", v.total_gap);
    body << "better_mode," << to_string(v.better_mode) << '\n';
    body << "seeds_hash," << v.mc.seeds_hash << '\n';
    write_text_file(config.output_dir / "validate_report.csv", body.str());
    write_metadata(config, config.output_dir / "validate_meta.json");

    std::snprintf(buf, sizeof(buf), "validate: n=%d trials=%lld mc=%.5f +/- %.5f\n", config.n,
                  static_cast<long long>(v.mc.trials), v.mc.success_rate, v.mc.standard_error);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  paper mode      %.5f (gap %.5f)\n", v.paper_prediction,
                  v.paper_gap);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  total_variance  %.5f (gap %.5f)\n", v.total_prediction,
                  v.total_gap);
    out << buf;
    out << "  better matching mode: " << to_string(v.better_mode) << "\n";
}

inline void run_weights_report_command(const RunConfig& config, std::ostream& out) {
    const auto& params = config.params;
    auto bounds = weight_bounds(params);
    std::ostringstream body;
    char buf[200];
    body << "# escm weights report\n";
    std::snprintf(buf, sizeof(buf), "# map: %s k=%.9g epsilon=%.9g s_min=%.9g l_a=%d q=%d\n",
                  to_string(params.weight_map.kind), params.weight_map.k,
                  params.weight_map.epsilon, params.s_min, params.l_a, params.q);
    body << buf;
    body << "section,a,b,c,d\n";
    std::snprintf(buf, sizeof(buf), "bounds,%.12g,%.12g,,\n", bounds.omega_min, bounds.omega_max);
    body << buf;
    for (int c = 0; c <= params.l_a; ++c) {
        double s = score_from_correct_count(c, params.l_a, params.q, params.s_min);
        double s_bar = normalize_score(s, params.l_a);
        double w = apply_weight_map(s_bar, params.weight_map);
        std::snprintf(buf, sizeof(buf), "score,%d,%.12g,%.12g,%.12g\n", c, s, s_bar, w);
        body << buf;
    }
    for (double k : {1.0, 2.0, 3.0}) {
        auto ratio = steepness_ratio(params.l_a, k);
        std::snprintf(buf, sizeof(buf), "steepness,%.9g,%.12g,%.12g,\n", k, ratio.exact,
                      ratio.approx);
        body << buf;
    }
    for (double eps : {0.01, 0.05, 0.1, 0.2}) {
        MechanismParams swept = params;
        swept.weight_map = WeightMapSpec::log_odds(eps);
        auto b = weight_bounds(swept);
        std::snprintf(buf, sizeof(buf), "epsilon_sweep,%.9g,%.12g,%.12g,\n", eps, b.omega_min,
                      b.omega_max);
        body << buf;
    }
    write_text_file(config.output_dir / "weights_report.csv", body.str());
    write_metadata(config, config.output_dir / "weights_report_meta.json");

    std::snprintf(buf, sizeof(buf), "weights-report: map=%s omega=[%.5f, %.5f]\n",
                  to_string(params.weight_map.kind), bounds.omega_min, bounds.omega_max);
    out << buf;
    out << "  full tables in weights_report.csv\n";
}

inline void run_pipeline_demo_command(const RunConfig& config, std::ostream& out) {
    const auto& params = config.params;
    const int n = config.demo_n;
    char buf[220];
    std::snprintf(buf, sizeof(buf), "== pipeline demo: n=%d seed=%llu map=%s ==\n", n,
                  static_cast<unsigned long long>(config.seed), to_string(params.weight_map.kind));
    out << buf;

    auto rng = make_rng(config.seed);
    ElectionRecord record;
    record.n = n;
    record.num_alternatives = config.num_alternatives;
    record.seed = config.seed;
    record.params = params;
    record.params_hash = params_digest(params, n, config.num_alternatives);
    record.participants.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        record.participants[static_cast<std::size_t>(i)].id = i;
        record.participants[static_cast<std::size_t>(i)].competence = sample_one(config.dist, rng);
    }

    auto items = author_items(record.participants, params, rng);
    record.items_authored = static_cast<int>(items.size());
    std::snprintf(buf, sizeof(buf), "step 1: %d participants authored %zu items (l_w=%d)\n", n,
                  items.size(), params.l_w);
    out << buf;

    peer_review(items, record.participants, params, rng);
    record.items_accepted = static_cast<int>(
        std::count_if(items.begin(), items.end(), [](const Item& it) { return it.accepted; }));
    std::snprintf(buf, sizeof(buf), "step 2: peer review (m=%d) accepted %d/%zu at threshold %.2f\n",
                  params.m, record.items_accepted, items.size(), params.review_threshold);
    out << buf;
    out << "  item author quality d_hat accepted\n";
    for (const auto& item : items) {
        std::snprintf(buf, sizeof(buf), "  %4d %6d %7.3f %5.3f %8s\n", item.id, item.author,
                      item.latent_quality, item.mean_difficulty, item.accepted ? "yes" : "no");
        out << buf;
    }

    assign_items(items, record.participants, params, rng);
    std::snprintf(buf, sizeof(buf), "step 3: difficulty-balanced assignment (l_a=%d)\n", params.l_a);
    out << buf;
    for (const auto& p : record.participants) {
        std::snprintf(buf, sizeof(buf), "  participant %2d <-", p.id);
        out << buf;
        for (int id : p.assigned) out << ' ' << id;
        out << '\n';
    }

    run_assessment(items, record.participants, params, rng);
    cast_votes(record.participants, config.num_alternatives, rng);
    out << "step 4-5: scores and weights; step 6: votes\n";
    out << "  id     p  correct      s  s_bar       w  vote\n";
    for (const auto& p : record.participants) {
        int correct = 0;
        for (bool b : p.correct) correct += b ? 1 : 0;
        std::snprintf(buf, sizeof(buf), "  %2d %5.3f %8d %6.2f %6.3f %7.4f %5d\n", p.id,
                      p.competence, correct, p.score, p.normalized_score, p.weight, p.vote);
        out << buf;
    }

    std::vector<int> votes;
    std::vector<double> weights;
    for (const auto& p : record.participants) {
        votes.push_back(p.vote);
        weights.push_back(p.weight);
    }
    std::vector<double> tally(static_cast<std::size_t>(config.num_alternatives), 0.0);
    for (std::size_t i = 0; i < votes.size(); ++i) {
        tally[static_cast<std::size_t>(votes[i])] += weights[i];
    }
    auto outcome = aggregate_weighted_plurality(votes, weights, config.num_alternatives, rng);
    record.winner = outcome.winner;
    record.tie = outcome.tie;
    auto shares = influence_shares(weights);
    record.herfindahl_index = herfindahl(shares);
    record.gini_index = gini(shares);
    for (int x = 0; x < config.num_alternatives; ++x) {
        std::snprintf(buf, sizeof(buf), "  alternative %d: weighted support %.4f\n", x,
                      tally[static_cast<std::size_t>(x)]);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "winner: %d (tie=%d)  herfindahl=%.4f gini=%.4f\n",
                  record.winner, record.tie ? 1 : 0, record.herfindahl_index, record.gini_index);
    out << buf;

    std::ostringstream file;
    write_election_record(record, file);
    write_text_file(config.output_dir / "pipeline_demo_record.csv", file.str());
    write_metadata(config, config.output_dir / "pipeline_demo_meta.json");
}

}  // namespace detail

// Executes a validated config; artifacts land in config.output_dir, a
// one-screen summary goes to out. Throws on runtime failure.
inline void run(const RunConfig& config, std::ostream& out) {
    fs::create_directories(config.output_dir);
    switch (config.command) {
        case RunConfig::Command::scan_beta:
        case RunConfig::Command::scan_cmm:
            detail::run_scan_command(config, out);
            break;
        case RunConfig::Command::simulate:
            detail::run_simulate_command(config, out);
            break;
        case RunConfig::Command::validate:
            detail::run_validate_command(config, out);
            break;
        case RunConfig::Command::weights_report:
            detail::run_weights_report_command(config, out);
            break;
        case RunConfig::Command::pipeline_demo:
            detail::run_pipeline_demo_command(config, out);
            break;
    }
}

}  // namespace escm
