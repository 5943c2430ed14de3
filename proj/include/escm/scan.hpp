#pragma once

// Parameter-plane scans producing the three heatmap surfaces (majority
// success, weighted success, gain) over either the Beta (mu, sigma) plane or
// the three-component mixture (mu1, mu3) plane. Cells are independent work
// items; per-cell failures mask the cell and leave a diagnostic instead of
// aborting the scan.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "escm/analytics.hpp"
#include "escm/competence.hpp"
#include "escm/errors.hpp"
#include "escm/parallel.hpp"
#include "escm/weighting.hpp"

namespace escm {

struct AxisSpec {
    std::string name;
    double min = 0.0;
    double max = 1.0;
    int steps = 2;

    double value(int i) const {
        return min + (max - min) * static_cast<double>(i) / static_cast<double>(steps - 1);
    }
};

inline void validate(const AxisSpec& axis) {
    if (axis.steps < 2) throw DomainError("AxisSpec " + axis.name + ": steps must be >= 2");
    if (!(axis.min < axis.max)) throw DomainError("AxisSpec " + axis.name + ": min must be below max");
}

enum class GridFamily { beta_mu_sigma, cmm3_wide };

inline const char* to_string(GridFamily family) {
    return family == GridFamily::beta_mu_sigma ? "beta_mu_sigma" : "cmm3_wide";
}

struct GridSpec {
    AxisSpec x_axis{"mu", 0.30, 0.70, 81};
    AxisSpec y_axis{"sigma", 0.01, 0.40, 80};
    GridFamily family = GridFamily::beta_mu_sigma;
    int n = 501;
    MechanismParams params;
    VarianceMode mode = VarianceMode::paper;
    unsigned threads = 0;

    static GridSpec default_beta() { return {}; }
    static GridSpec default_cmm() {
        GridSpec spec;
        spec.x_axis = {"mu1", 0.05, 0.45, 41};
        spec.y_axis = {"mu3", 0.55, 0.95, 41};
        spec.family = GridFamily::cmm3_wide;
        return spec;
    }
};

inline void validate(const GridSpec& spec) {
    validate(spec.x_axis);
    validate(spec.y_axis);
    validate(spec.params);
    if (spec.n < 1 || spec.n % 2 == 0) throw DomainError("GridSpec: n must be odd and positive");
    if (spec.family == GridFamily::cmm3_wide) {
        if (!(spec.x_axis.min > 0.0 && spec.x_axis.max < 0.5)) {
            throw DomainError("GridSpec: mu1 axis must lie inside (0, 0.5)");
        }
        if (!(spec.y_axis.min > 0.5 && spec.y_axis.max < 1.0)) {
            throw DomainError("GridSpec: mu3 axis must lie inside (0.5, 1)");
        }
    }
}

enum class GridMetric { p_cjt, p_escm, gain };

inline const char* to_string(GridMetric metric) {
    switch (metric) {
        case GridMetric::p_cjt: return "p_cjt";
        case GridMetric::p_escm: return "p_escm";
        case GridMetric::gain: return "gain";
    }
    return "?";
}

// Row-major with the y axis outer: index = iy * x_steps + ix.
struct HeatmapGrid {
    AxisSpec x_axis;
    AxisSpec y_axis;
    GridMetric metric = GridMetric::p_cjt;
    std::vector<double> values;
    std::vector<std::uint8_t> mask;  // 1 = infeasible/undefined

    std::size_t index(int ix, int iy) const {
        return static_cast<std::size_t>(iy) * static_cast<std::size_t>(x_axis.steps) +
               static_cast<std::size_t>(ix);
    }
    double at(int ix, int iy) const { return values[index(ix, iy)]; }
    bool masked(int ix, int iy) const { return mask[index(ix, iy)] != 0; }
    std::size_t cell_count() const { return values.size(); }
};

struct ScanResult {
    HeatmapGrid p_cjt;
    HeatmapGrid p_escm;
    HeatmapGrid gain;
    std::vector<std::string> diagnostics;  // one entry per masked-by-error cell
};

namespace detail {

struct CellValue {
    double p_cjt = 0.0;
    double p_escm = 0.0;
    bool masked = false;
    std::string diagnostic;
};

template <class CellFn>
ScanResult run_scan(const GridSpec& spec, CellFn&& cell_fn) {
    validate(spec);
    const int nx = spec.x_axis.steps;
    const int ny = spec.y_axis.steps;
    const std::size_t cells = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
    std::vector<CellValue> values(cells);
    parallel_for_index(cells, spec.threads, [&](std::size_t idx) {
        int ix = static_cast<int>(idx % static_cast<std::size_t>(nx));
        int iy = static_cast<int>(idx / static_cast<std::size_t>(nx));
        double x = spec.x_axis.value(ix);
        double y = spec.y_axis.value(iy);
        try {
            values[idx] = cell_fn(x, y);
        } catch (const Error& e) {
            values[idx] = {0.0, 0.0, true, std::string(e.what())};
        }
    });
    ScanResult result;
    for (auto* grid : {&result.p_cjt, &result.p_escm, &result.gain}) {
        grid->x_axis = spec.x_axis;
        grid->y_axis = spec.y_axis;
        grid->values.assign(cells, 0.0);
        grid->mask.assign(cells, 0);
    }
    result.p_cjt.metric = GridMetric::p_cjt;
    result.p_escm.metric = GridMetric::p_escm;
    result.gain.metric = GridMetric::gain;
    for (std::size_t idx = 0; idx < cells; ++idx) {
        const auto& cell = values[idx];
        if (cell.masked) {
            result.p_cjt.mask[idx] = result.p_escm.mask[idx] = result.gain.mask[idx] = 1;
            if (!cell.diagnostic.empty()) {
                int ix = static_cast<int>(idx % static_cast<std::size_t>(nx));
                int iy = static_cast<int>(idx / static_cast<std::size_t>(nx));
                char buf[64];
                std::snprintf(buf, sizeof(buf), "cell (%g, %g): ", spec.x_axis.value(ix),
                              spec.y_axis.value(iy));
                result.diagnostics.push_back(buf + cell.diagnostic);
            }
        } else {
            result.p_cjt.values[idx] = cell.p_cjt;
            result.p_escm.values[idx] = cell.p_escm;
            result.gain.values[idx] = cell.p_escm - cell.p_cjt;
        }
    }
    return result;
}

}  // namespace detail

// Beta (mu, sigma) plane; cells with sigma^2 >= mu(1-mu) are masked as
// infeasible. p_cjt is a function of mu alone, so it is exactly constant
// along sigma.
inline ScanResult scan_beta(const GridSpec& spec) {
    if (spec.family != GridFamily::beta_mu_sigma) {
        throw DomainError("scan_beta: spec family must be beta_mu_sigma");
    }
    return detail::run_scan(spec, [&](double mu, double sigma) -> detail::CellValue {
        if (sigma * sigma >= mu * (1.0 - mu)) {
            return {0.0, 0.0, true, ""};  // infeasible, not an error
        }
        CompetenceDistribution dist = beta_from_mu_sigma({mu, sigma});
        auto mom = signal_moments(dist, spec.params, spec.params.weight_map, spec.mode);
        detail::CellValue cell;
        cell.p_cjt = cjt_success(spec.n, mu).value;
        cell.p_escm = success_with_degenerate_guard(spec.n, mom);
        return cell;
    });
}

// Mixture (mu1, mu3) plane; the majority baseline consumes only the mixture
// mean.
inline ScanResult scan_cmm3(const GridSpec& spec) {
    if (spec.family != GridFamily::cmm3_wide) {
        throw DomainError("scan_cmm3: spec family must be cmm3_wide");
    }
    return detail::run_scan(spec, [&](double mu1, double mu3) -> detail::CellValue {
        CompetenceDistribution dist = cmm3_wide(mu1, mu3);
        auto mom = signal_moments(dist, spec.params, spec.params.weight_map, spec.mode);
        detail::CellValue cell;
        cell.p_cjt = cjt_success(spec.n, moments(dist).mean).value;
        cell.p_escm = success_with_degenerate_guard(spec.n, mom);
        return cell;
    });
}

// One row per cell (y outer), masked cells as literal NA, axis metadata in
// comment lines; values carry 9 significant digits. Output is byte-stable.
inline void emit_csv(const HeatmapGrid& grid, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw IoError("emit_csv: cannot open " + path.string());
    char buf[160];
    os << "# escm heatmap\n";
    std::snprintf(buf, sizeof(buf), "# metric: %s\n", to_string(grid.metric));
    os << buf;
    std::snprintf(buf, sizeof(buf), "# x: %s min=%.9g max=%.9g steps=%d\n",
                  grid.x_axis.name.c_str(), grid.x_axis.min, grid.x_axis.max, grid.x_axis.steps);
    os << buf;
    std::snprintf(buf, sizeof(buf), "# y: %s min=%.9g max=%.9g steps=%d\n",
                  grid.y_axis.name.c_str(), grid.y_axis.min, grid.y_axis.max, grid.y_axis.steps);
    os << buf;
    std::snprintf(buf, sizeof(buf), "%s,%s,value\n", grid.x_axis.name.c_str(),
                  grid.y_axis.name.c_str());
    os << buf;
    for (int iy = 0; iy < grid.y_axis.steps; ++iy) {
        for (int ix = 0; ix < grid.x_axis.steps; ++ix) {
            if (grid.masked(ix, iy)) {
                std::snprintf(buf, sizeof(buf), "%.9g,%.9g,NA\n", grid.x_axis.value(ix),
                              grid.y_axis.value(iy));
            } else {
                std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g\n", grid.x_axis.value(ix),
                              grid.y_axis.value(iy), grid.at(ix, iy));
            }
            os << buf;
        }
    }
    if (!os) throw IoError("emit_csv: write failed for " + path.string());
}

}  // namespace escm
