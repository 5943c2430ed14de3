#include <catch2/catch_amalgamated.hpp>

#include <zlib.h>

#include <filesystem>
#include <fstream>

#include "escm/heatmap_image.hpp"
#include "escm/scan.hpp"

using namespace escm;

namespace {

namespace fs = std::filesystem;

fs::path temp_file(const std::string& name) {
    auto dir = fs::temp_directory_path() / "escm_scan_tests";
    fs::create_directories(dir);
    return dir / name;
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is);
    return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(is)),
                                     std::istreambuf_iterator<char>());
}

std::uint32_t be32(const std::vector<std::uint8_t>& bytes, std::size_t pos) {
    return (static_cast<std::uint32_t>(bytes[pos]) << 24) |
           (static_cast<std::uint32_t>(bytes[pos + 1]) << 16) |
           (static_cast<std::uint32_t>(bytes[pos + 2]) << 8) |
           static_cast<std::uint32_t>(bytes[pos + 3]);
}

// Minimal decoder for the PNGs this library writes (single IDAT, filter 0).
struct DecodedPng {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;  // 3 bytes per pixel

    Rgb at(int x, int y) const {
        std::size_t i = 3 * (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                             static_cast<std::size_t>(x));
        return {rgb[i], rgb[i + 1], rgb[i + 2]};
    }
};

DecodedPng decode_png(const fs::path& path) {
    auto bytes = read_bytes(path);
    static const std::uint8_t signature[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    REQUIRE(bytes.size() > 8);
    REQUIRE(std::equal(signature, signature + 8, bytes.begin()));
    DecodedPng png;
    std::vector<std::uint8_t> idat;
    std::size_t pos = 8;
    while (pos + 8 <= bytes.size()) {
        std::uint32_t len = be32(bytes, pos);
        std::string type(bytes.begin() + static_cast<long>(pos) + 4,
                         bytes.begin() + static_cast<long>(pos) + 8);
        std::size_t data = pos + 8;
        if (type == "IHDR") {
            png.width = static_cast<int>(be32(bytes, data));
            png.height = static_cast<int>(be32(bytes, data + 4));
            REQUIRE(bytes[data + 8] == 8);   // bit depth
            REQUIRE(bytes[data + 9] == 2);   // RGB
        } else if (type == "IDAT") {
            idat.insert(idat.end(), bytes.begin() + static_cast<long>(data),
                        bytes.begin() + static_cast<long>(data + len));
        }
        pos = data + len + 4;
    }
    std::size_t stride = 1 + 3 * static_cast<std::size_t>(png.width);
    std::vector<std::uint8_t> raw(stride * static_cast<std::size_t>(png.height));
    uLongf out_len = static_cast<uLongf>(raw.size());
    REQUIRE(::uncompress(raw.data(), &out_len, idat.data(), static_cast<uLong>(idat.size())) == Z_OK);
    REQUIRE(out_len == raw.size());
    png.rgb.reserve(raw.size());
    for (int y = 0; y < png.height; ++y) {
        REQUIRE(raw[static_cast<std::size_t>(y) * stride] == 0);  // filter byte
        for (std::size_t i = 1; i < stride; ++i) {
            png.rgb.push_back(raw[static_cast<std::size_t>(y) * stride + i]);
        }
    }
    return png;
}

GridSpec small_beta_spec() {
    GridSpec spec;
    spec.x_axis = {"mu", 0.3, 0.7, 9};
    spec.y_axis = {"sigma", 0.05, 0.5, 8};
    spec.family = GridFamily::beta_mu_sigma;
    spec.n = 51;
    spec.params.weight_map = WeightMapSpec::log_odds(0.1);
    spec.threads = 1;
    return spec;
}

}  // namespace

TEST_CASE("beta scan shape and shared mask") {
    GridSpec spec = small_beta_spec();
    spec.x_axis.steps = 3;
    spec.y_axis.steps = 3;
    auto result = scan_beta(spec);
    for (const auto* grid : {&result.p_cjt, &result.p_escm, &result.gain}) {
        CHECK(grid->cell_count() == 9);
        CHECK(grid->mask == result.p_cjt.mask);
    }
    CHECK(result.diagnostics.empty());
}

TEST_CASE("beta scan masks the infeasible region and anchors mu=0.5") {
    GridSpec spec = small_beta_spec();
    auto result = scan_beta(spec);
    bool saw_masked = false, saw_unmasked = false;
    for (int iy = 0; iy < spec.y_axis.steps; ++iy) {
        for (int ix = 0; ix < spec.x_axis.steps; ++ix) {
            double mu = spec.x_axis.value(ix);
            double sigma = spec.y_axis.value(iy);
            bool infeasible = sigma * sigma >= mu * (1.0 - mu);
            CHECK(result.p_cjt.masked(ix, iy) == infeasible);
            (infeasible ? saw_masked : saw_unmasked) = true;
            if (!infeasible) {
                CHECK((result.p_escm.at(ix, iy) >= 0.0 && result.p_escm.at(ix, iy) <= 1.0));
                if (mu == 0.5) CHECK(result.p_cjt.at(ix, iy) == 0.5);
            }
        }
    }
    CHECK(saw_masked);
    CHECK(saw_unmasked);
}

TEST_CASE("majority success is exactly constant along sigma") {
    GridSpec spec = small_beta_spec();
    auto result = scan_beta(spec);
    for (int ix = 0; ix < spec.x_axis.steps; ++ix) {
        double reference = 0.0;
        bool have_reference = false;
        for (int iy = 0; iy < spec.y_axis.steps; ++iy) {
            if (result.p_cjt.masked(ix, iy)) continue;
            if (!have_reference) {
                reference = result.p_cjt.at(ix, iy);
                have_reference = true;
            } else {
                CHECK(result.p_cjt.at(ix, iy) == reference);  // bitwise
            }
        }
        CHECK(have_reference);
    }
}

TEST_CASE("gain grid equals p_escm minus p_cjt cellwise") {
    auto result = scan_beta(small_beta_spec());
    for (std::size_t i = 0; i < result.gain.values.size(); ++i) {
        if (result.gain.mask[i]) continue;
        CHECK(result.gain.values[i] ==
              Catch::Approx(result.p_escm.values[i] - result.p_cjt.values[i]).margin(1e-12));
    }
}

TEST_CASE("scans are deterministic and thread-count independent") {
    GridSpec spec = small_beta_spec();
    auto serial = scan_beta(spec);
    spec.threads = 4;
    auto parallel = scan_beta(spec);
    CHECK(serial.p_escm.values == parallel.p_escm.values);
    CHECK(serial.p_cjt.values == parallel.p_cjt.values);
    CHECK(serial.gain.values == parallel.gain.values);
    CHECK(serial.p_cjt.mask == parallel.p_cjt.mask);
}

TEST_CASE("cmm scan validation and symmetric anchor") {
    GridSpec spec = GridSpec::default_cmm();
    spec.x_axis.steps = 5;
    spec.y_axis.steps = 5;
    spec.n = 51;
    spec.threads = 1;
    spec.params.weight_map = WeightMapSpec::linear();

    GridSpec bad = spec;
    bad.x_axis = {"mu1", 0.1, 0.6, 5};  // crosses 0.5
    CHECK_THROWS_AS(scan_cmm3(bad), DomainError);
    GridSpec wrong_family = spec;
    wrong_family.family = GridFamily::beta_mu_sigma;
    CHECK_THROWS_AS(scan_cmm3(wrong_family), DomainError);
    CHECK_THROWS_AS(scan_beta(spec), DomainError);

    GridSpec symmetric = spec;
    symmetric.x_axis = {"mu1", 0.35, 0.45, 3};
    symmetric.y_axis = {"mu3", 0.55, 0.65, 3};
    auto result = scan_cmm3(symmetric);
    // (0.45, 0.55) mirrors about one half: the majority baseline sits at 0.5
    CHECK(result.p_cjt.at(2, 0) == Catch::Approx(0.5).margin(1e-7));
    for (std::size_t i = 0; i < result.p_cjt.mask.size(); ++i) CHECK(result.p_cjt.mask[i] == 0);
}

TEST_CASE("weighted success rises with the informed group under linear weights") {
    GridSpec spec = GridSpec::default_cmm();
    spec.x_axis = {"mu1", 0.1, 0.4, 4};
    spec.y_axis = {"mu3", 0.55, 0.9, 6};
    spec.n = 501;
    spec.threads = 2;
    spec.params.weight_map = WeightMapSpec::linear();
    auto result = scan_cmm3(spec);
    for (int ix = 0; ix < spec.x_axis.steps; ++ix) {
        for (int iy = 0; iy + 1 < spec.y_axis.steps; ++iy) {
            CHECK(result.p_escm.at(ix, iy + 1) >= result.p_escm.at(ix, iy) - 1e-6);
        }
    }
}

TEST_CASE("csv emission contract") {
    GridSpec spec = small_beta_spec();
    spec.x_axis = {"mu", 0.45, 0.55, 2};
    spec.y_axis = {"sigma", 0.3, 0.52, 2};  // top row infeasible at mu=0.45? compute below
    auto result = scan_beta(spec);
    auto path = temp_file("grid.csv");
    emit_csv(result.p_escm, path);
    std::ifstream is(path);
    std::string line;
    int comments = 0, rows = 0, na = 0;
    bool header = false;
    while (std::getline(is, line)) {
        if (line.rfind('#', 0) == 0) {
            ++comments;
        } else if (line == "mu,sigma,value") {
            header = true;
        } else if (!line.empty()) {
            ++rows;
            if (line.find("NA") != std::string::npos) ++na;
        }
    }
    CHECK(header);
    CHECK(comments == 4);
    CHECK(rows == 4);
    int masked = 0;
    for (auto m : result.p_escm.mask) masked += m;
    CHECK(na == masked);
    CHECK(masked > 0);

    // byte-identical reruns
    auto again = temp_file("grid2.csv");
    emit_csv(result.p_escm, again);
    CHECK(read_bytes(path) == read_bytes(again));

    // fully masked grid still yields a valid file
    HeatmapGrid dead = result.p_escm;
    std::fill(dead.mask.begin(), dead.mask.end(), std::uint8_t{1});
    auto dead_path = temp_file("dead.csv");
    emit_csv(dead, dead_path);
    std::ifstream ds(dead_path);
    int dead_na = 0;
    while (std::getline(ds, line)) {
        if (line.rfind('#', 0) != 0 && line.find("NA") != std::string::npos) ++dead_na;
    }
    CHECK(dead_na == 4);
}

TEST_CASE("palette reversal is the mirrored mapping") {
    for (auto metric : {GridMetric::p_escm, GridMetric::gain}) {
        for (int i = 0; i <= 20; ++i) {
            double t = i / 20.0;
            CHECK(palette_color(metric, t, true) == palette_color(metric, 1.0 - t, false));
        }
    }
}

TEST_CASE("png rendering geometry, determinism, and palette") {
    GridSpec spec = small_beta_spec();
    spec.x_axis.steps = 6;
    spec.y_axis.steps = 4;
    auto result = scan_beta(spec);
    auto path = temp_file("grid.png");
    PaletteOptions options;
    options.cell_px = 5;
    render_heatmap(result.p_escm, path, options);
    auto png = decode_png(path);
    CHECK(png.width == 46 + 6 * 5 + 8);
    CHECK(png.height == 8 + 4 * 5 + 18);

    auto again = temp_file("grid_again.png");
    render_heatmap(result.p_escm, again, options);
    CHECK(read_bytes(path) == read_bytes(again));

    auto reversed = temp_file("grid_rev.png");
    PaletteOptions rev = options;
    rev.reverse = true;
    render_heatmap(result.p_escm, reversed, rev);
    CHECK(read_bytes(path) != read_bytes(reversed));

    // a constant-zero gain field renders as uniform mid-palette cells
    HeatmapGrid flat = result.gain;
    std::fill(flat.values.begin(), flat.values.end(), 0.0);
    std::fill(flat.mask.begin(), flat.mask.end(), std::uint8_t{0});
    auto flat_path = temp_file("flat.png");
    render_heatmap(flat, flat_path, options);
    auto flat_png = decode_png(flat_path);
    Rgb mid = palette_color(GridMetric::gain, 0.5);
    for (int ix = 0; ix < 6; ++ix) {
        for (int iy = 0; iy < 4; ++iy) {
            CHECK(flat_png.at(46 + ix * 5 + 2, 8 + iy * 5 + 2) == mid);
        }
    }
    // masked cells use the neutral color
    auto masked_path = temp_file("masked.png");
    render_heatmap(result.p_escm, masked_path, options);
    auto masked_png = decode_png(masked_path);
    bool found_masked = false;
    for (int iy = 0; iy < 4 && !found_masked; ++iy) {
        for (int ix = 0; ix < 6 && !found_masked; ++ix) {
            if (result.p_escm.masked(ix, iy)) {
                CHECK(masked_png.at(46 + ix * 5 + 2, 8 + (4 - 1 - iy) * 5 + 2) == kMaskColor);
                found_masked = true;
            }
        }
    }
    CHECK(found_masked);
}
