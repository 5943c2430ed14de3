#pragma once

// Raster rendering of heatmap grids to PNG. Sequential palette for
// probability surfaces, symmetric diverging palette for gain, neutral gray
// for masked cells, numeric min/max tick labels drawn with a built-in 5x7
// bitmap font. Only zlib is needed.

#include <zlib.h>

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "escm/errors.hpp"
#include "escm/scan.hpp"

namespace escm {

struct Rgb {
    std::uint8_t r, g, b;
    bool operator==(const Rgb&) const = default;
};

struct PaletteOptions {
    bool reverse = false;
    int cell_px = 6;
};

namespace detail {

inline Rgb lerp(const Rgb& a, const Rgb& b, double t) {
    auto mix = [t](std::uint8_t x, std::uint8_t y) {
        return static_cast<std::uint8_t>(x + (y - x) * t + 0.5);
    };
    return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

template <std::size_t N>
Rgb sample_stops(const Rgb (&stops)[N], double t) {
    if (t <= 0.0) return stops[0];
    if (t >= 1.0) return stops[N - 1];
    double scaled = t * (N - 1);
    std::size_t lo = static_cast<std::size_t>(scaled);
    return lerp(stops[lo], stops[lo + 1], scaled - lo);
}

}  // namespace detail

inline constexpr Rgb kMaskColor{160, 160, 160};

// t in [0,1]; probabilities use a sequential palette, gain a diverging one
// centered at t = 0.5.
inline Rgb palette_color(GridMetric metric, double t, bool reverse = false) {
    if (t < 0.0) t = 0.0;
    if (t > 1.0) t = 1.0;
    if (reverse) t = 1.0 - t;
    static constexpr Rgb kSequential[5] = {
        {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
    static constexpr Rgb kDiverging[3] = {{33, 102, 172}, {247, 247, 247}, {178, 24, 43}};
    if (metric == GridMetric::gain) return detail::sample_stops(kDiverging, t);
    return detail::sample_stops(kSequential, t);
}

namespace detail {

inline void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

inline void png_chunk(std::vector<std::uint8_t>& out, const char type[4],
                      const std::vector<std::uint8_t>& data) {
    put_be32(out, static_cast<std::uint32_t>(data.size()));
    std::size_t type_pos = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    std::uint32_t crc = static_cast<std::uint32_t>(
        ::crc32(0L, out.data() + type_pos, static_cast<uInt>(4 + data.size())));
    put_be32(out, crc);
}

// Minimal RGB8 PNG encoder: one IDAT, filter 0 on every scanline.
inline void write_rgb_png(const std::filesystem::path& path, int width, int height,
                          const std::vector<Rgb>& pixels) {
    std::vector<std::uint8_t> raw;
    raw.reserve(static_cast<std::size_t>(height) * (1 + 3 * static_cast<std::size_t>(width)));
    for (int y = 0; y < height; ++y) {
        raw.push_back(0);
        for (int x = 0; x < width; ++x) {
            const Rgb& px = pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                                   static_cast<std::size_t>(x)];
            raw.push_back(px.r);
            raw.push_back(px.g);
            raw.push_back(px.b);
        }
    }
    uLongf bound = ::compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> compressed(bound);
    if (::compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 9) != Z_OK) {
        throw IoError("write_rgb_png: deflate failed");
    }
    compressed.resize(bound);

    std::vector<std::uint8_t> out = {137, 80, 78, 71, 13, 10, 26, 10};
    std::vector<std::uint8_t> ihdr;
    put_be32(ihdr, static_cast<std::uint32_t>(width));
    put_be32(ihdr, static_cast<std::uint32_t>(height));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(2);  // RGB
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    png_chunk(out, "IHDR", ihdr);
    png_chunk(out, "IDAT", compressed);
    png_chunk(out, "IEND", {});

    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("write_rgb_png: cannot open " + path.string());
    os.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!os) throw IoError("write_rgb_png: write failed for " + path.string());
}

// 5x7 glyphs for numeric labels; bit 4 is the leftmost column.
inline const std::uint8_t* glyph_rows(char c) {
    static const std::uint8_t digits[10][7] = {
        {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}, {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},
        {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}, {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},
        {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}, {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},
        {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}, {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},
        {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}, {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}};
    static const std::uint8_t dot[7] = {0, 0, 0, 0, 0, 0x0C, 0x0C};
    static const std::uint8_t minus[7] = {0, 0, 0, 0x1F, 0, 0, 0};
    static const std::uint8_t expo[7] = {0, 0, 0x0E, 0x11, 0x1F, 0x10, 0x0E};
    static const std::uint8_t plus[7] = {0, 0x04, 0x04, 0x1F, 0x04, 0x04, 0};
    static const std::uint8_t blank[7] = {0, 0, 0, 0, 0, 0, 0};
    if (c >= '0' && c <= '9') return digits[c - '0'];
    switch (c) {
        case '.': return dot;
        case '-': return minus;
        case 'e': return expo;
        case '+': return plus;
        default: return blank;
    }
}

inline void draw_text(std::vector<Rgb>& pixels, int width, int height, int x0, int y0,
                      const std::string& text, Rgb color) {
    int x = x0;
    for (char c : text) {
        const std::uint8_t* rows = glyph_rows(c);
        for (int r = 0; r < 7; ++r) {
            for (int col = 0; col < 5; ++col) {
                if (!(rows[r] & (1 << (4 - col)))) continue;
                int px = x + col;
                int py = y0 + r;
                if (px < 0 || px >= width || py < 0 || py >= height) continue;
                pixels[static_cast<std::size_t>(py) * static_cast<std::size_t>(width) +
                       static_cast<std::size_t>(px)] = color;
            }
        }
        x += 6;
    }
}

inline std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

}  // namespace detail

// Plot area scales with the grid (cell_px pixels per cell), y axis growing
// upward, min/max tick labels on both axes, masked cells in neutral gray.
inline void render_heatmap(const HeatmapGrid& grid, const std::filesystem::path& path,
                           const PaletteOptions& options = {}) {
    if (options.cell_px < 1) throw DomainError("render_heatmap: cell_px must be >= 1");
    const int nx = grid.x_axis.steps;
    const int ny = grid.y_axis.steps;
    const int left = 46, right = 8, top = 8, bottom = 18;
    const int plot_w = nx * options.cell_px;
    const int plot_h = ny * options.cell_px;
    const int width = left + plot_w + right;
    const int height = top + plot_h + bottom;
    std::vector<Rgb> pixels(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
                            Rgb{255, 255, 255});

    // normalization: probabilities on [0,1]; gain symmetric about zero
    double scale = 1.0;
    if (grid.metric == GridMetric::gain) {
        double vmax = 1e-9;
        for (std::size_t i = 0; i < grid.values.size(); ++i) {
            if (!grid.mask[i]) vmax = std::max(vmax, std::fabs(grid.values[i]));
        }
        scale = vmax;
    }
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            Rgb color = kMaskColor;
            if (!grid.masked(ix, iy)) {
                double v = grid.at(ix, iy);
                double t = grid.metric == GridMetric::gain ? 0.5 + v / (2.0 * scale) : v;
                color = palette_color(grid.metric, t, options.reverse);
            }
            int px0 = left + ix * options.cell_px;
            int py0 = top + (ny - 1 - iy) * options.cell_px;  // y grows upward
            for (int dy = 0; dy < options.cell_px; ++dy) {
                for (int dx = 0; dx < options.cell_px; ++dx) {
                    pixels[static_cast<std::size_t>(py0 + dy) * static_cast<std::size_t>(width) +
                           static_cast<std::size_t>(px0 + dx)] = color;
                }
            }
        }
    }
    const Rgb ink{40, 40, 40};
    detail::draw_text(pixels, width, height, 2, top, detail::tick_label(grid.y_axis.max), ink);
    detail::draw_text(pixels, width, height, 2, top + plot_h - 7, detail::tick_label(grid.y_axis.min),
                      ink);
    detail::draw_text(pixels, width, height, left, top + plot_h + 4,
                      detail::tick_label(grid.x_axis.min), ink);
    std::string xmax = detail::tick_label(grid.x_axis.max);
    detail::draw_text(pixels, width, height, left + plot_w - 6 * static_cast<int>(xmax.size()),
                      top + plot_h + 4, xmax, ink);
    detail::write_rgb_png(path, width, height, pixels);
}

}  // namespace escm
