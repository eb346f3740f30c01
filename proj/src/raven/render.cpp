#include "conceptprobe/raven/render.hpp"

#include <algorithm>
#include <zlib.h>

#include "conceptprobe/common/error.hpp"

namespace conceptprobe::raven {

namespace {

// round(65536 * sin(d)) for d = 0..90
constexpr int kSineQ16[91] = {
    0,     1144,  2287,  3430,  4572,  5712,  6850,  7987,  9121,  10252, 11380, 12505, 13626,
    14742, 15855, 16962, 18064, 19161, 20252, 21336, 22415, 23486, 24550, 25607, 26656, 27697,
    28729, 29753, 30767, 31772, 32768, 33754, 34729, 35693, 36647, 37590, 38521, 39441, 40348,
    41243, 42126, 42995, 43852, 44695, 45525, 46341, 47143, 47930, 48703, 49461, 50203, 50931,
    51643, 52339, 53020, 53684, 54332, 54963, 55578, 56175, 56756, 57319, 57865, 58393, 58903,
    59396, 59870, 60326, 60764, 61183, 61584, 61966, 62328, 62672, 62997, 63303, 63589, 63856,
    64104, 64332, 64540, 64729, 64898, 65048, 65177, 65287, 65376, 65446, 65496, 65526, 65536,
};

constexpr int kSub = 256;  // sub-pixel units per pixel

// 5x7 glyph for the missing cell
constexpr const char* kQuestionGlyph[7] = {
    ".###.", "#...#", "....#", "...#.", "..#..", ".....", "..#..",
};

struct Cell {
    int x, y, side;  // pixels
};

/// Slot cells of a layout inside a square of `side` pixels.
std::vector<Cell> slot_cells(LayoutKind layout, int side) {
    std::vector<Cell> cells;
    const auto grid = [&](int x0, int y0, int extent, int dim) {
        const int step = extent / dim;
        const int pad = (extent - step * dim) / 2;
        for (int r = 0; r < dim; ++r) {
            for (int c = 0; c < dim; ++c) cells.push_back({x0 + pad + c * step, y0 + pad + r * step, step});
        }
    };
    switch (layout) {
        case LayoutKind::Center: grid(0, 0, side, 1); break;
        case LayoutKind::Grid2x2: grid(0, 0, side, 2); break;
        case LayoutKind::Grid3x3: grid(0, 0, side, 3); break;
        case LayoutKind::OutInCenter: {
            grid(0, 0, side, 1);
            const int inner = side * 2 / 5;
            grid((side - inner) / 2, (side - inner) / 2, inner, 1);
            break;
        }
        case LayoutKind::OutInGrid: {
            grid(0, 0, side, 1);
            const int inner = side / 2;
            grid((side - inner) / 2, (side - inner) / 2, inner, 2);
            break;
        }
    }
    return cells;
}

int base_angle(Shape s) {
    switch (s) {
        case Shape::Triangle: return 90;
        case Shape::Square: return 45;
        case Shape::Pentagon: return 90;
        case Shape::Hexagon: return 0;
        case Shape::Circle: return 0;
    }
    return 0;
}

/// Inside-mask of one entity over its cell, sampled at pixel centers.
std::vector<std::uint8_t> entity_mask(const Entity& e, int cell) {
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(cell) * cell, 0);
    // center and radius in sub-pixel units
    const std::int64_t c = static_cast<std::int64_t>(cell) * kSub / 2;
    const std::int64_t radius = static_cast<std::int64_t>(cell) * kSub * (20 + 14 * e.size) / 200;
    const auto sample = [](int i) { return static_cast<std::int64_t>(i) * kSub + kSub / 2; };

    if (e.shape == Shape::Circle) {
        for (int y = 0; y < cell; ++y) {
            for (int x = 0; x < cell; ++x) {
                const std::int64_t dx = sample(x) - c;
                const std::int64_t dy = sample(y) - c;
                mask[static_cast<std::size_t>(y) * cell + x] = dx * dx + dy * dy <= radius * radius;
            }
        }
        return mask;
    }

    const int n = side_count(e.shape);
    const int rotation = base_angle(e.shape) + angle_degrees(e.angle);
    std::vector<std::int64_t> vx(n), vy(n);
    for (int k = 0; k < n; ++k) {
        const int deg = rotation + 360 * k / n;
        vx[k] = c + radius * cos_q16(deg) / 65536;
        vy[k] = c - radius * sin_q16(deg) / 65536;  // y grows downward
    }
    // convex polygon: inside iff the point is on the same side of every edge
    for (int y = 0; y < cell; ++y) {
        for (int x = 0; x < cell; ++x) {
            const std::int64_t px = sample(x);
            const std::int64_t py = sample(y);
            bool neg = false;
            bool pos = false;
            for (int k = 0; k < n; ++k) {
                const int j = (k + 1) % n;
                const std::int64_t cross = (vx[j] - vx[k]) * (py - vy[k]) - (vy[j] - vy[k]) * (px - vx[k]);
                neg = neg || cross < 0;
                pos = pos || cross > 0;
            }
            const bool inside = !(neg && pos);
            mask[static_cast<std::size_t>(y) * cell + x] = inside;
        }
    }
    return mask;
}

void draw_entity(Bitmap& bmp, const Entity& e, const Cell& cell) {
    const auto mask = entity_mask(e, cell.side);
    const auto in = [&](int x, int y) {
        return x >= 0 && y >= 0 && x < cell.side && y < cell.side && mask[static_cast<std::size_t>(y) * cell.side + x];
    };
    const auto fill = static_cast<std::uint8_t>(255 - 25 * e.color);
    for (int y = 0; y < cell.side; ++y) {
        for (int x = 0; x < cell.side; ++x) {
            if (!in(x, y)) continue;
            const bool edge = !in(x - 1, y) || !in(x + 1, y) || !in(x, y - 1) || !in(x, y + 1);
            const int bx = cell.x + x;
            const int by = cell.y + y;
            if (bx < bmp.width && by < bmp.height) bmp.at(bx, by) = edge ? 0 : fill;
        }
    }
}

void blit(Bitmap& dst, const Bitmap& src, int x0, int y0) {
    for (int y = 0; y < src.height; ++y) {
        std::copy_n(&src.pixels[static_cast<std::size_t>(y) * src.width], src.width, &dst.at(x0, y0 + y));
    }
}

/// 1-px black frame just outside a cell.
void frame(Bitmap& bmp, int x0, int y0, int side) {
    for (int i = -1; i <= side; ++i) {
        bmp.at(x0 + i, y0 - 1) = 0;
        bmp.at(x0 + i, y0 + side) = 0;
        bmp.at(x0 - 1, y0 + i) = 0;
        bmp.at(x0 + side, y0 + i) = 0;
    }
}

void draw_question_mark(Bitmap& bmp, int x0, int y0, int side) {
    const int scale = std::max(1, side / 12);
    const int gx = x0 + (side - 5 * scale) / 2;
    const int gy = y0 + (side - 7 * scale) / 2;
    for (int r = 0; r < 7; ++r) {
        for (int c = 0; c < 5; ++c) {
            if (kQuestionGlyph[r][c] != '#') continue;
            for (int dy = 0; dy < scale; ++dy) {
                for (int dx = 0; dx < scale; ++dx) bmp.at(gx + c * scale + dx, gy + r * scale + dy) = 0;
            }
        }
    }
}

void check_side(int side_px) {
    if (side_px < SheetGeometry::kMinSide || side_px > SheetGeometry::kMaxSide) {
        throw UnsupportedSize("side must be in [" + std::to_string(SheetGeometry::kMinSide) + ", " +
                              std::to_string(SheetGeometry::kMaxSide) + "] pixels, got " +
                              std::to_string(side_px));
    }
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<char>((v >> s) & 0xff));
}

void png_chunk(std::string& out, const char* type, const std::string& data) {
    put_u32(out, static_cast<std::uint32_t>(data.size()));
    const std::string body = std::string(type, 4) + data;
    out += body;
    put_u32(out, static_cast<std::uint32_t>(
                     crc32(0, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size()))));
}

}  // namespace

int sin_q16(int degrees) noexcept {
    int d = ((degrees % 360) + 360) % 360;
    if (d <= 90) return kSineQ16[d];
    if (d <= 180) return kSineQ16[180 - d];
    if (d <= 270) return -kSineQ16[d - 180];
    return -kSineQ16[360 - d];
}

int cos_q16(int degrees) noexcept { return sin_q16(degrees + 90); }

Bitmap Bitmap::crop(int x, int y, int w, int h) const {
    Bitmap out(w, h);
    for (int r = 0; r < h; ++r) {
        std::copy_n(&pixels[static_cast<std::size_t>(y + r) * width + x], w, &out.pixels[static_cast<std::size_t>(r) * w]);
    }
    return out;
}

SheetGeometry sheet_geometry(int side) {
    check_side(side);
    using G = SheetGeometry;
    SheetGeometry g;
    g.side = side;
    g.width = 7 * side + 2 * G::kMargin + 5 * G::kGap + G::kSeparator;
    g.height = 3 * side + 2 * G::kGap + 2 * G::kMargin;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            g.context[r * 3 + c] = {G::kMargin + c * (side + G::kGap), G::kMargin + r * (side + G::kGap)};
        }
    }
    const int ax = G::kMargin + 3 * side + 2 * G::kGap + G::kSeparator;
    const int ay = G::kMargin + (3 * side + 2 * G::kGap - (2 * side + G::kGap)) / 2;
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 4; ++c) g.answers[r * 4 + c] = {ax + c * (side + G::kGap), ay + r * (side + G::kGap)};
    }
    return g;
}

Bitmap render_panel(const Panel& panel, int side_px) {
    check_side(side_px);
    Bitmap bmp(side_px, side_px);
    const auto cells = slot_cells(panel.layout, side_px);
    for (const Entity& e : panel.entities) {
        if (e.slot >= 0 && static_cast<std::size_t>(e.slot) < cells.size()) draw_entity(bmp, e, cells[e.slot]);
    }
    return bmp;
}

Bitmap render_problem(const Problem& problem, int side_px) {
    const SheetGeometry g = sheet_geometry(side_px);
    Bitmap sheet(g.width, g.height);
    for (int i = 0; i < 9; ++i) {
        const auto [x, y] = g.context[i];
        frame(sheet, x, y, side_px);
        if (i < 8) {
            blit(sheet, render_panel(problem.matrix.context[i], side_px), x, y);
        } else {
            draw_question_mark(sheet, x, y, side_px);
        }
    }
    for (int i = 0; i < 8; ++i) {
        const auto [x, y] = g.answers[i];
        frame(sheet, x, y, side_px);
        blit(sheet, render_panel(problem.answers[i], side_px), x, y);
    }
    return sheet;
}

std::string encode_pgm(const Bitmap& bmp) {
    std::string out = "P5\n" + std::to_string(bmp.width) + " " + std::to_string(bmp.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(bmp.pixels.data()), bmp.pixels.size());
    return out;
}

std::string encode_png(const Bitmap& bmp) {
    std::string raw;
    raw.reserve(static_cast<std::size_t>(bmp.width + 1) * bmp.height);
    for (int y = 0; y < bmp.height; ++y) {
        raw.push_back('\0');  // filter: none
        raw.append(reinterpret_cast<const char*>(&bmp.pixels[static_cast<std::size_t>(y) * bmp.width]), bmp.width);
    }
    uLongf len = compressBound(static_cast<uLong>(raw.size()));
    std::string z(len, '\0');
    if (compress2(reinterpret_cast<Bytef*>(z.data()), &len, reinterpret_cast<const Bytef*>(raw.data()),
                  static_cast<uLong>(raw.size()), 9) != Z_OK) {
        throw Error("EncodeFailed", "zlib compression failed");
    }
    z.resize(len);

    std::string out = "\x89PNG\r\n\x1a\n";
    std::string ihdr;
    put_u32(ihdr, static_cast<std::uint32_t>(bmp.width));
    put_u32(ihdr, static_cast<std::uint32_t>(bmp.height));
    ihdr += std::string("\x08\x00\x00\x00\x00", 5);  // 8-bit gray, deflate, no filter set, no interlace
    png_chunk(out, "IHDR", ihdr);
    png_chunk(out, "IDAT", z);
    png_chunk(out, "IEND", "");
    return out;
}

}  // namespace conceptprobe::raven
