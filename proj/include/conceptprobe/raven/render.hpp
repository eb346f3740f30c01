#pragma once

// Integer-only rasterizer for panels and problem sheets.
//
// Conventions: white background; each entity is a regular polygon (or a
// circle) centered in its slot cell with diameter (0.2 + 0.14 * size) of the
// cell, filled with gray 255 - 25 * color and outlined by a 1-px black ring.
// Angle rotates the polygon counter-clockwise; at angle 0 a triangle points
// up and a square has axis-aligned edges.
//
// Sheet: margin M around everything, gap G between cells, separator S
// between the 3x3 context and the 2x4 candidate block:
//   width  = 7 * side + 2 * M + 5 * G + S
//   height = 3 * side + 2 * G + 2 * M
// The candidate block is vertically centered. The missing cell shows "?".

#include <cstdint>
#include <string>
#include <vector>

#include "conceptprobe/raven/types.hpp"

namespace conceptprobe::raven {

struct Bitmap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // row-major

    Bitmap() = default;
    Bitmap(int w, int h, std::uint8_t fill = 255)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }

    Bitmap crop(int x, int y, int w, int h) const;

    friend bool operator==(const Bitmap&, const Bitmap&) = default;
};

struct SheetGeometry {
    static constexpr int kMargin = 8;
    static constexpr int kGap = 4;
    static constexpr int kSeparator = 16;
    static constexpr int kMinSide = 32;
    static constexpr int kMaxSide = 1024;

    int side = 0;
    int width = 0;
    int height = 0;
    struct Cell {
        int x, y;
    };
    std::array<Cell, 9> context{};  // row-major; [8] is the missing cell
    std::array<Cell, 8> answers{};  // row-major in the 2x4 block
};

/// Throws UnsupportedSize outside [kMinSide, kMaxSide].
SheetGeometry sheet_geometry(int side_px);

/// Sine of an integer number of degrees in Q16.
int sin_q16(int degrees) noexcept;
int cos_q16(int degrees) noexcept;

Bitmap render_panel(const Panel& panel, int side_px);
Bitmap render_problem(const Problem& problem, int side_px);

/// Binary PGM (P5, maxval 255).
std::string encode_pgm(const Bitmap& bitmap);
/// 8-bit grayscale PNG.
std::string encode_png(const Bitmap& bitmap);

}  // namespace conceptprobe::raven
