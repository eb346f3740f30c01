#include "conceptprobe/common/digest.hpp"
#include "conceptprobe/common/error.hpp"
#include "conceptprobe/raven/generator.hpp"
#include "conceptprobe/raven/render.hpp"
#include "doctest.h"
#include "raven_helpers.hpp"

using namespace conceptprobe;
using namespace conceptprobe::raven;
using namespace testutil;

TEST_CASE("sine table") {
    CHECK(sin_q16(0) == 0);
    CHECK(sin_q16(90) == 65536);
    CHECK(sin_q16(270) == -65536);
    CHECK(cos_q16(180) == -65536);
    for (int d = -720; d <= 720; ++d) {
        CHECK(sin_q16(d) == -sin_q16(-d));
        CHECK(cos_q16(d) == sin_q16(90 - d));
    }
}

TEST_CASE("render_panel basics") {
    SUBCASE("no entities gives a white bitmap") {
        const Bitmap b = render_panel(Panel{LayoutKind::Grid3x3, {}}, 64);
        CHECK(b.width == 64);
        CHECK(b.height == 64);
        CHECK(std::all_of(b.pixels.begin(), b.pixels.end(), [](auto v) { return v == 255; }));
    }
    SUBCASE("deterministic") {
        const Panel p = grid(LayoutKind::Grid2x2, {0, 3}, Shape::Pentagon, 4, 6);
        CHECK(render_panel(p, 80) == render_panel(p, 80));
    }
    SUBCASE("square is symmetric under quarter turns") {
        const Panel a = center(Shape::Square, 5, 3, *angle_level(0));
        const Panel b = center(Shape::Square, 5, 3, *angle_level(90));
        CHECK(render_panel(a, 97) == render_panel(b, 97));
        CHECK_FALSE(render_panel(a, 97) == render_panel(center(Shape::Square, 5, 3, *angle_level(45)), 97));
    }
    SUBCASE("fill, outline and background levels") {
        const Bitmap b = render_panel(center(Shape::Circle, 5, 4), 64);
        CHECK(b.at(32, 32) == 255 - 25 * 4);
        CHECK(b.at(0, 0) == 255);
        int black = 0;
        for (auto v : b.pixels) black += v == 0;
        CHECK(black > 0);
    }
    SUBCASE("bigger size levels cover more pixels") {
        int prev = 0;
        for (int level = 0; level < Domain::kSizes; ++level) {
            const Bitmap b = render_panel(center(Shape::Hexagon, level, 9), 96);
            int ink = 0;
            for (auto v : b.pixels) ink += v != 255;
            CHECK(ink > prev);
            prev = ink;
        }
    }
    SUBCASE("size limits") {
        CHECK_THROWS_AS(render_panel(center(Shape::Square, 1, 1), 31), UnsupportedSize);
        CHECK_NOTHROW(render_panel(center(Shape::Square, 1, 1), 32));
    }
}

TEST_CASE("render_problem composes the sheet") {
    const Problem p = sample_problem(parse_descriptor("progression[shape]@center"), 7);
    const int side = 64;
    const Bitmap sheet = render_problem(p, side);
    const SheetGeometry g = sheet_geometry(side);
    CHECK(sheet.width == 7 * side + 2 * SheetGeometry::kMargin + 5 * SheetGeometry::kGap + SheetGeometry::kSeparator);
    CHECK(sheet.height == 3 * side + 2 * SheetGeometry::kGap + 2 * SheetGeometry::kMargin);
    CHECK(sheet.width == g.width);
    for (int i = 0; i < 8; ++i) {
        CHECK(sheet.crop(g.answers[i].x, g.answers[i].y, side, side) == render_panel(p.answers[i], side));
        CHECK(sheet.crop(g.context[i].x, g.context[i].y, side, side) == render_panel(p.matrix.context[i], side));
    }
    const Bitmap missing = sheet.crop(g.context[8].x, g.context[8].y, side, side);
    CHECK(std::any_of(missing.pixels.begin(), missing.pixels.end(), [](auto v) { return v == 0; }));
    CHECK_THROWS_AS(render_problem(p, 8), UnsupportedSize);
}

TEST_CASE("golden sheet hash") {
    const Problem p = sample_problem(parse_descriptor("progression[shape]@center"), 7);
    CHECK(sha256_hex(encode_pgm(render_problem(p, 64))) ==
          "2a432f865a940dd5ae07722e67513bb617d1b2261de8f048f8e332590b894acd");
}

TEST_CASE("image encodings") {
    Bitmap b(3, 2, 7);
    const std::string pgm = encode_pgm(b);
    CHECK(pgm.substr(0, 11) == "P5\n3 2\n255\n");
    CHECK(pgm.size() == 11 + 6);
    const std::string png = encode_png(b);
    CHECK(png.substr(0, 8) == "\x89PNG\r\n\x1a\n");
    CHECK(png.substr(12, 4) == "IHDR");
    CHECK(png.substr(png.size() - 8, 4) == "IEND");
}
