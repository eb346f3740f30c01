#include "conceptprobe/arc/concepts.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "conceptprobe/common/error.hpp"
#include "conceptprobe/common/random.hpp"

namespace conceptprobe::arc {

namespace {

constexpr int kBackground = 0;

struct Stripe {
    int top, bottom, color;
};

std::vector<Stripe> find_stripes(const Grid& g) {
    std::vector<Stripe> out;
    for (int r = 0; r < g.height; ++r) {
        const int color = g.at(r, 0);
        bool full = color != kBackground;
        for (int c = 1; c < g.width && full; ++c) full = g.at(r, c) == color;
        if (!full) continue;
        if (!out.empty() && out.back().bottom == r - 1 && out.back().color == color) {
            out.back().bottom = r;
        } else {
            out.push_back({r, r, color});
        }
    }
    return out;
}

bool full_row(const Grid& g, int r, int color) {
    for (int c = 0; c < g.width; ++c)
        if (g.at(r, c) != color) return false;
    return true;
}

bool full_col(const Grid& g, int c, int color) {
    for (int r = 0; r < g.height; ++r)
        if (g.at(r, c) != color) return false;
    return true;
}

Grid blank_rows(Grid g, int top, int bottom) {
    for (int r = top; r <= bottom; ++r)
        for (int c = 0; c < g.width; ++c) g.set(r, c, kBackground);
    return g;
}

Grid blank_col(Grid g, int col) {
    for (int r = 0; r < g.height; ++r) g.set(r, col, kBackground);
    return g;
}

[[noreturn]] void violated(Family f, const std::string& what) {
    throw SceneContractViolation(std::string(to_string(f)) + ": " + what);
}

// ---------------------------------------------------------------------------
// reference transforms
// ---------------------------------------------------------------------------

Grid top_stripe_color(const Grid& g) {
    const auto stripes = find_stripes(g);
    if (stripes.empty()) violated(Family::TopStripeColor, "no full-width stripe");
    return Grid(1, 1, stripes.front().color);
}

Grid extract_topmost(const Grid& g, int connectivity) {
    const auto objs = components(g, connectivity);
    if (objs.empty()) violated(Family::ExtractTopmostObject, "no objects");
    // components are ordered by first cell, so the first one has the smallest top row
    if (objs.size() > 1 && objs[1].top == objs[0].top) {
        violated(Family::ExtractTopmostObject, "more than one object starts on the topmost row");
    }
    return crop(objs.front());
}

Grid move_below_stripe(const Grid& g, int connectivity) {
    const auto stripes = find_stripes(g);
    if (stripes.size() != 1) violated(Family::MoveObjectBelowStripe, "expected exactly one stripe");
    const Stripe s = stripes.front();
    const auto objs = components(blank_rows(g, s.top, s.bottom), connectivity);
    if (objs.size() != 1) violated(Family::MoveObjectBelowStripe, "expected exactly one object besides the stripe");
    const GridObject& o = objs.front();
    const int target = s.bottom + 1;
    if (o.top == target) violated(Family::MoveObjectBelowStripe, "object already sits below the stripe");
    if (target + o.height() > g.height) violated(Family::MoveObjectBelowStripe, "no room below the stripe");
    Grid out = g;
    for (const Cell& x : o.cells) out.set(x.r, x.c, kBackground);
    for (const Cell& x : o.cells) out.set(x.r - o.top + target, x.c, o.color);
    return out;
}

Grid move_to_red_boundary(const Grid& g, int connectivity) {
    std::vector<int> rows;
    std::vector<int> cols;
    for (int r = 0; r < g.height; ++r)
        if (full_row(g, r, kRed)) rows.push_back(r);
    for (int c = 0; c < g.width; ++c)
        if (full_col(g, c, kRed)) cols.push_back(c);
    if (rows.size() + cols.size() != 1) violated(Family::MoveToColoredBoundary, "expected exactly one red line");
    const bool horizontal = !rows.empty();
    const int line = horizontal ? rows.front() : cols.front();
    const Grid rest = horizontal ? blank_rows(g, line, line) : blank_col(g, line);
    if (std::count(rest.cells.begin(), rest.cells.end(), kRed) > 0) {
        violated(Family::MoveToColoredBoundary, "red cells outside the boundary line");
    }
    const auto objs = components(rest, connectivity);
    if (objs.empty()) violated(Family::MoveToColoredBoundary, "no objects");
    std::vector<Mover> movers;
    for (const auto& o : objs) {
        Direction d;
        if (horizontal) {
            if (o.bottom == line - 1 || o.top == line + 1) violated(Family::MoveToColoredBoundary, "object already touches the line");
            d = o.bottom < line ? Direction::Down : Direction::Up;
        } else {
            if (o.right == line - 1 || o.left == line + 1) violated(Family::MoveToColoredBoundary, "object already touches the line");
            d = o.right < line ? Direction::Right : Direction::Left;
        }
        movers.push_back({o, d});
    }
    return settle(g, std::move(movers));
}

Grid stripe_reaching_boundary(const Grid& g, int connectivity) {
    std::vector<int> cols;
    for (int c = 0; c < g.width; ++c)
        if (full_col(g, c, kBlue)) cols.push_back(c);
    if (cols.size() != 1) violated(Family::StripeReachingBoundary, "expected exactly one blue column");
    const int col = cols.front();
    const Grid rest = blank_col(g, col);
    if (std::count(rest.cells.begin(), rest.cells.end(), kBlue) > 0) {
        violated(Family::StripeReachingBoundary, "blue cells outside the boundary column");
    }
    const GridObject* hit = nullptr;
    const auto objs = components(rest, connectivity);
    for (const auto& o : objs) {
        if (o.height() != 1 || o.width() < 2) violated(Family::StripeReachingBoundary, "object is not a horizontal segment");
        if (o.right == col - 1 || o.left == col + 1) {
            if (hit) violated(Family::StripeReachingBoundary, "more than one segment reaches the boundary");
            hit = &o;
        }
    }
    if (!hit) violated(Family::StripeReachingBoundary, "no segment reaches the boundary");
    return crop(*hit);
}

Grid move_to_closest_side(const Grid& g, int connectivity) {
    if (g.width < 3) violated(Family::MoveToClosestVerticalBoundary, "grid too narrow for two side columns");
    const int b = g.at(0, 0);
    if (b == kBackground || !full_col(g, 0, b) || !full_col(g, g.width - 1, b)) {
        violated(Family::MoveToClosestVerticalBoundary, "first and last columns must be one boundary color");
    }
    const Grid rest = blank_col(blank_col(g, 0), g.width - 1);
    if (std::count(rest.cells.begin(), rest.cells.end(), b) > 0) {
        violated(Family::MoveToClosestVerticalBoundary, "boundary color used inside the scene");
    }
    const auto objs = components(rest, connectivity);
    if (objs.empty()) violated(Family::MoveToClosestVerticalBoundary, "no objects");
    std::vector<Mover> movers;
    for (const auto& o : objs) {
        const int gap_left = o.left - 1;
        const int gap_right = g.width - 2 - o.right;
        if (gap_left == 0 || gap_right == 0) violated(Family::MoveToClosestVerticalBoundary, "object already touches a side");
        movers.push_back({o, gap_left <= gap_right ? Direction::Left : Direction::Right});
    }
    return settle(g, std::move(movers));
}

// ---------------------------------------------------------------------------
// scene sampling
// ---------------------------------------------------------------------------

std::vector<Cell> random_shape(Rng& rng, int extent, int max_cells) {
    const int n = rng.uniform(1, std::min(max_cells, extent * extent));
    std::set<Cell> cells = {{rng.uniform(0, extent - 1), rng.uniform(0, extent - 1)}};
    static constexpr Cell kSteps[4] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
    while (static_cast<int>(cells.size()) < n) {
        auto it = cells.begin();
        std::advance(it, rng.index(cells.size()));
        const Cell d = kSteps[rng.index(4)];
        const Cell next{it->r + d.r, it->c + d.c};
        if (next.r >= 0 && next.c >= 0 && next.r < extent && next.c < extent) cells.insert(next);
    }
    int r0 = extent, c0 = extent;
    for (const Cell& x : cells) {
        r0 = std::min(r0, x.r);
        c0 = std::min(c0, x.c);
    }
    std::vector<Cell> out;
    for (const Cell& x : cells) out.push_back({x.r - r0, x.c - c0});
    return out;
}

/// True when every cell lands inside the grid on background with no
/// non-background 8-neighbor.
bool fits(const Grid& g, const std::vector<Cell>& shape, int dr, int dc) {
    for (const Cell& x : shape) {
        const int r = x.r + dr;
        const int c = x.c + dc;
        if (!g.in_bounds(r, c)) return false;
        for (int y = r - 1; y <= r + 1; ++y)
            for (int z = c - 1; z <= c + 1; ++z)
                if (g.in_bounds(y, z) && g.at(y, z) != kBackground) return false;
    }
    return true;
}

/// Places the shape with its top-left corner drawn from the given row and
/// column ranges (inclusive). Returns the placed object.
std::optional<GridObject> place(Grid& g, Rng& rng, const std::vector<Cell>& shape, int color, int r_lo, int r_hi,
                                int c_lo, int c_hi) {
    if (r_lo > r_hi || c_lo > c_hi) return std::nullopt;
    for (int attempt = 0; attempt < 40; ++attempt) {
        const int dr = rng.uniform(r_lo, r_hi);
        const int dc = rng.uniform(c_lo, c_hi);
        if (!fits(g, shape, dr, dc)) continue;
        std::vector<Cell> cells;
        for (const Cell& x : shape) {
            g.set(x.r + dr, x.c + dc, color);
            cells.push_back({x.r + dr, x.c + dc});
        }
        return make_object(color, std::move(cells));
    }
    return std::nullopt;
}

int shape_height(const std::vector<Cell>& s) {
    int h = 0;
    for (const Cell& x : s) h = std::max(h, x.r + 1);
    return h;
}

int shape_width(const std::vector<Cell>& s) {
    int w = 0;
    for (const Cell& x : s) w = std::max(w, x.c + 1);
    return w;
}

int pick_color(Rng& rng, std::initializer_list<int> excluded) {
    std::vector<int> colors;
    for (int c = 1; c < kColors; ++c)
        if (std::find(excluded.begin(), excluded.end(), c) == excluded.end()) colors.push_back(c);
    return rng.pick(colors);
}

struct Scene {
    const FamilyParams& p;
    Rng& rng;
    int h, w;

    Scene(const FamilyParams& params, Rng& r)
        : p(params), rng(r), h(r.uniform(params.min_height, params.max_height)),
          w(r.uniform(params.min_width, params.max_width)) {}

    int count() { return rng.uniform(p.min_objects, p.max_objects); }
    std::vector<Cell> shape() { return random_shape(rng, p.max_object_extent, p.max_object_cells); }
};

std::optional<Grid> scene_top_stripes(Scene s) {
    Grid g(s.h, s.w);
    const int k = std::max(1, s.count());
    std::vector<int> heights(k);
    int used = k - 1;
    for (int& x : heights) {
        x = s.rng.uniform(1, s.p.max_stripe_height);
        used += x;
    }
    if (used > s.h) return std::nullopt;
    std::vector<int> extra(k + 1, 0);
    for (int i = 0; i < s.h - used; ++i) ++extra[s.rng.index(extra.size())];
    std::vector<int> colors;
    for (int c = 1; c < kColors; ++c) colors.push_back(c);
    s.rng.shuffle(colors);
    int row = extra[0];
    for (int i = 0; i < k; ++i) {
        for (int r = row; r < row + heights[i]; ++r)
            for (int c = 0; c < s.w; ++c) g.set(r, c, colors[i]);
        row += heights[i] + 1 + extra[i + 1];
    }
    const int blobs = s.rng.uniform(0, s.p.noise);
    for (int i = 0; i < blobs; ++i) {
        auto shape = s.shape();
        if (shape_width(shape) >= s.w) continue;
        place(g, s.rng, shape, s.rng.uniform(1, kColors - 1), 0, s.h - shape_height(shape), 0, s.w - shape_width(shape));
    }
    return g;
}

std::optional<Grid> scene_objects(Scene s) {
    Grid g(s.h, s.w);
    const int k = s.count();
    for (int i = 0; i < k; ++i) {
        const auto shape = s.shape();
        if (!place(g, s.rng, shape, s.rng.uniform(1, kColors - 1), 0, s.h - shape_height(shape), 0,
                   s.w - shape_width(shape))) {
            return std::nullopt;
        }
    }
    return g;
}

std::optional<Grid> scene_below_stripe(Scene s) {
    Grid g(s.h, s.w);
    const auto shape = s.shape();
    const int oh = shape_height(shape);
    const int sh = s.rng.uniform(1, s.p.max_stripe_height);
    // stripe rows [top, top+sh) leave room for the object below it
    const int top = s.rng.uniform(0, s.h - sh - oh);
    if (top < 0) return std::nullopt;
    const int stripe_color = pick_color(s.rng, {});
    for (int r = top; r < top + sh; ++r)
        for (int c = 0; c < s.w; ++c) g.set(r, c, stripe_color);
    if (!place(g, s.rng, shape, pick_color(s.rng, {stripe_color}), 0, s.h - oh, 0, s.w - shape_width(shape))) {
        return std::nullopt;
    }
    return g;
}

std::optional<Grid> scene_red_boundary(Scene s) {
    Grid g(s.h, s.w);
    const bool horizontal = s.rng.coin();
    const int dim = horizontal ? s.h : s.w;
    if (dim < 5) return std::nullopt;
    const int line = s.rng.uniform(2, dim - 3);
    for (int i = 0; i < (horizontal ? s.w : s.h); ++i) {
        if (horizontal) {
            g.set(line, i, kRed);
        } else {
            g.set(i, line, kRed);
        }
    }
    const int k = s.count();
    for (int i = 0; i < k; ++i) {
        const auto shape = s.shape();
        if (!place(g, s.rng, shape, pick_color(s.rng, {kRed}), 0, s.h - shape_height(shape), 0,
                   s.w - shape_width(shape))) {
            return std::nullopt;
        }
    }
    return g;
}

std::optional<Grid> scene_reaching_segment(Scene s) {
    Grid g(s.h, s.w);
    if (s.w < 5) return std::nullopt;
    const int col = s.rng.uniform(2, s.w - 3);
    for (int r = 0; r < s.h; ++r) g.set(r, col, kBlue);
    const auto span_of = [&](bool left) { return left ? col : s.w - 1 - col; };

    // the one segment that touches the column
    const bool left = s.rng.coin();
    const int len = s.rng.uniform(2, span_of(left));
    const int row = s.rng.uniform(0, s.h - 1);
    const int color = pick_color(s.rng, {kBlue});
    for (int i = 0; i < len; ++i) g.set(row, left ? col - 1 - i : col + 1 + i, color);

    const int others = s.count() - 1;
    for (int i = 0; i < others; ++i) {
        bool l = s.rng.coin();
        if (span_of(l) < 3) l = !l;
        if (span_of(l) < 3) return std::nullopt;
        const int n = s.rng.uniform(2, span_of(l) - 1);
        std::vector<Cell> seg;
        for (int c = 0; c < n; ++c) seg.push_back({0, c});
        const int c_lo = l ? 0 : col + 2;
        const int c_hi = l ? col - 1 - n : s.w - n;
        if (!place(g, s.rng, seg, pick_color(s.rng, {kBlue}), 0, s.h - 1, c_lo, c_hi)) return std::nullopt;
    }
    return g;
}

std::optional<Grid> scene_two_sides(Scene s) {
    Grid g(s.h, s.w);
    const int b = pick_color(s.rng, {});
    for (int r = 0; r < s.h; ++r) {
        g.set(r, 0, b);
        g.set(r, s.w - 1, b);
    }
    std::vector<std::pair<int, int>> bands;
    const int k = s.count();
    for (int i = 0; i < k; ++i) {
        const auto shape = s.shape();
        Grid trial = g;
        const auto o = place(trial, s.rng, shape, pick_color(s.rng, {b}), 0, s.h - shape_height(shape), 1,
                             s.w - 1 - shape_width(shape));
        if (!o) return std::nullopt;
        for (const auto& [t, bt] : bands)
            if (o->top <= bt && t <= o->bottom) return std::nullopt;
        if (o->left - 1 == s.w - 2 - o->right) return std::nullopt;  // keep scenes tie-free
        bands.push_back({o->top, o->bottom});
        g = std::move(trial);
    }
    return g;
}

std::optional<Grid> sample_scene(Family f, const FamilyParams& p, Rng& rng) {
    switch (f) {
        case Family::TopStripeColor: return scene_top_stripes(Scene(p, rng));
        case Family::ExtractTopmostObject: return scene_objects(Scene(p, rng));
        case Family::MoveObjectBelowStripe: return scene_below_stripe(Scene(p, rng));
        case Family::MoveToColoredBoundary: return scene_red_boundary(Scene(p, rng));
        case Family::StripeReachingBoundary: return scene_reaching_segment(Scene(p, rng));
        case Family::MoveToClosestVerticalBoundary: return scene_two_sides(Scene(p, rng));
    }
    return std::nullopt;
}

std::set<int> color_set(const Grid& g) {
    std::set<int> out;
    for (auto v : g.cells)
        if (v != kBackground) out.insert(v);
    return out;
}

std::set<Cell> position_set(const Grid& g) {
    std::set<Cell> out;
    for (int r = 0; r < g.height; ++r)
        for (int c = 0; c < g.width; ++c)
            if (g.at(r, c) != kBackground) out.insert({r, c});
    return out;
}

}  // namespace

std::string_view to_string(Family f) noexcept {
    switch (f) {
        case Family::TopStripeColor: return "top_stripe_color";
        case Family::ExtractTopmostObject: return "extract_topmost_object";
        case Family::MoveObjectBelowStripe: return "move_below_stripe";
        case Family::MoveToColoredBoundary: return "move_to_red_boundary";
        case Family::StripeReachingBoundary: return "stripe_reaching_boundary";
        case Family::MoveToClosestVerticalBoundary: return "move_to_closest_side";
    }
    return "?";
}

std::optional<Family> parse_family(std::string_view s) noexcept {
    for (Family f : kAllFamilies)
        if (to_string(f) == s) return f;
    return std::nullopt;
}

std::string_view family_group(Family f) noexcept {
    switch (f) {
        case Family::TopStripeColor:
        case Family::ExtractTopmostObject:
        case Family::MoveObjectBelowStripe: return "top_bottom";
        default: return "boundary";
    }
}

bool is_extraction(Family f) noexcept {
    return f == Family::TopStripeColor || f == Family::ExtractTopmostObject || f == Family::StripeReachingBoundary;
}

void validate_params(Family family, const FamilyParams& p) {
    const auto fail = [&](const std::string& what) {
        throw InvalidSpec(std::string(to_string(family)) + " params: " + what);
    };
    if (p.min_height < 3 || p.min_width < 3 || p.max_height > kMaxDim || p.max_width > kMaxDim) {
        fail("grid size outside 3..30");
    }
    if (p.min_height > p.max_height || p.min_width > p.max_width) fail("empty grid size range");
    if (p.demonstrations < 2 || p.demonstrations > 5) fail("demonstrations must be 2..5");
    if (p.tests < 1) fail("need at least one test pair");
    if (p.min_objects < 1 || p.min_objects > p.max_objects) fail("bad object count range");
    if (p.max_object_extent < 1 || p.max_object_cells < 1) fail("objects need at least one cell");
    if (p.max_stripe_height < 1) fail("stripes need at least one row");
    if (p.noise < 0) fail("noise must be non-negative");
    if (p.connectivity != 4 && p.connectivity != 8) fail("connectivity must be 4 or 8");
}

Grid reference_transform(Family family, const Grid& input, int connectivity) {
    validate_grid(input);
    switch (family) {
        case Family::TopStripeColor: return top_stripe_color(input);
        case Family::ExtractTopmostObject: return extract_topmost(input, connectivity);
        case Family::MoveObjectBelowStripe: return move_below_stripe(input, connectivity);
        case Family::MoveToColoredBoundary: return move_to_red_boundary(input, connectivity);
        case Family::StripeReachingBoundary: return stripe_reaching_boundary(input, connectivity);
        case Family::MoveToClosestVerticalBoundary: return move_to_closest_side(input, connectivity);
    }
    violated(family, "unknown family");
}

Task generate_task(Family family, const FamilyParams& params, std::uint64_t seed, std::string id) {
    validate_params(family, params);
    Rng rng(seed);
    Task task;
    if (id.empty()) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s-%016llx", std::string(to_string(family)).c_str(),
                      static_cast<unsigned long long>(seed));
        id = buf;
    }
    task.id = std::move(id);
    task.concept_tag = std::string(family_group(family)) + "/" + std::string(to_string(family));

    std::vector<Pair> pairs;
    const int total = params.demonstrations + params.tests;
    constexpr int kBudget = 1000;
    for (int i = 0; i < total; ++i) {
        bool done = false;
        for (int attempt = 0; attempt < kBudget && !done; ++attempt) {
            auto scene = sample_scene(family, params, rng);
            if (!scene) continue;
            Grid out;
            try {
                out = reference_transform(family, *scene, params.connectivity);
            } catch (const SceneContractViolation&) {
                continue;
            }
            if (out == *scene) continue;
            const auto colors = color_set(*scene);
            const auto cells = position_set(*scene);
            bool diverse = true;
            for (const auto& prev : pairs) {
                if (color_set(prev.input) == colors || position_set(prev.input) == cells) diverse = false;
            }
            if (!diverse) continue;
            pairs.push_back({std::move(*scene), std::move(out)});
            done = true;
        }
        if (!done) {
            throw GenerationExhausted(std::string(to_string(family)) + ": no valid scene for pair " +
                                      std::to_string(i) + " after " + std::to_string(kBudget) + " attempts");
        }
    }
    task.train.assign(pairs.begin(), pairs.begin() + params.demonstrations);
    task.test.assign(pairs.begin() + params.demonstrations, pairs.end());
    return task;
}

bool validate_task(const Task& task, Family family, int connectivity) {
    if (task.train.empty()) return false;
    for (const auto* list : {&task.train, &task.test}) {
        for (const auto& pair : *list) {
            try {
                if (!(reference_transform(family, pair.input, connectivity) == pair.output)) return false;
            } catch (const Error&) {
                return false;
            }
        }
    }
    return true;
}

std::vector<Variation> default_top_bottom_suite() {
    const auto with = [](Family f, auto tweak) {
        FamilyParams p;
        tweak(p);
        return Variation{f, p};
    };
    return {
        with(Family::TopStripeColor, [](FamilyParams&) {}),
        with(Family::TopStripeColor, [](FamilyParams& p) { p.min_objects = 3, p.max_objects = 4, p.min_height = 12, p.max_height = 16; }),
        with(Family::TopStripeColor, [](FamilyParams& p) { p.noise = 2; }),
        with(Family::TopStripeColor, [](FamilyParams& p) { p.demonstrations = 2, p.min_height = p.min_width = 6, p.max_height = p.max_width = 8; }),
        with(Family::TopStripeColor, [](FamilyParams& p) { p.demonstrations = 4, p.min_width = 10, p.max_width = 16, p.max_stripe_height = 3; }),
        with(Family::ExtractTopmostObject, [](FamilyParams&) {}),
        with(Family::ExtractTopmostObject, [](FamilyParams& p) { p.min_objects = 4, p.max_objects = 5, p.min_height = p.min_width = 10, p.max_height = p.max_width = 14; }),
        with(Family::ExtractTopmostObject, [](FamilyParams& p) { p.max_object_extent = 2, p.max_object_cells = 3; }),
        with(Family::ExtractTopmostObject, [](FamilyParams& p) { p.max_object_extent = 4, p.max_object_cells = 8, p.min_height = p.min_width = 12, p.max_height = p.max_width = 16; }),
        with(Family::ExtractTopmostObject, [](FamilyParams& p) { p.demonstrations = 5; }),
        with(Family::MoveObjectBelowStripe, [](FamilyParams&) {}),
        with(Family::MoveObjectBelowStripe, [](FamilyParams& p) { p.min_height = 12, p.max_height = 16; }),
        with(Family::MoveObjectBelowStripe, [](FamilyParams& p) { p.max_object_extent = 4, p.max_object_cells = 7, p.min_height = 10, p.max_height = 14; }),
        with(Family::MoveObjectBelowStripe, [](FamilyParams& p) { p.demonstrations = 2; }),
    };
}

std::vector<Variation> default_boundary_suite() {
    const auto with = [](Family f, auto tweak) {
        FamilyParams p;
        tweak(p);
        return Variation{f, p};
    };
    return {
        with(Family::MoveToColoredBoundary, [](FamilyParams&) {}),
        with(Family::MoveToColoredBoundary, [](FamilyParams& p) { p.min_objects = p.max_objects = 1; }),
        with(Family::MoveToColoredBoundary, [](FamilyParams& p) { p.min_objects = 3, p.max_objects = 4, p.min_height = p.min_width = 12, p.max_height = p.max_width = 16; }),
        with(Family::MoveToColoredBoundary, [](FamilyParams& p) { p.demonstrations = 4; }),
        with(Family::StripeReachingBoundary, [](FamilyParams&) {}),
        with(Family::StripeReachingBoundary, [](FamilyParams& p) { p.min_objects = 3, p.max_objects = 5, p.min_height = p.min_width = 12, p.max_height = p.max_width = 16; }),
        with(Family::StripeReachingBoundary, [](FamilyParams& p) { p.demonstrations = 2; }),
        with(Family::StripeReachingBoundary, [](FamilyParams& p) { p.min_width = 12, p.max_width = 18; }),
        with(Family::MoveToClosestVerticalBoundary, [](FamilyParams&) {}),
        with(Family::MoveToClosestVerticalBoundary, [](FamilyParams& p) { p.min_objects = p.max_objects = 1; }),
        with(Family::MoveToClosestVerticalBoundary, [](FamilyParams& p) { p.min_objects = 3, p.max_objects = 4, p.min_height = 14, p.max_height = 18; }),
        with(Family::MoveToClosestVerticalBoundary, [](FamilyParams& p) { p.demonstrations = 4; }),
    };
}

std::vector<Task> generate_suite(std::span<const Variation> variations, std::uint64_t seed, std::string_view prefix) {
    std::vector<Task> out;
    std::map<Family, int> counters;
    for (std::size_t i = 0; i < variations.size(); ++i) {
        const Variation& v = variations[i];
        char buf[16];
        std::snprintf(buf, sizeof buf, "%02d", counters[v.family]++);
        out.push_back(generate_task(v.family, v.params, derive_seed(seed, i),
                                    std::string(prefix) + "-" + std::string(to_string(v.family)) + "-" + buf));
    }
    return out;
}

}  // namespace conceptprobe::arc
