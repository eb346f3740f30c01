#include "conceptprobe/arc/grid.hpp"

#include <algorithm>
#include <numeric>

#include "conceptprobe/common/error.hpp"

namespace conceptprobe::arc {

using nlohmann::json;

Grid::Grid(int h, int w, int fill)
    : height(h), width(w), cells(static_cast<std::size_t>(std::max(h, 0)) * std::max(w, 0), static_cast<std::uint8_t>(fill)) {}

void validate_grid(const Grid& g) {
    if (g.height < 1 || g.width < 1 || g.height > kMaxDim || g.width > kMaxDim) {
        throw ValueOutOfRange("grid dimensions " + std::to_string(g.height) + "x" + std::to_string(g.width) +
                              " outside 1.." + std::to_string(kMaxDim));
    }
    if (g.cells.size() != static_cast<std::size_t>(g.height) * g.width) {
        throw ValueOutOfRange("grid cell count does not match its dimensions");
    }
    for (auto v : g.cells) {
        if (v >= kColors) throw ValueOutOfRange("color " + std::to_string(v) + " outside 0..9");
    }
}

Grid make_grid(const std::vector<std::vector<int>>& rows) {
    if (rows.empty() || rows.size() > kMaxDim) throw ValueOutOfRange("grid must have 1..30 rows");
    const auto w = rows.front().size();
    if (w == 0 || w > kMaxDim) throw ValueOutOfRange("grid must have 1..30 columns");
    Grid g(static_cast<int>(rows.size()), static_cast<int>(w));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != w) throw ValueOutOfRange("ragged grid: row " + std::to_string(r));
        for (std::size_t c = 0; c < w; ++c) {
            const int v = rows[r][c];
            if (v < 0 || v >= kColors) throw ValueOutOfRange("color " + std::to_string(v) + " outside 0..9");
            g.set(static_cast<int>(r), static_cast<int>(c), v);
        }
    }
    return g;
}

std::vector<std::vector<int>> to_rows(const Grid& g) {
    std::vector<std::vector<int>> rows(g.height, std::vector<int>(g.width));
    for (int r = 0; r < g.height; ++r)
        for (int c = 0; c < g.width; ++c) rows[r][c] = g.at(r, c);
    return rows;
}

namespace {

Grid grid_from_json(const json& j, const std::string& path) {
    if (!j.is_array()) throw SchemaViolation(path, "expected an array of rows");
    std::vector<std::vector<int>> rows;
    for (std::size_t r = 0; r < j.size(); ++r) {
        const json& row = j[r];
        if (!row.is_array()) throw SchemaViolation(path + "/" + std::to_string(r), "expected an array of colors");
        std::vector<int> out;
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (!row[c].is_number_integer()) {
                throw SchemaViolation(path + "/" + std::to_string(r) + "/" + std::to_string(c), "expected an integer");
            }
            out.push_back(row[c].get<int>());
        }
        rows.push_back(std::move(out));
    }
    return make_grid(rows);
}

std::vector<Pair> pairs_from_json(const json& j, const char* name, bool need_output) {
    const std::string path = std::string("/") + name;
    const auto it = j.find(name);
    if (it == j.end()) throw SchemaViolation(path, "missing field");
    if (!it->is_array()) throw SchemaViolation(path, "expected an array");
    std::vector<Pair> out;
    for (std::size_t i = 0; i < it->size(); ++i) {
        const std::string p = path + "/" + std::to_string(i);
        const json& pj = (*it)[i];
        if (!pj.is_object() || !pj.contains("input")) throw SchemaViolation(p + "/input", "missing field");
        Pair pair;
        pair.input = grid_from_json(pj["input"], p + "/input");
        if (pj.contains("output")) {
            pair.output = grid_from_json(pj["output"], p + "/output");
        } else if (need_output) {
            throw SchemaViolation(p + "/output", "missing field");
        }
        out.push_back(std::move(pair));
    }
    return out;
}

}  // namespace

json task_to_json(const Task& task, bool with_tag) {
    const auto pairs = [](const std::vector<Pair>& ps) {
        json arr = json::array();
        for (const auto& p : ps) {
            json o = {{"input", to_rows(p.input)}};
            if (p.output.height > 0) o["output"] = to_rows(p.output);
            arr.push_back(std::move(o));
        }
        return arr;
    };
    json j = {{"train", pairs(task.train)}, {"test", pairs(task.test)}};
    if (with_tag && task.concept_tag) j["concept_tag"] = *task.concept_tag;
    return j;
}

Task task_from_json(const json& j, std::string id) {
    if (!j.is_object()) throw SchemaViolation("/", "expected an object");
    Task t;
    t.id = std::move(id);
    t.train = pairs_from_json(j, "train", true);
    if (t.train.empty()) throw SchemaViolation("/train", "needs at least one pair");
    t.test = pairs_from_json(j, "test", false);
    if (const auto it = j.find("concept_tag"); it != j.end()) {
        if (!it->is_string()) throw SchemaViolation("/concept_tag", "expected a string");
        t.concept_tag = it->get<std::string>();
    }
    return t;
}

std::string write_task(const Task& task, bool with_tag) { return task_to_json(task, with_tag).dump(); }

Task parse_task(std::string_view text, std::string id) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaViolation("/", std::string("malformed JSON: ") + e.what());
    }
    return task_from_json(j, std::move(id));
}

bool pair_solved(const Grid& target, std::span<const Grid> guesses) {
    if (guesses.size() > kMaxGuesses) {
        throw TooManyGuesses(std::to_string(guesses.size()) + " guesses, at most 3 allowed");
    }
    return std::any_of(guesses.begin(), guesses.end(), [&](const Grid& g) { return g == target; });
}

double score(const Task& task, std::span<const std::vector<Grid>> predictions) {
    if (task.test.empty()) return 0.0;
    for (const auto& guesses : predictions) {
        if (guesses.size() > kMaxGuesses) {
            throw TooManyGuesses(std::to_string(guesses.size()) + " guesses, at most 3 allowed");
        }
    }
    int solved = 0;
    for (std::size_t i = 0; i < task.test.size() && i < predictions.size(); ++i) {
        solved += pair_solved(task.test[i].output, predictions[i]);
    }
    return static_cast<double>(solved) / static_cast<double>(task.test.size());
}

GridObject make_object(int color, std::vector<Cell> cells) {
    std::sort(cells.begin(), cells.end());
    GridObject o{color, std::move(cells), 0, 0, 0, 0};
    if (o.cells.empty()) return o;
    o.top = o.cells.front().r;
    o.bottom = o.cells.back().r;
    o.left = o.right = o.cells.front().c;
    for (const Cell& x : o.cells) {
        o.left = std::min(o.left, x.c);
        o.right = std::max(o.right, x.c);
    }
    return o;
}

std::vector<GridObject> components(const Grid& g, int connectivity, int background) {
    std::vector<GridObject> out;
    std::vector<bool> seen(g.cells.size(), false);
    std::vector<Cell> stack;
    for (int r = 0; r < g.height; ++r) {
        for (int c = 0; c < g.width; ++c) {
            const auto idx = static_cast<std::size_t>(r) * g.width + c;
            if (seen[idx] || g.at(r, c) == background) continue;
            const int color = g.at(r, c);
            std::vector<Cell> cells;
            stack.push_back({r, c});
            seen[idx] = true;
            while (!stack.empty()) {
                const Cell cur = stack.back();
                stack.pop_back();
                cells.push_back(cur);
                for (int dr = -1; dr <= 1; ++dr) {
                    for (int dc = -1; dc <= 1; ++dc) {
                        if ((dr == 0 && dc == 0) || (connectivity == 4 && dr != 0 && dc != 0)) continue;
                        const int nr = cur.r + dr;
                        const int nc = cur.c + dc;
                        if (!g.in_bounds(nr, nc) || g.at(nr, nc) != color) continue;
                        const auto n = static_cast<std::size_t>(nr) * g.width + nc;
                        if (seen[n]) continue;
                        seen[n] = true;
                        stack.push_back({nr, nc});
                    }
                }
            }
            out.push_back(make_object(color, std::move(cells)));
        }
    }
    return out;
}

Grid crop(const GridObject& o, int background) {
    Grid g(o.height(), o.width(), background);
    for (const Cell& x : o.cells) g.set(x.r - o.top, x.c - o.left, o.color);
    return g;
}

std::string_view to_string(Direction d) noexcept {
    switch (d) {
        case Direction::Up: return "up";
        case Direction::Down: return "down";
        case Direction::Left: return "left";
        case Direction::Right: return "right";
    }
    return "?";
}

namespace {

Cell step_of(Direction d) {
    switch (d) {
        case Direction::Up: return {-1, 0};
        case Direction::Down: return {1, 0};
        case Direction::Left: return {0, -1};
        case Direction::Right: return {0, 1};
    }
    return {0, 0};
}

/// Free cells between the object's leading edge and the grid edge.
int edge_gap(const Grid& g, const GridObject& o, Direction d) {
    switch (d) {
        case Direction::Up: return o.top;
        case Direction::Down: return g.height - 1 - o.bottom;
        case Direction::Left: return o.left;
        case Direction::Right: return g.width - 1 - o.right;
    }
    return 0;
}

}  // namespace

Translation translate_until_contact(const Grid& grid, const GridObject& object, Direction direction, int background,
                                    const std::vector<bool>* obstacles) {
    std::vector<bool> own(grid.cells.size(), false);
    for (const Cell& x : object.cells) {
        if (!grid.in_bounds(x.r, x.c) || grid.at(x.r, x.c) != object.color) {
            throw SceneContractViolation("object is not present in the grid");
        }
        own[static_cast<std::size_t>(x.r) * grid.width + x.c] = true;
    }
    const auto blocked_at = [&](int r, int c) {
        if (!grid.in_bounds(r, c)) return true;
        const auto i = static_cast<std::size_t>(r) * grid.width + c;
        if (own[i]) return false;
        return obstacles ? static_cast<bool>((*obstacles)[i]) : grid.at(r, c) != background;
    };
    const Cell d = step_of(direction);
    int dist = 0;
    for (;;) {
        bool free = true;
        for (const Cell& x : object.cells) {
            if (blocked_at(x.r + d.r * (dist + 1), x.c + d.c * (dist + 1))) {
                free = false;
                break;
            }
        }
        if (!free) break;
        ++dist;
    }
    Translation t{grid, object, dist, dist == 0};
    if (dist == 0) return t;
    std::vector<Cell> moved;
    for (const Cell& x : object.cells) t.grid.set(x.r, x.c, background);
    for (const Cell& x : object.cells) {
        moved.push_back({x.r + d.r * dist, x.c + d.c * dist});
        t.grid.set(moved.back().r, moved.back().c, object.color);
    }
    t.object = make_object(object.color, std::move(moved));
    return t;
}

Grid settle(const Grid& grid, std::vector<Mover> movers, int background) {
    Grid g = grid;
    bool moved = true;
    while (moved) {
        moved = false;
        std::vector<std::size_t> order(movers.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return edge_gap(g, movers[a].object, movers[a].direction) < edge_gap(g, movers[b].object, movers[b].direction);
        });
        for (const std::size_t i : order) {
            Translation t = translate_until_contact(g, movers[i].object, movers[i].direction, background);
            if (t.blocked) continue;
            g = std::move(t.grid);
            movers[i].object = std::move(t.object);
            moved = true;
        }
    }
    return g;
}

}  // namespace conceptprobe::arc
