#pragma once

// ARC grids, tasks in the public competition JSON shape, 3-guess scoring and
// the object primitives the concept generators are built from.

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace conceptprobe::arc {

inline constexpr int kMaxDim = 30;
inline constexpr int kColors = 10;
inline constexpr int kMaxGuesses = 3;

struct Grid {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> cells;  // row-major color ids

    Grid() = default;
    Grid(int h, int w, int fill = 0);

    int at(int r, int c) const { return cells[static_cast<std::size_t>(r) * width + c]; }
    void set(int r, int c, int color) { cells[static_cast<std::size_t>(r) * width + c] = static_cast<std::uint8_t>(color); }
    bool in_bounds(int r, int c) const noexcept { return r >= 0 && c >= 0 && r < height && c < width; }

    friend bool operator==(const Grid&, const Grid&) = default;
};

/// Throws ValueOutOfRange on bad dimensions or colors.
Grid make_grid(const std::vector<std::vector<int>>& rows);
void validate_grid(const Grid& grid);
std::vector<std::vector<int>> to_rows(const Grid& grid);

struct Pair {
    Grid input;
    Grid output;

    friend bool operator==(const Pair&, const Pair&) = default;
};

struct Task {
    std::string id;
    std::vector<Pair> train;
    std::vector<Pair> test;
    std::optional<std::string> concept_tag;

    friend bool operator==(const Task&, const Task&) = default;
};

nlohmann::json task_to_json(const Task& task, bool with_tag = true);
/// Throws SchemaViolation for structural problems and ValueOutOfRange for
/// colors or dimensions.
Task task_from_json(const nlohmann::json& j, std::string id = "");
std::string write_task(const Task& task, bool with_tag = true);
Task parse_task(std::string_view text, std::string id = "");

/// 1 iff one of at most three guesses equals the target exactly.
/// Throws TooManyGuesses.
bool pair_solved(const Grid& target, std::span<const Grid> guesses);
/// Mean over test pairs; predictions[i] holds the guesses for test pair i
/// (missing entries count as unsolved).
double score(const Task& task, std::span<const std::vector<Grid>> predictions);

struct Cell {
    int r = 0;
    int c = 0;

    friend auto operator<=>(const Cell&, const Cell&) = default;
};

struct GridObject {
    int color = 0;
    std::vector<Cell> cells;  // row-major order
    int top = 0, left = 0, bottom = 0, right = 0;

    int height() const noexcept { return bottom - top + 1; }
    int width() const noexcept { return right - left + 1; }
    friend bool operator==(const GridObject&, const GridObject&) = default;
};

GridObject make_object(int color, std::vector<Cell> cells);

/// Maximal same-color connected regions of non-background cells, ordered by
/// their first cell in row-major order.
std::vector<GridObject> components(const Grid& grid, int connectivity = 4, int background = 0);

/// The object's cells on a background grid of its bounding box.
Grid crop(const GridObject& object, int background = 0);

enum class Direction { Up, Down, Left, Right };
std::string_view to_string(Direction d) noexcept;

struct Translation {
    Grid grid;
    GridObject object;  // at its new place
    int distance = 0;
    bool blocked = false;  // already in contact; grid returned unchanged
};

/// Slides `object` until the next step would leave the grid or hit an
/// obstacle. By default every non-background cell outside the object is an
/// obstacle; `obstacles` (row-major, grid-sized) overrides that.
/// Throws SceneContractViolation when the object is not in the grid.
Translation translate_until_contact(const Grid& grid, const GridObject& object, Direction direction,
                                    int background = 0, const std::vector<bool>* obstacles = nullptr);

struct Mover {
    GridObject object;
    Direction direction;
};

/// Moves every mover until contact. Objects nearest their stopping edge go
/// first and passes repeat until nothing moves, so stacked objects settle
/// onto each other.
Grid settle(const Grid& grid, std::vector<Mover> movers, int background = 0);

}  // namespace conceptprobe::arc
