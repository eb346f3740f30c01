#pragma once

// Domain model for RAVEN-style matrices.
//
// A panel is a set of entities placed in the slots of a layout. Layouts with
// an outer/inner split expose two entity groups; all other layouts expose a
// single group. Within a group every entity shares shape, size, color and
// angle, so those are group-level attributes. The remaining attributes
// (number, position, row, column) describe which slots a group occupies, and
// inside_outside relates the inner group's shape to the outer one.

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace conceptprobe::raven {

// ---------------------------------------------------------------------------
// Attribute domains. Every generated value lies inside these ranges.
// ---------------------------------------------------------------------------
struct Domain {
    static constexpr int kShapes = 5;   // triangle..circle
    static constexpr int kSizes = 6;    // 0..5, monotone in drawn size
    static constexpr int kColors = 10;  // 0 = white fill, 9 = darkest
    static constexpr int kAngles = 8;   // levels 0..7 <-> -135..180 degrees
};

enum class Shape : std::uint8_t { Triangle, Square, Pentagon, Hexagon, Circle };

/// Side count used to order shapes; circle counts as 7.
constexpr int side_count(Shape s) noexcept { return static_cast<int>(s) + 3; }

constexpr int angle_degrees(int level) noexcept { return -135 + 45 * level; }
std::optional<int> angle_level(int degrees) noexcept;

enum class LayoutKind : std::uint8_t { Center, Grid2x2, Grid3x3, OutInCenter, OutInGrid };
inline constexpr std::array<LayoutKind, 5> kAllLayouts = {
    LayoutKind::Center, LayoutKind::Grid2x2, LayoutKind::Grid3x3, LayoutKind::OutInCenter,
    LayoutKind::OutInGrid};

enum class AttributeName : std::uint8_t {
    Shape,
    Size,
    Color,
    Angle,
    Number,
    Position,
    Row,
    Column,
    InsideOutside,
};

/// Which entity group an attribute is read from. `All` is the only group of
/// single-group layouts and also hosts the panel-level inside_outside
/// attribute of out-in layouts.
enum class Group : std::uint8_t { All, Outer, Inner };

struct AttrKey {
    Group group = Group::All;
    AttributeName attribute = AttributeName::Shape;

    friend auto operator<=>(const AttrKey&, const AttrKey&) = default;
};

struct GroupSlots {
    Group group;
    int first_slot;
    int count;
    int grid_dim;  // 0 when the group's slots do not form a square grid
};

int slot_count(LayoutKind layout) noexcept;
std::span<const GroupSlots> layout_groups(LayoutKind layout) noexcept;
const GroupSlots* find_group(LayoutKind layout, Group group) noexcept;
bool is_out_in(LayoutKind layout) noexcept;

/// Every attribute key that is defined for the layout, in canonical order.
std::vector<AttrKey> layout_keys(LayoutKind layout);
bool key_valid_for(LayoutKind layout, AttrKey key) noexcept;

/// Inclusive bounds used for scalar keys; masks use [1, 2^bits - 1].
bool value_in_domain(LayoutKind layout, AttrKey key, int value) noexcept;
std::vector<int> domain_values(LayoutKind layout, AttrKey key);

struct Entity {
    Shape shape = Shape::Triangle;
    int size = 0;
    int color = 0;
    int angle = 0;  // level 0..7, see angle_degrees
    int slot = 0;

    friend bool operator==(const Entity&, const Entity&) = default;
};

/// One matrix cell. Entities are kept sorted by slot.
struct Panel {
    LayoutKind layout = LayoutKind::Center;
    std::vector<Entity> entities;

    friend bool operator==(const Panel&, const Panel&) = default;
};

/// Throws InvalidSpec describing the first broken invariant.
void validate_panel(const Panel& panel);
void sort_slots(Panel& panel);

/// Value of an attribute on a panel, or nullopt when the attribute is not
/// defined there (empty group, or non-uniform group attribute).
/// Position, row and column are bit masks relative to the group.
std::optional<int> attribute_value(const Panel& panel, AttrKey key);

/// Group-level view used to rebuild panels after edits.
struct GroupState {
    int shape = 0;
    int size = 0;
    int color = 0;
    int angle = 0;
    unsigned mask = 0;
    friend bool operator==(const GroupState&, const GroupState&) = default;
};

std::vector<GroupState> decompose(const Panel& panel);
Panel compose(LayoutKind layout, std::span<const GroupState> groups);

// ---------------------------------------------------------------------------
// Rules
// ---------------------------------------------------------------------------
enum class Relation : std::uint8_t { Constant, Progression, Arithmetic };

struct Rule {
    Relation relation = Relation::Constant;
    AttrKey key;
    int param = 0;  // progression delta, arithmetic sign, 0 for constant

    friend auto operator<=>(const Rule&, const Rule&) = default;
};

struct RuleSet {
    LayoutKind layout = LayoutKind::Center;
    std::vector<Rule> rules;            // sorted by key, one per key
    std::vector<AttrKey> free_attributes;

    friend bool operator==(const RuleSet&, const RuleSet&) = default;
};

/// Sorts rules and free attributes; throws InvalidSpec on duplicate keys or
/// on a free attribute that is also ruled.
void normalize(RuleSet& ruleset);

struct RavenMatrix {
    LayoutKind layout = LayoutKind::Center;
    std::array<Panel, 8> context;  // row-major, cell (3,3) missing
    Panel ground_truth;
    RuleSet ruleset;  // identical across the three rows

    friend bool operator==(const RavenMatrix&, const RavenMatrix&) = default;
};

// ---------------------------------------------------------------------------
// Concepts and problems
// ---------------------------------------------------------------------------
enum class Family : std::uint8_t { Sameness, Progression, Arithmetic };

/// How attributes that the concept does not bind are treated.
///   Free     - sampled independently per panel
///   Constant - held constant along each row
///   Random   - each gets a randomly drawn feasible rule (RAVEN-style)
enum class Background : std::uint8_t { Free, Constant, Random };

Relation family_relation(Family family) noexcept;
Background default_background(Family family) noexcept;
std::vector<int> default_params(Family family);

struct ConceptSpec {
    Family family = Family::Sameness;
    std::vector<AttrKey> bound_attributes;
    LayoutKind layout = LayoutKind::Center;
    Background background = Background::Free;
    std::vector<int> params;  // allowed rule params for the family relation

    friend bool operator==(const ConceptSpec&, const ConceptSpec&) = default;
};

/// Builds a spec with the family's default background and params.
ConceptSpec make_spec(Family family, std::vector<AttrKey> bound, LayoutKind layout);

/// Throws InvalidSpec when the spec cannot be instantiated.
void validate_spec(const ConceptSpec& spec);

enum class AnswerStrategy : std::uint8_t { BiasedPerturbation, FairBisection };

struct Problem {
    std::string id;
    RavenMatrix matrix;
    std::array<Panel, 8> answers;
    int correct_index = 0;
    std::vector<ConceptSpec> concept_tags;
    std::uint64_t seed = 0;
    AnswerStrategy answer_strategy = AnswerStrategy::FairBisection;

    friend bool operator==(const Problem&, const Problem&) = default;
};

// ---------------------------------------------------------------------------
// Names. These spellings are part of the JSON schema.
// ---------------------------------------------------------------------------
std::string_view to_string(Shape v) noexcept;
std::string_view to_string(LayoutKind v) noexcept;
std::string_view to_string(AttributeName v) noexcept;
std::string_view to_string(Group v) noexcept;
std::string_view to_string(Relation v) noexcept;
std::string_view to_string(Family v) noexcept;
std::string_view to_string(Background v) noexcept;
std::string_view to_string(AnswerStrategy v) noexcept;

std::optional<Shape> parse_shape(std::string_view s) noexcept;
std::optional<LayoutKind> parse_layout(std::string_view s) noexcept;
std::optional<AttributeName> parse_attribute(std::string_view s) noexcept;
std::optional<Relation> parse_relation(std::string_view s) noexcept;
std::optional<Family> parse_family(std::string_view s) noexcept;
std::optional<Background> parse_background(std::string_view s) noexcept;
std::optional<AnswerStrategy> parse_answer_strategy(std::string_view s) noexcept;

/// "color", "outer.size", "inner.position"
std::string key_name(AttrKey key);
std::optional<AttrKey> parse_key(std::string_view s) noexcept;

/// Canonical descriptor, e.g. "sameness[color+shape]@center".
/// Non-default background and params are appended as "/bg=..." and "/p=...".
std::string describe(const ConceptSpec& spec);
ConceptSpec parse_descriptor(std::string_view text);

}  // namespace conceptprobe::raven
