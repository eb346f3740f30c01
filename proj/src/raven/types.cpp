#include "conceptprobe/raven/types.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <set>

#include "conceptprobe/common/error.hpp"

namespace conceptprobe::raven {

namespace {

constexpr std::array<GroupSlots, 1> kCenter{{{Group::All, 0, 1, 0}}};
constexpr std::array<GroupSlots, 1> kGrid2{{{Group::All, 0, 4, 2}}};
constexpr std::array<GroupSlots, 1> kGrid3{{{Group::All, 0, 9, 3}}};
constexpr std::array<GroupSlots, 2> kOutInCenter{{{Group::Outer, 0, 1, 0}, {Group::Inner, 1, 1, 0}}};
constexpr std::array<GroupSlots, 2> kOutInGrid{{{Group::Outer, 0, 1, 0}, {Group::Inner, 1, 4, 2}}};

constexpr std::array<AttributeName, 6> kGroupAttributes = {
    AttributeName::Shape,  AttributeName::Size,   AttributeName::Color,
    AttributeName::Angle,  AttributeName::Number, AttributeName::Position};

unsigned full_mask(int bits) { return (1u << bits) - 1u; }

unsigned row_mask(unsigned mask, int dim) {
    unsigned rows = 0;
    for (int i = 0; i < dim * dim; ++i) {
        if (mask & (1u << i)) rows |= 1u << (i / dim);
    }
    return rows;
}

unsigned column_mask(unsigned mask, int dim) {
    unsigned cols = 0;
    for (int i = 0; i < dim * dim; ++i) {
        if (mask & (1u << i)) cols |= 1u << (i % dim);
    }
    return cols;
}

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(std::string_view s, const std::array<std::string_view, N>& names) {
    for (std::size_t i = 0; i < N; ++i) {
        if (names[i] == s) return static_cast<Enum>(i);
    }
    return std::nullopt;
}

constexpr std::array<std::string_view, 5> kShapeNames = {"triangle", "square", "pentagon", "hexagon",
                                                         "circle"};
constexpr std::array<std::string_view, 5> kLayoutNames = {"center", "grid_2x2", "grid_3x3",
                                                          "out_in_center", "out_in_grid"};
constexpr std::array<std::string_view, 9> kAttributeNames = {
    "shape", "size", "color", "angle", "number", "position", "row", "column", "inside_outside"};
constexpr std::array<std::string_view, 3> kGroupNames = {"all", "outer", "inner"};
constexpr std::array<std::string_view, 3> kRelationNames = {"constant", "progression", "arithmetic"};
constexpr std::array<std::string_view, 3> kFamilyNames = {"sameness", "progression", "arithmetic"};
constexpr std::array<std::string_view, 3> kBackgroundNames = {"free", "constant", "random"};
constexpr std::array<std::string_view, 2> kStrategyNames = {"biased", "fair"};

}  // namespace

std::optional<int> angle_level(int degrees) noexcept {
    if ((degrees + 135) % 45 != 0) return std::nullopt;
    const int level = (degrees + 135) / 45;
    if (level < 0 || level >= Domain::kAngles) return std::nullopt;
    return level;
}

int slot_count(LayoutKind layout) noexcept {
    int n = 0;
    for (const auto& g : layout_groups(layout)) n += g.count;
    return n;
}

std::span<const GroupSlots> layout_groups(LayoutKind layout) noexcept {
    switch (layout) {
        case LayoutKind::Center: return kCenter;
        case LayoutKind::Grid2x2: return kGrid2;
        case LayoutKind::Grid3x3: return kGrid3;
        case LayoutKind::OutInCenter: return kOutInCenter;
        case LayoutKind::OutInGrid: return kOutInGrid;
    }
    return kCenter;
}

const GroupSlots* find_group(LayoutKind layout, Group group) noexcept {
    for (const auto& g : layout_groups(layout)) {
        if (g.group == group) return &g;
    }
    return nullptr;
}

bool is_out_in(LayoutKind layout) noexcept {
    return layout == LayoutKind::OutInCenter || layout == LayoutKind::OutInGrid;
}

std::vector<AttrKey> layout_keys(LayoutKind layout) {
    std::vector<AttrKey> keys;
    for (const auto& g : layout_groups(layout)) {
        for (auto a : kGroupAttributes) keys.push_back({g.group, a});
        if (g.grid_dim > 0) {
            keys.push_back({g.group, AttributeName::Row});
            keys.push_back({g.group, AttributeName::Column});
        }
    }
    if (is_out_in(layout)) keys.push_back({Group::All, AttributeName::InsideOutside});
    std::sort(keys.begin(), keys.end());
    return keys;
}

bool key_valid_for(LayoutKind layout, AttrKey key) noexcept {
    if (key.attribute == AttributeName::InsideOutside) {
        return is_out_in(layout) && key.group == Group::All;
    }
    const GroupSlots* g = find_group(layout, key.group);
    if (g == nullptr) return false;
    if (key.attribute == AttributeName::Row || key.attribute == AttributeName::Column) {
        return g->grid_dim > 0;
    }
    return true;
}

bool value_in_domain(LayoutKind layout, AttrKey key, int value) noexcept {
    if (!key_valid_for(layout, key)) return false;
    const GroupSlots* g = find_group(layout, key.group);
    switch (key.attribute) {
        case AttributeName::Shape: return value >= 0 && value < Domain::kShapes;
        case AttributeName::Size: return value >= 0 && value < Domain::kSizes;
        case AttributeName::Color: return value >= 0 && value < Domain::kColors;
        case AttributeName::Angle: return value >= 0 && value < Domain::kAngles;
        case AttributeName::Number: return value >= 1 && value <= g->count;
        case AttributeName::Position:
            return value >= 1 && static_cast<unsigned>(value) <= full_mask(g->count);
        case AttributeName::Row:
        case AttributeName::Column:
            return value >= 1 && static_cast<unsigned>(value) <= full_mask(g->grid_dim);
        case AttributeName::InsideOutside: return value == 0 || value == 1;
    }
    return false;
}

std::vector<int> domain_values(LayoutKind layout, AttrKey key) {
    std::vector<int> out;
    if (!key_valid_for(layout, key)) return out;
    const GroupSlots* g = find_group(layout, key.group);
    int lo = 0;
    int hi = -1;
    switch (key.attribute) {
        case AttributeName::Shape: hi = Domain::kShapes - 1; break;
        case AttributeName::Size: hi = Domain::kSizes - 1; break;
        case AttributeName::Color: hi = Domain::kColors - 1; break;
        case AttributeName::Angle: hi = Domain::kAngles - 1; break;
        case AttributeName::Number: lo = 1; hi = g->count; break;
        case AttributeName::Position: lo = 1; hi = static_cast<int>(full_mask(g->count)); break;
        case AttributeName::Row:
        case AttributeName::Column: lo = 1; hi = static_cast<int>(full_mask(g->grid_dim)); break;
        case AttributeName::InsideOutside: hi = 1; break;
    }
    for (int v = lo; v <= hi; ++v) out.push_back(v);
    return out;
}

void sort_slots(Panel& panel) {
    std::sort(panel.entities.begin(), panel.entities.end(),
              [](const Entity& a, const Entity& b) { return a.slot < b.slot; });
}

void validate_panel(const Panel& panel) {
    if (panel.entities.empty()) throw InvalidSpec("panel has no entities");
    const int slots = slot_count(panel.layout);
    std::set<int> used;
    for (const auto& e : panel.entities) {
        if (e.slot < 0 || e.slot >= slots) throw InvalidSpec("entity slot out of range");
        if (!used.insert(e.slot).second) throw InvalidSpec("two entities share a slot");
        if (static_cast<int>(e.shape) >= Domain::kShapes) throw InvalidSpec("shape out of range");
        if (e.size < 0 || e.size >= Domain::kSizes) throw InvalidSpec("size out of range");
        if (e.color < 0 || e.color >= Domain::kColors) throw InvalidSpec("color out of range");
        if (e.angle < 0 || e.angle >= Domain::kAngles) throw InvalidSpec("angle out of range");
    }
    if (is_out_in(panel.layout)) {
        if (!used.contains(0)) throw InvalidSpec("outer slot must be occupied");
        if (used.size() < 2) throw InvalidSpec("inner group must be occupied");
    }
}

std::optional<int> attribute_value(const Panel& panel, AttrKey key) {
    if (!key_valid_for(panel.layout, key)) return std::nullopt;
    if (key.attribute == AttributeName::InsideOutside) {
        const auto outer = attribute_value(panel, {Group::Outer, AttributeName::Shape});
        const auto inner = attribute_value(panel, {Group::Inner, AttributeName::Shape});
        if (!outer || !inner) return std::nullopt;
        return *outer == *inner ? 1 : 0;
    }
    const GroupSlots& g = *find_group(panel.layout, key.group);
    unsigned mask = 0;
    std::optional<int> uniform;
    bool mixed = false;
    for (const auto& e : panel.entities) {
        if (e.slot < g.first_slot || e.slot >= g.first_slot + g.count) continue;
        mask |= 1u << (e.slot - g.first_slot);
        int v = 0;
        switch (key.attribute) {
            case AttributeName::Shape: v = static_cast<int>(e.shape); break;
            case AttributeName::Size: v = e.size; break;
            case AttributeName::Color: v = e.color; break;
            case AttributeName::Angle: v = e.angle; break;
            default: break;
        }
        if (uniform && *uniform != v) mixed = true;
        uniform = v;
    }
    if (mask == 0) return std::nullopt;
    switch (key.attribute) {
        case AttributeName::Number: return std::popcount(mask);
        case AttributeName::Position: return static_cast<int>(mask);
        case AttributeName::Row: return static_cast<int>(row_mask(mask, g.grid_dim));
        case AttributeName::Column: return static_cast<int>(column_mask(mask, g.grid_dim));
        default: break;
    }
    if (mixed) return std::nullopt;
    return uniform;
}

std::vector<GroupState> decompose(const Panel& panel) {
    std::vector<GroupState> out;
    for (const auto& g : layout_groups(panel.layout)) {
        GroupState s;
        bool first = true;
        for (const auto& e : panel.entities) {
            if (e.slot < g.first_slot || e.slot >= g.first_slot + g.count) continue;
            if (first) {
                s.shape = static_cast<int>(e.shape);
                s.size = e.size;
                s.color = e.color;
                s.angle = e.angle;
                first = false;
            }
            s.mask |= 1u << (e.slot - g.first_slot);
        }
        out.push_back(s);
    }
    return out;
}

Panel compose(LayoutKind layout, std::span<const GroupState> groups) {
    Panel p;
    p.layout = layout;
    const auto gs = layout_groups(layout);
    for (std::size_t gi = 0; gi < gs.size() && gi < groups.size(); ++gi) {
        const GroupState& s = groups[gi];
        for (int i = 0; i < gs[gi].count; ++i) {
            if (!(s.mask & (1u << i))) continue;
            p.entities.push_back(
                Entity{static_cast<Shape>(s.shape), s.size, s.color, s.angle, gs[gi].first_slot + i});
        }
    }
    return p;
}

void normalize(RuleSet& ruleset) {
    std::sort(ruleset.rules.begin(), ruleset.rules.end(),
              [](const Rule& a, const Rule& b) { return a.key < b.key; });
    std::sort(ruleset.free_attributes.begin(), ruleset.free_attributes.end());
    for (std::size_t i = 1; i < ruleset.rules.size(); ++i) {
        if (ruleset.rules[i].key == ruleset.rules[i - 1].key) {
            throw InvalidSpec("ruleset has two rules for " + key_name(ruleset.rules[i].key));
        }
    }
    for (const auto& f : ruleset.free_attributes) {
        for (const auto& r : ruleset.rules) {
            if (r.key == f) throw InvalidSpec("free attribute is also ruled: " + key_name(f));
        }
    }
}

Relation family_relation(Family family) noexcept {
    switch (family) {
        case Family::Sameness: return Relation::Constant;
        case Family::Progression: return Relation::Progression;
        case Family::Arithmetic: return Relation::Arithmetic;
    }
    return Relation::Constant;
}

Background default_background(Family family) noexcept {
    return family == Family::Sameness ? Background::Free : Background::Constant;
}

std::vector<int> default_params(Family family) {
    switch (family) {
        case Family::Sameness: return {0};
        case Family::Progression: return {-2, -1, 1, 2};
        case Family::Arithmetic: return {-1, 1};
    }
    return {0};
}

ConceptSpec make_spec(Family family, std::vector<AttrKey> bound, LayoutKind layout) {
    return ConceptSpec{family, std::move(bound), layout, default_background(family), default_params(family)};
}

std::string_view to_string(Shape v) noexcept { return kShapeNames[static_cast<int>(v)]; }
std::string_view to_string(LayoutKind v) noexcept { return kLayoutNames[static_cast<int>(v)]; }
std::string_view to_string(AttributeName v) noexcept { return kAttributeNames[static_cast<int>(v)]; }
std::string_view to_string(Group v) noexcept { return kGroupNames[static_cast<int>(v)]; }
std::string_view to_string(Relation v) noexcept { return kRelationNames[static_cast<int>(v)]; }
std::string_view to_string(Family v) noexcept { return kFamilyNames[static_cast<int>(v)]; }
std::string_view to_string(Background v) noexcept { return kBackgroundNames[static_cast<int>(v)]; }
std::string_view to_string(AnswerStrategy v) noexcept { return kStrategyNames[static_cast<int>(v)]; }

std::optional<Shape> parse_shape(std::string_view s) noexcept { return lookup<Shape>(s, kShapeNames); }
std::optional<LayoutKind> parse_layout(std::string_view s) noexcept {
    return lookup<LayoutKind>(s, kLayoutNames);
}
std::optional<AttributeName> parse_attribute(std::string_view s) noexcept {
    return lookup<AttributeName>(s, kAttributeNames);
}
std::optional<Relation> parse_relation(std::string_view s) noexcept {
    return lookup<Relation>(s, kRelationNames);
}
std::optional<Family> parse_family(std::string_view s) noexcept { return lookup<Family>(s, kFamilyNames); }
std::optional<Background> parse_background(std::string_view s) noexcept {
    return lookup<Background>(s, kBackgroundNames);
}
std::optional<AnswerStrategy> parse_answer_strategy(std::string_view s) noexcept {
    return lookup<AnswerStrategy>(s, kStrategyNames);
}

std::string key_name(AttrKey key) {
    std::string out;
    if (key.group != Group::All) {
        out += to_string(key.group);
        out += '.';
    }
    out += to_string(key.attribute);
    return out;
}

std::optional<AttrKey> parse_key(std::string_view s) noexcept {
    AttrKey key;
    if (const auto dot = s.find('.'); dot != std::string_view::npos) {
        const auto g = lookup<Group>(s.substr(0, dot), kGroupNames);
        if (!g || *g == Group::All) return std::nullopt;
        key.group = *g;
        s = s.substr(dot + 1);
    }
    const auto a = parse_attribute(s);
    if (!a) return std::nullopt;
    key.attribute = *a;
    return key;
}

std::string describe(const ConceptSpec& spec) {
    std::string out(to_string(spec.family));
    out += '[';
    for (std::size_t i = 0; i < spec.bound_attributes.size(); ++i) {
        if (i) out += '+';
        out += key_name(spec.bound_attributes[i]);
    }
    out += "]@";
    out += to_string(spec.layout);
    if (spec.background != default_background(spec.family)) {
        out += "/bg=";
        out += to_string(spec.background);
    }
    if (spec.params != default_params(spec.family)) {
        out += "/p=";
        for (std::size_t i = 0; i < spec.params.size(); ++i) {
            if (i) out += ',';
            out += std::to_string(spec.params[i]);
        }
    }
    return out;
}

ConceptSpec parse_descriptor(std::string_view text) {
    const auto fail = [&](const char* why) {
        return InvalidSpec("bad concept descriptor '" + std::string(text) + "': " + why);
    };
    const auto open = text.find('[');
    const auto close = text.find("]@");
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
        throw fail("expected family[attrs]@layout");
    }
    const auto family = parse_family(text.substr(0, open));
    if (!family) throw fail("unknown family");

    ConceptSpec spec;
    spec.family = *family;
    spec.background = default_background(*family);
    spec.params = default_params(*family);

    std::string_view attrs = text.substr(open + 1, close - open - 1);
    while (!attrs.empty()) {
        const auto plus = attrs.find('+');
        const auto key = parse_key(attrs.substr(0, plus));
        if (!key) throw fail("unknown attribute");
        spec.bound_attributes.push_back(*key);
        attrs = plus == std::string_view::npos ? std::string_view{} : attrs.substr(plus + 1);
    }

    std::string_view rest = text.substr(close + 2);
    const auto slash = rest.find('/');
    const auto layout = parse_layout(rest.substr(0, slash));
    if (!layout) throw fail("unknown layout");
    spec.layout = *layout;
    rest = slash == std::string_view::npos ? std::string_view{} : rest.substr(slash + 1);

    while (!rest.empty()) {
        const auto next = rest.find('/');
        const std::string_view option = rest.substr(0, next);
        rest = next == std::string_view::npos ? std::string_view{} : rest.substr(next + 1);
        if (option.starts_with("bg=")) {
            const auto bg = parse_background(option.substr(3));
            if (!bg) throw fail("unknown background");
            spec.background = *bg;
        } else if (option.starts_with("p=")) {
            spec.params.clear();
            std::string_view list = option.substr(2);
            while (!list.empty()) {
                const auto comma = list.find(',');
                const auto item = list.substr(0, comma);
                int v = 0;
                const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
                if (ec != std::errc{} || ptr != item.data() + item.size()) throw fail("bad param");
                spec.params.push_back(v);
                list = comma == std::string_view::npos ? std::string_view{} : list.substr(comma + 1);
            }
        } else {
            throw fail("unknown option");
        }
    }
    return spec;
}

}  // namespace conceptprobe::raven
