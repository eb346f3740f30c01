#include "conceptprobe/raven/rules.hpp"

#include <algorithm>
#include <set>

#include "conceptprobe/common/error.hpp"

namespace conceptprobe::raven {

namespace {

bool is_structure(AttributeName a) {
    return a == AttributeName::Number || a == AttributeName::Position || a == AttributeName::Row ||
           a == AttributeName::Column;
}

unsigned rotate_mask(unsigned mask, int bits, int delta) {
    const int shift = ((delta % bits) + bits) % bits;
    const unsigned full = (1u << bits) - 1u;
    if (shift == 0) return mask;
    return ((mask << shift) | (mask >> (bits - shift))) & full;
}

}  // namespace

bool relation_valid(AttributeName attribute, Relation relation) noexcept {
    switch (relation) {
        case Relation::Constant: return true;
        case Relation::Progression: return attribute != AttributeName::InsideOutside;
        case Relation::Arithmetic:
            return attribute == AttributeName::Number || attribute == AttributeName::Color ||
                   attribute == AttributeName::Position;
    }
    return false;
}

bool relation_feasible(LayoutKind layout, AttrKey key, Relation relation) noexcept {
    if (!key_valid_for(layout, key) || !relation_valid(key.attribute, relation)) return false;
    if (relation == Relation::Constant) return true;
    if (is_structure(key.attribute)) {
        const GroupSlots* g = find_group(layout, key.group);
        if (g->count < 2) return false;
    }
    return true;
}

bool param_valid(Relation relation, int param) noexcept {
    switch (relation) {
        case Relation::Constant: return param == 0;
        case Relation::Progression: return param == -2 || param == -1 || param == 1 || param == 2;
        case Relation::Arithmetic: return param == -1 || param == 1;
    }
    return false;
}

std::vector<Rule> candidate_rules(LayoutKind layout, AttrKey key) {
    std::vector<Rule> out;
    if (!key_valid_for(layout, key)) return out;
    out.push_back({Relation::Constant, key, 0});
    if (relation_valid(key.attribute, Relation::Progression)) {
        for (int d : {-2, -1, 1, 2}) out.push_back({Relation::Progression, key, d});
    }
    if (relation_valid(key.attribute, Relation::Arithmetic)) {
        for (int s : {-1, 1}) out.push_back({Relation::Arithmetic, key, s});
    }
    return out;
}

std::optional<int> progression_step(LayoutKind layout, AttrKey key, int value, int delta) {
    const GroupSlots* g = find_group(layout, key.group);
    if (g == nullptr) return std::nullopt;
    int next = 0;
    switch (key.attribute) {
        case AttributeName::Position:
            next = static_cast<int>(rotate_mask(static_cast<unsigned>(value), g->count, delta));
            break;
        case AttributeName::Row:
        case AttributeName::Column: {
            const unsigned mask = static_cast<unsigned>(value);
            const unsigned shifted = delta >= 0 ? mask << delta : mask >> -delta;
            // bits pushed off either end make the step undefined
            if ((delta >= 0 ? shifted >> delta : shifted << -delta) != mask) return std::nullopt;
            next = static_cast<int>(shifted);
            break;
        }
        case AttributeName::InsideOutside: return std::nullopt;
        default: next = value + delta; break;
    }
    if (!value_in_domain(layout, key, next)) return std::nullopt;
    return next;
}

std::optional<int> arithmetic_combine(LayoutKind layout, AttrKey key, int first, int second, int sign) {
    int result = 0;
    if (key.attribute == AttributeName::Position) {
        const auto a = static_cast<unsigned>(first);
        const auto b = static_cast<unsigned>(second);
        result = static_cast<int>(sign > 0 ? (a | b) : (a & ~b));
    } else if (key.attribute == AttributeName::Number || key.attribute == AttributeName::Color) {
        result = first + sign * second;
    } else {
        return std::nullopt;
    }
    if (!value_in_domain(layout, key, result)) return std::nullopt;
    return result;
}

std::optional<int> next_value(LayoutKind layout, const Rule& rule, std::span<const int> prior) {
    if (prior.empty()) return std::nullopt;
    switch (rule.relation) {
        case Relation::Constant: return prior.back();
        case Relation::Progression: return progression_step(layout, rule.key, prior.back(), rule.param);
        case Relation::Arithmetic:
            if (prior.size() < 2) return std::nullopt;
            return arithmetic_combine(layout, rule.key, prior[prior.size() - 2], prior.back(), rule.param);
    }
    return std::nullopt;
}

AttributeValue apply_rule(const Rule& rule, std::span<const Panel> prior) {
    if (prior.empty() || prior.size() > 2) throw InvalidSpec("apply_rule expects one or two prior panels");
    const LayoutKind layout = prior.front().layout;
    for (const auto& p : prior) {
        if (p.layout != layout) throw LayoutMismatch("prior panels use different layouts");
    }
    if (!key_valid_for(layout, rule.key) || !relation_valid(rule.key.attribute, rule.relation)) {
        throw LayoutMismatch(std::string(to_string(rule.relation)) + " on " + key_name(rule.key) +
                             " is not defined for layout " + std::string(to_string(layout)));
    }
    if (rule.relation == Relation::Arithmetic && prior.size() != 2) {
        throw InvalidSpec("arithmetic needs the first two panels of the row");
    }
    std::vector<int> values;
    for (const auto& p : prior) {
        const auto v = attribute_value(p, rule.key);
        if (!v) throw UndefinedAttribute(key_name(rule.key) + " is undefined on a prior panel");
        values.push_back(*v);
    }
    const auto next = next_value(layout, rule, values);
    if (!next) throw OutOfRange(key_name(rule.key) + " leaves its domain");
    return {rule.key, *next};
}

bool rule_holds(LayoutKind layout, const Rule& rule, const std::array<std::optional<int>, 3>& v) {
    if (!v[0] || !v[1] || !v[2]) return false;
    switch (rule.relation) {
        case Relation::Constant: return *v[0] == *v[1] && *v[1] == *v[2];
        case Relation::Progression: {
            const auto second = progression_step(layout, rule.key, *v[0], rule.param);
            const auto third = progression_step(layout, rule.key, *v[1], rule.param);
            return second == v[1] && third == v[2];
        }
        case Relation::Arithmetic:
            return arithmetic_combine(layout, rule.key, *v[0], *v[1], rule.param) == v[2];
    }
    return false;
}

bool check_row(const RuleSet& ruleset, std::span<const Panel, 3> row) {
    for (const auto& p : row) {
        if (p.layout != ruleset.layout) throw LayoutMismatch("panel layout differs from ruleset layout");
    }
    for (const auto& rule : ruleset.rules) {
        if (!key_valid_for(ruleset.layout, rule.key) || !relation_valid(rule.key.attribute, rule.relation)) {
            throw LayoutMismatch("rule on " + key_name(rule.key) + " is not defined for layout " +
                                 std::string(to_string(ruleset.layout)));
        }
        const std::array<std::optional<int>, 3> values = {
            attribute_value(row[0], rule.key), attribute_value(row[1], rule.key),
            attribute_value(row[2], rule.key)};
        if (!rule_holds(ruleset.layout, rule, values)) return false;
    }
    return true;
}

void validate_spec(const ConceptSpec& spec) {
    const std::string name = describe(spec);
    if (spec.bound_attributes.empty()) throw InvalidSpec(name + ": no bound attributes");
    std::set<AttrKey> seen;
    const Relation relation = family_relation(spec.family);
    for (const auto& key : spec.bound_attributes) {
        if (!seen.insert(key).second) throw InvalidSpec(name + ": duplicate attribute " + key_name(key));
        if (!key_valid_for(spec.layout, key)) {
            throw InvalidSpec(name + ": " + key_name(key) + " is not defined for this layout");
        }
        if (!relation_feasible(spec.layout, key, relation)) {
            throw InvalidSpec(name + ": " + std::string(to_string(relation)) + " cannot apply to " +
                              key_name(key) + " in this layout");
        }
    }
    // Two structure attributes of one group cannot follow independent rules.
    std::set<Group> structured;
    for (const auto& key : spec.bound_attributes) {
        if (is_structure(key.attribute) && relation != Relation::Constant &&
            !structured.insert(key.group).second) {
            throw InvalidSpec(name + ": at most one of number/position/row/column may vary per group");
        }
    }
    if (spec.params.empty()) throw InvalidSpec(name + ": empty param range");
    for (int p : spec.params) {
        if (!param_valid(relation, p)) throw InvalidSpec(name + ": invalid param " + std::to_string(p));
    }
}

}  // namespace conceptprobe::raven
