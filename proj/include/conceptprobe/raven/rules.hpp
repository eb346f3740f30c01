#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "conceptprobe/raven/types.hpp"

namespace conceptprobe::raven {

/// Relations the rule algebra defines for an attribute, independent of
/// layout: progression everywhere except inside_outside, arithmetic only on
/// number, color and position.
bool relation_valid(AttributeName attribute, Relation relation) noexcept;

/// Stricter than relation_valid: the relation can actually produce a row in
/// this layout (e.g. number cannot progress in a single-slot group).
bool relation_feasible(LayoutKind layout, AttrKey key, Relation relation) noexcept;

bool param_valid(Relation relation, int param) noexcept;

/// Every rule of the finite hypothesis space for one key.
std::vector<Rule> candidate_rules(LayoutKind layout, AttrKey key);

/// Raw value arithmetic behind the relations. Return nullopt when the
/// result leaves the key's domain.
std::optional<int> progression_step(LayoutKind layout, AttrKey key, int value, int delta);
std::optional<int> arithmetic_combine(LayoutKind layout, AttrKey key, int first, int second, int sign);

/// Value of the next panel in a row given the preceding one or two.
std::optional<int> next_value(LayoutKind layout, const Rule& rule, std::span<const int> prior);

struct AttributeValue {
    AttrKey key;
    int value = 0;
    friend bool operator==(const AttributeValue&, const AttributeValue&) = default;
};

/// The attribute value the next panel of a row must take.
///   Constant    -> the prior value
///   Progression -> last prior value advanced by param
///   Arithmetic  -> first (+|-) second; needs two prior panels
/// Throws UndefinedAttribute, OutOfRange, LayoutMismatch.
AttributeValue apply_rule(const Rule& rule, std::span<const Panel> prior);

/// True iff the rule holds across the three values.
bool rule_holds(LayoutKind layout, const Rule& rule, const std::array<std::optional<int>, 3>& values);

/// True iff every rule of the ruleset holds across the row. Free attributes
/// are ignored. Throws LayoutMismatch when a panel's layout differs from the
/// ruleset's or a rule names a key the layout lacks.
bool check_row(const RuleSet& ruleset, std::span<const Panel, 3> row);

}  // namespace conceptprobe::raven
