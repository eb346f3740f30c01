#pragma once

#include <array>
#include <span>
#include <vector>

#include "conceptprobe/raven/types.hpp"

namespace conceptprobe::raven {

/// Rules that survived induction for one attribute key, with the value each
/// predicts for the missing panel.
struct KeyHypotheses {
    AttrKey key;
    std::vector<Rule> rules;
    std::vector<int> predictions;  // parallel to rules
};

/// Factored form of the induced hypothesis space: a RuleSet is consistent
/// with the context iff it picks, for every key, either "free" or one of
/// that key's surviving rules.
struct InducedRules {
    LayoutKind layout = LayoutKind::Center;
    std::vector<KeyHypotheses> keys;  // only keys with at least one rule

    bool empty() const noexcept { return keys.empty(); }
};

InducedRules induce_rule_space(std::span<const Panel, 8> context);

/// Every RuleSet consistent with rows 1 and 2 and with the first two panels
/// of row 3, i.e. the full product of the factored space (including the
/// all-free set). Exponential in the number of constrained keys.
std::vector<RuleSet> induce_rules(std::span<const Panel, 8> context, LayoutKind layout);

struct Verdict {
    enum class Kind { Unique, Ambiguous, NoneConsistent };
    Kind kind = Kind::NoneConsistent;
    std::vector<int> indices;  // one for Unique, >= 2 for Ambiguous
    /// Some key admitted several rules with different predictions.
    bool rule_conflict = false;

    bool is_unique(int index) const { return kind == Kind::Unique && indices.front() == index; }
};

/// A candidate is accepted iff it matches at least one maximal induced
/// RuleSet, i.e. a set that rules every key for which some rule survived.
/// Keys with no surviving rule are treated as free and never compared.
Verdict solve(std::span<const Panel, 8> context, std::span<const Panel, 8> answers);
Verdict solve(const Problem& problem);

bool is_well_posed(const RavenMatrix& matrix, std::span<const Panel, 8> answers, int correct_index);

}  // namespace conceptprobe::raven
