#include "conceptprobe/raven/oracle.hpp"

#include <algorithm>

#include "conceptprobe/common/error.hpp"
#include "conceptprobe/raven/rules.hpp"

namespace conceptprobe::raven {

namespace {

using Values = std::array<std::optional<int>, 3>;

Values row_values(std::span<const Panel, 8> ctx, int row, AttrKey key) {
    Values v;
    for (int c = 0; c < 3 && row * 3 + c < 8; ++c) v[c] = attribute_value(ctx[row * 3 + c], key);
    return v;
}

}  // namespace

InducedRules induce_rule_space(std::span<const Panel, 8> context) {
    InducedRules out;
    out.layout = context.front().layout;
    for (const auto& p : context) {
        if (p.layout != out.layout) throw LayoutMismatch("context panels use different layouts");
    }
    for (const AttrKey key : layout_keys(out.layout)) {
        const Values r1 = row_values(context, 0, key);
        const Values r2 = row_values(context, 1, key);
        const Values r3 = row_values(context, 2, key);
        if (!r3[0] || !r3[1]) continue;
        const std::array<int, 2> prefix = {*r3[0], *r3[1]};
        KeyHypotheses h{key, {}, {}};
        for (const Rule& rule : candidate_rules(out.layout, key)) {
            if (!rule_holds(out.layout, rule, r1) || !rule_holds(out.layout, rule, r2)) continue;
            if (rule.relation == Relation::Progression &&
                progression_step(out.layout, key, prefix[0], rule.param) != prefix[1]) {
                continue;
            }
            if (rule.relation == Relation::Constant && prefix[0] != prefix[1]) continue;
            const auto predicted = next_value(out.layout, rule, prefix);
            if (!predicted) continue;
            h.rules.push_back(rule);
            h.predictions.push_back(*predicted);
        }
        if (!h.rules.empty()) out.keys.push_back(std::move(h));
    }
    return out;
}

std::vector<RuleSet> induce_rules(std::span<const Panel, 8> context, LayoutKind layout) {
    for (const auto& p : context) {
        if (p.layout != layout) throw LayoutMismatch("context panels do not use the requested layout");
    }
    const InducedRules space = induce_rule_space(context);
    std::vector<RuleSet> out;
    // Mixed-radix counter over (free, rule_0, ..., rule_k) per key.
    std::vector<std::size_t> choice(space.keys.size(), 0);
    const auto all_keys = layout_keys(layout);
    while (true) {
        RuleSet rs;
        rs.layout = layout;
        for (std::size_t i = 0; i < space.keys.size(); ++i) {
            if (choice[i] > 0) rs.rules.push_back(space.keys[i].rules[choice[i] - 1]);
        }
        for (const AttrKey k : all_keys) {
            const bool ruled = std::any_of(rs.rules.begin(), rs.rules.end(),
                                           [&](const Rule& r) { return r.key == k; });
            if (!ruled) rs.free_attributes.push_back(k);
        }
        normalize(rs);
        out.push_back(std::move(rs));

        std::size_t i = 0;
        for (; i < choice.size(); ++i) {
            if (++choice[i] <= space.keys[i].rules.size()) break;
            choice[i] = 0;
        }
        if (i == choice.size()) break;
    }
    return out;
}

Verdict solve(std::span<const Panel, 8> context, std::span<const Panel, 8> answers) {
    const InducedRules space = induce_rule_space(context);
    Verdict verdict;
    for (const auto& h : space.keys) {
        const auto [lo, hi] = std::minmax_element(h.predictions.begin(), h.predictions.end());
        if (*lo != *hi) verdict.rule_conflict = true;
    }
    for (int i = 0; i < 8; ++i) {
        const Panel& candidate = answers[i];
        if (candidate.layout != space.layout) continue;
        bool ok = true;
        for (const auto& h : space.keys) {
            const auto v = attribute_value(candidate, h.key);
            if (!v || std::find(h.predictions.begin(), h.predictions.end(), *v) == h.predictions.end()) {
                ok = false;
                break;
            }
        }
        if (ok) verdict.indices.push_back(i);
    }
    if (verdict.indices.empty()) {
        verdict.kind = Verdict::Kind::NoneConsistent;
    } else if (verdict.indices.size() == 1) {
        verdict.kind = Verdict::Kind::Unique;
    } else {
        verdict.kind = Verdict::Kind::Ambiguous;
    }
    return verdict;
}

Verdict solve(const Problem& problem) { return solve(problem.matrix.context, problem.answers); }

bool is_well_posed(const RavenMatrix& matrix, std::span<const Panel, 8> answers, int correct_index) {
    if (correct_index < 0 || correct_index >= 8) return false;
    if (!(answers[correct_index] == matrix.ground_truth)) return false;
    return solve(matrix.context, answers).is_unique(correct_index);
}

}  // namespace conceptprobe::raven
