#include "conceptprobe/raven/generator.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <set>

#include "conceptprobe/common/error.hpp"
#include "conceptprobe/common/parallel.hpp"
#include "conceptprobe/raven/answers.hpp"
#include "conceptprobe/raven/oracle.hpp"
#include "conceptprobe/raven/rules.hpp"

namespace conceptprobe::raven {

namespace {

struct MaskInfo {
    unsigned mask;
    int count;
    int rows;
    int cols;
};

std::vector<MaskInfo> make_table(int count, int dim) {
    std::vector<MaskInfo> out;
    for (unsigned m = 1; m < (1u << count); ++m) {
        MaskInfo info{m, std::popcount(m), 0, 0};
        for (int i = 0; dim > 0 && i < count; ++i) {
            if (m & (1u << i)) {
                info.rows |= 1 << (i / dim);
                info.cols |= 1 << (i % dim);
            }
        }
        out.push_back(info);
    }
    return out;
}

const std::vector<MaskInfo>& mask_table(const GroupSlots& g) {
    static const std::vector<MaskInfo> single = make_table(1, 0);
    static const std::vector<MaskInfo> grid2 = make_table(4, 2);
    static const std::vector<MaskInfo> grid3 = make_table(9, 3);
    if (g.count == 9) return grid3;
    if (g.count == 4) return grid2;
    return single;
}

bool is_structure(AttributeName a) {
    return a == AttributeName::Number || a == AttributeName::Position || a == AttributeName::Row ||
           a == AttributeName::Column;
}

std::optional<int> lookup(const std::map<AttrKey, int>& req, Group g, AttributeName a) {
    const auto it = req.find(AttrKey{g, a});
    if (it == req.end()) return std::nullopt;
    return it->second;
}

Rule random_rule(LayoutKind layout, AttrKey key, Rng& rng) {
    std::vector<Relation> relations;
    for (Relation r : {Relation::Constant, Relation::Progression, Relation::Arithmetic}) {
        if (relation_feasible(layout, key, r)) relations.push_back(r);
    }
    const Relation r = rng.pick(relations);
    if (r == Relation::Constant) return {r, key, 0};
    const auto params = r == Relation::Progression ? default_params(Family::Progression)
                                                   : default_params(Family::Arithmetic);
    return {r, key, rng.pick(params)};
}

bool sample_row(const RuleSet& rs, const std::set<AttrKey>& forced, Rng& rng, std::array<Panel, 3>& out) {
    const LayoutKind layout = rs.layout;
    std::array<std::map<AttrKey, int>, 3> req;
    for (const Rule& rule : rs.rules) {
        const AttrKey k = rule.key;
        if (rule.relation == Relation::Progression) {
            std::vector<int> starts;
            for (int v : domain_values(layout, k)) {
                const auto s1 = progression_step(layout, k, v, rule.param);
                if (s1 && progression_step(layout, k, *s1, rule.param)) starts.push_back(v);
            }
            if (starts.empty()) return false;
            const int v1 = rng.pick(starts);
            const int v2 = *progression_step(layout, k, v1, rule.param);
            req[0][k] = v1;
            req[1][k] = v2;
            req[2][k] = *progression_step(layout, k, v2, rule.param);
        } else if (rule.relation == Relation::Arithmetic) {
            const auto domain = domain_values(layout, k);
            bool found = false;
            for (int t = 0; t < 64 && !found; ++t) {
                const int a = rng.pick(domain);
                const int b = rng.pick(domain);
                if (const auto c = arithmetic_combine(layout, k, a, b, rule.param)) {
                    req[0][k] = a;
                    req[1][k] = b;
                    req[2][k] = *c;
                    found = true;
                }
            }
            if (!found) return false;
        } else if (forced.contains(k)) {
            for (auto& r : req) r[k] = 1;
        }
    }
    auto first = build_panel(layout, req[0], rng);
    if (!first) return false;
    for (const Rule& rule : rs.rules) {
        if (rule.relation != Relation::Constant || forced.contains(rule.key)) continue;
        const auto v = attribute_value(*first, rule.key);
        if (!v) return false;
        req[1][rule.key] = *v;
        req[2][rule.key] = *v;
    }
    auto second = build_panel(layout, req[1], rng);
    if (!second) return false;
    auto third = build_panel(layout, req[2], rng);
    if (!third) return false;
    out = {std::move(*first), std::move(*second), std::move(*third)};
    return check_row(rs, out);
}

}  // namespace

std::optional<Panel> build_panel(LayoutKind layout, const std::map<AttrKey, int>& req, Rng& rng) {
    const auto gs = layout_groups(layout);
    std::vector<GroupState> groups(gs.size());
    for (std::size_t gi = 0; gi < gs.size(); ++gi) {
        const GroupSlots& g = gs[gi];
        GroupState& s = groups[gi];
        const auto value_or = [&](AttributeName a, int count) {
            const auto v = lookup(req, g.group, a);
            return v ? *v : rng.uniform(0, count - 1);
        };
        s.shape = value_or(AttributeName::Shape, Domain::kShapes);
        s.size = value_or(AttributeName::Size, Domain::kSizes);
        s.color = value_or(AttributeName::Color, Domain::kColors);
        s.angle = value_or(AttributeName::Angle, Domain::kAngles);

        const auto number = lookup(req, g.group, AttributeName::Number);
        const auto position = lookup(req, g.group, AttributeName::Position);
        const auto rows = lookup(req, g.group, AttributeName::Row);
        const auto cols = lookup(req, g.group, AttributeName::Column);
        std::vector<const MaskInfo*> candidates;
        for (const auto& m : mask_table(g)) {
            if (number && m.count != *number) continue;
            if (position && static_cast<int>(m.mask) != *position) continue;
            if (rows && m.rows != *rows) continue;
            if (cols && m.cols != *cols) continue;
            candidates.push_back(&m);
        }
        if (candidates.empty()) return std::nullopt;
        if (!number && !position) {
            // uniform over entity counts first, so sparse panels are as likely as dense ones
            std::vector<int> counts;
            for (const auto* m : candidates) counts.push_back(m->count);
            std::sort(counts.begin(), counts.end());
            counts.erase(std::unique(counts.begin(), counts.end()), counts.end());
            const int n = rng.pick(counts);
            std::erase_if(candidates, [n](const MaskInfo* m) { return m->count != n; });
        }
        s.mask = rng.pick(candidates)->mask;
    }

    if (const auto io = lookup(req, Group::All, AttributeName::InsideOutside)) {
        const bool outer_fixed = lookup(req, Group::Outer, AttributeName::Shape).has_value();
        const bool inner_fixed = lookup(req, Group::Inner, AttributeName::Shape).has_value();
        GroupState& outer = groups[0];
        GroupState& inner = groups[1];
        if (*io == 1 && inner.shape != outer.shape) {
            if (!inner_fixed) {
                inner.shape = outer.shape;
            } else if (!outer_fixed) {
                outer.shape = inner.shape;
            } else {
                return std::nullopt;
            }
        } else if (*io == 0 && inner.shape == outer.shape) {
            if (!inner_fixed) {
                inner.shape = (outer.shape + rng.uniform(1, Domain::kShapes - 1)) % Domain::kShapes;
            } else if (!outer_fixed) {
                outer.shape = (inner.shape + rng.uniform(1, Domain::kShapes - 1)) % Domain::kShapes;
            } else {
                return std::nullopt;
            }
        }
    }

    Panel panel = compose(layout, groups);
    for (const auto& [key, value] : req) {
        if (attribute_value(panel, key) != value) return std::nullopt;
    }
    return panel;
}

RuleSet draw_ruleset(const ConceptSpec& spec, Rng& rng) {
    const LayoutKind layout = spec.layout;
    const Relation relation = family_relation(spec.family);
    RuleSet rs;
    rs.layout = layout;
    std::set<AttrKey> bound(spec.bound_attributes.begin(), spec.bound_attributes.end());
    for (const AttrKey k : spec.bound_attributes) {
        rs.rules.push_back({relation, k, relation == Relation::Constant ? 0 : rng.pick(spec.params)});
    }

    std::set<AttrKey> ruled = bound;
    const auto add = [&](const Rule& r) {
        rs.rules.push_back(r);
        ruled.insert(r.key);
    };

    for (const auto& g : layout_groups(layout)) {
        std::vector<AttrKey> structure;
        bool structure_bound = false;
        for (const AttrKey k : layout_keys(layout)) {
            if (k.group != g.group || !is_structure(k.attribute)) continue;
            structure.push_back(k);
            structure_bound = structure_bound || bound.contains(k);
        }
        if (!structure_bound) {
            if (spec.background == Background::Constant) {
                for (const AttrKey k : structure) add({Relation::Constant, k, 0});
            } else if (spec.background == Background::Random) {
                if (g.count == 1) {
                    for (const AttrKey k : structure) add({Relation::Constant, k, 0});
                } else {
                    add(random_rule(layout, rng.pick(structure), rng));
                }
            }
        }
        for (AttributeName a :
             {AttributeName::Shape, AttributeName::Size, AttributeName::Color, AttributeName::Angle}) {
            const AttrKey k{g.group, a};
            if (bound.contains(k)) continue;
            if (spec.background == Background::Constant) {
                add({Relation::Constant, k, 0});
            } else if (spec.background == Background::Random) {
                add(random_rule(layout, k, rng));
            }
        }
    }
    const AttrKey io{Group::All, AttributeName::InsideOutside};
    if (is_out_in(layout) && !bound.contains(io)) {
        if (spec.background == Background::Constant ||
            (spec.background == Background::Random && rng.coin())) {
            add({Relation::Constant, io, 0});
        }
    }
    for (const AttrKey k : layout_keys(layout)) {
        if (!ruled.contains(k)) rs.free_attributes.push_back(k);
    }
    normalize(rs);
    return rs;
}

Problem sample_problem(const ConceptSpec& spec, std::uint64_t seed, const GenerationOptions& options) {
    validate_spec(spec);
    Rng rng(seed);
    std::set<AttrKey> forced;
    if (spec.family == Family::Sameness) {
        for (const AttrKey k : spec.bound_attributes) {
            if (k.attribute == AttributeName::InsideOutside) forced.insert(k);
        }
    }

    for (int attempt = 0; attempt < options.retry_budget; ++attempt) {
        const RuleSet rs = draw_ruleset(spec, rng);
        std::array<Panel, 9> cells;
        bool ok = true;
        for (int r = 0; r < 3 && ok; ++r) {
            std::array<Panel, 3> row;
            ok = false;
            for (int t = 0; t < 20 && !ok; ++t) ok = sample_row(rs, forced, rng, row);
            if (ok) std::copy(row.begin(), row.end(), cells.begin() + r * 3);
        }
        if (!ok) continue;

        std::vector<AttrKey> keys;
        for (const Rule& rule : rs.rules) keys.push_back(rule.key);
        AnswerSet answers;
        try {
            answers = generate_answers(options.answer_strategy, cells[8], rng.next(), keys);
        } catch (const GenerationExhausted&) {
            continue;
        }

        Problem p;
        p.seed = seed;
        p.answer_strategy = options.answer_strategy;
        p.concept_tags = {spec};
        p.matrix.layout = spec.layout;
        std::copy(cells.begin(), cells.begin() + 8, p.matrix.context.begin());
        p.matrix.ground_truth = cells[8];
        p.matrix.ruleset = rs;
        p.answers = answers.candidates;
        p.correct_index = answers.correct_index;
        if (!solve(p).is_unique(p.correct_index)) continue;
        char id[32];
        std::snprintf(id, sizeof id, "raven-%016llx", static_cast<unsigned long long>(seed));
        p.id = id;
        return p;
    }
    throw GenerationExhausted(describe(spec) + ": no well-posed problem after " +
                              std::to_string(options.retry_budget) + " attempts");
}

std::uint64_t problem_seed(std::uint64_t master_seed, std::size_t spec_index, std::size_t instance_index) {
    return derive_seed(master_seed, spec_index, instance_index);
}

std::string problem_id(std::string_view prefix, std::size_t spec_index, std::size_t instance_index) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "-s%03zu-%05zu", spec_index, instance_index);
    return std::string(prefix) + buf;
}

Dataset concept_suite(std::span<const ConceptSpec> specs, std::size_t n_per_spec, std::uint64_t seed,
                      const GenerationOptions& options, std::string_view id_prefix, unsigned threads) {
    if (n_per_spec == 0) throw InvalidSpec("concept_suite: n_per_spec must be at least 1");
    for (const auto& s : specs) validate_spec(s);
    Dataset ds;
    ds.master_seed = seed;
    ds.specs.assign(specs.begin(), specs.end());
    ds.problems.resize(specs.size() * n_per_spec);
    parallel_for(ds.problems.size(), threads, [&](std::size_t i) {
        const std::size_t s = i / n_per_spec;
        const std::size_t k = i % n_per_spec;
        Problem p = sample_problem(specs[s], problem_seed(seed, s, k), options);
        p.id = problem_id(id_prefix, s, k);
        ds.problems[i] = std::move(p);
    });
    return ds;
}

std::vector<ConceptSpec> default_sameness_specs() {
    using A = AttributeName;
    const auto all = [](A a) { return AttrKey{Group::All, a}; };
    const auto outer = [](A a) { return AttrKey{Group::Outer, a}; };
    const auto inner = [](A a) { return AttrKey{Group::Inner, a}; };
    const AttrKey io{Group::All, A::InsideOutside};
    const auto S = [](std::vector<AttrKey> keys, LayoutKind layout) {
        return make_spec(Family::Sameness, std::move(keys), layout);
    };
    return {
        S({all(A::Shape), all(A::Size), all(A::Color), all(A::Number), all(A::Angle)}, LayoutKind::Center),
        S({all(A::Color)}, LayoutKind::Center),
        S({all(A::Size), all(A::Shape)}, LayoutKind::Center),
        S({all(A::Angle)}, LayoutKind::Center),
        S({all(A::Shape), all(A::Color)}, LayoutKind::Center),
        S({all(A::Size), all(A::Angle)}, LayoutKind::Center),
        S({all(A::Number), all(A::Shape)}, LayoutKind::Grid2x2),
        S({all(A::Color)}, LayoutKind::Grid2x2),
        S({all(A::Position)}, LayoutKind::Grid2x2),
        S({all(A::Size), all(A::Number)}, LayoutKind::Grid2x2),
        S({all(A::Row), all(A::Color)}, LayoutKind::Grid2x2),
        S({all(A::Number)}, LayoutKind::Grid3x3),
        S({all(A::Position)}, LayoutKind::Grid3x3),
        S({all(A::Row)}, LayoutKind::Grid3x3),
        S({all(A::Column)}, LayoutKind::Grid3x3),
        S({all(A::Shape), all(A::Size)}, LayoutKind::Grid3x3),
        S({io, outer(A::Size)}, LayoutKind::OutInCenter),
        S({outer(A::Color), inner(A::Color)}, LayoutKind::OutInCenter),
        S({inner(A::Shape), outer(A::Angle)}, LayoutKind::OutInCenter),
        S({inner(A::Number), outer(A::Shape)}, LayoutKind::OutInGrid),
        S({io, inner(A::Color)}, LayoutKind::OutInGrid),
    };
}

std::vector<ConceptSpec> default_progression_specs() {
    using A = AttributeName;
    const auto P = [](AttrKey key, LayoutKind layout) { return make_spec(Family::Progression, {key}, layout); };
    return {
        P({Group::All, A::Shape}, LayoutKind::Center),
        P({Group::All, A::Shape}, LayoutKind::Grid2x2),
        P({Group::Outer, A::Size}, LayoutKind::OutInCenter),
        P({Group::All, A::Number}, LayoutKind::Grid3x3),
        P({Group::All, A::Size}, LayoutKind::Center),
        P({Group::All, A::Color}, LayoutKind::Grid2x2),
        P({Group::All, A::Row}, LayoutKind::Grid3x3),
        P({Group::Inner, A::Number}, LayoutKind::OutInGrid),
    };
}

std::vector<ConceptSpec> standard_specs() {
    using A = AttributeName;
    std::vector<ConceptSpec> out;
    const auto add = [&](Family f, AttrKey key, LayoutKind layout) {
        ConceptSpec s = make_spec(f, {key}, layout);
        s.background = Background::Random;
        out.push_back(std::move(s));
    };
    for (LayoutKind layout : kAllLayouts) {
        const Group g = is_out_in(layout) ? Group::Inner : Group::All;
        const Group o = is_out_in(layout) ? Group::Outer : Group::All;
        add(Family::Sameness, {o, A::Color}, layout);
        add(Family::Progression, {g, A::Size}, layout);
        add(Family::Arithmetic, {g, A::Color}, layout);
        if (layout == LayoutKind::Grid2x2 || layout == LayoutKind::Grid3x3 || layout == LayoutKind::OutInGrid) {
            add(Family::Progression, {g, A::Number}, layout);
            add(Family::Arithmetic, {g, A::Position}, layout);
        }
    }
    return out;
}

}  // namespace conceptprobe::raven
