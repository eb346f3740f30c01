#include "conceptprobe/raven/answers.hpp"

#include <algorithm>
#include <bit>
#include <set>

#include "conceptprobe/common/csv.hpp"
#include "conceptprobe/common/error.hpp"

namespace conceptprobe::raven {

namespace {

unsigned lines_of(unsigned mask, int dim, bool rows) {
    unsigned out = 0;
    for (int i = 0; i < dim * dim; ++i) {
        if (mask & (1u << i)) out |= 1u << (rows ? i / dim : i % dim);
    }
    return out;
}

std::size_t group_index(LayoutKind layout, Group group) {
    const auto gs = layout_groups(layout);
    for (std::size_t i = 0; i < gs.size(); ++i) {
        if (gs[i].group == group) return i;
    }
    return 0;
}

bool contains(const std::vector<Panel>& panels, const Panel& p) {
    return std::find(panels.begin(), panels.end(), p) != panels.end();
}

/// Candidate replacement values for `key`, excluding `taken`. Position
/// prefers masks with the same entity count so that only one attribute moves.
std::vector<int> fresh_values(const Panel& panel, AttrKey key, const std::set<int>& taken) {
    std::vector<int> values;
    const auto cur = attribute_value(panel, key);
    for (int v : domain_values(panel.layout, key)) {
        if (!taken.contains(v)) values.push_back(v);
    }
    if (key.attribute == AttributeName::Position && cur) {
        std::vector<int> same;
        for (int v : values) {
            if (std::popcount(static_cast<unsigned>(v)) == std::popcount(static_cast<unsigned>(*cur))) {
                same.push_back(v);
            }
        }
        if (!same.empty()) return same;
    }
    return values;
}

std::array<Panel, 8> place_correct(const Panel& correct, std::vector<Panel> others, int correct_index) {
    std::array<Panel, 8> out;
    std::size_t next = 0;
    for (int i = 0; i < 8; ++i) out[i] = i == correct_index ? correct : others[next++];
    return out;
}

}  // namespace

std::vector<AttrKey> perturbable_keys(const Panel& panel) {
    std::vector<AttrKey> out;
    for (const AttrKey key : layout_keys(panel.layout)) {
        if (domain_values(panel.layout, key).size() > 1 && attribute_value(panel, key)) out.push_back(key);
    }
    return out;
}

std::optional<Panel> with_value(const Panel& panel, AttrKey key, int value, Rng& rng) {
    const LayoutKind layout = panel.layout;
    if (!value_in_domain(layout, key, value)) return std::nullopt;
    auto groups = decompose(panel);
    const auto gs = layout_groups(layout);

    if (key.attribute == AttributeName::InsideOutside) {
        GroupState& outer = groups[group_index(layout, Group::Outer)];
        GroupState& inner = groups[group_index(layout, Group::Inner)];
        if (value == 1) {
            inner.shape = outer.shape;
        } else if (inner.shape == outer.shape) {
            GroupState& changed = rng.coin() ? inner : outer;
            changed.shape = (changed.shape + rng.uniform(1, Domain::kShapes - 1)) % Domain::kShapes;
        }
    } else {
        const std::size_t gi = group_index(layout, key.group);
        GroupState& s = groups[gi];
        const GroupSlots& g = gs[gi];
        const unsigned full = (1u << g.count) - 1u;
        switch (key.attribute) {
            case AttributeName::Shape: s.shape = value; break;
            case AttributeName::Size: s.size = value; break;
            case AttributeName::Color: s.color = value; break;
            case AttributeName::Angle: s.angle = value; break;
            case AttributeName::Number: {
                int n = std::popcount(s.mask);
                while (n < value) {
                    std::vector<int> empty;
                    for (int i = 0; i < g.count; ++i) {
                        if (!(s.mask & (1u << i))) empty.push_back(i);
                    }
                    s.mask |= 1u << rng.pick(empty);
                    ++n;
                }
                while (n > value) {
                    std::vector<int> used;
                    for (int i = 0; i < g.count; ++i) {
                        if (s.mask & (1u << i)) used.push_back(i);
                    }
                    s.mask &= ~(1u << rng.pick(used));
                    --n;
                }
                break;
            }
            case AttributeName::Position: s.mask = static_cast<unsigned>(value); break;
            case AttributeName::Row:
            case AttributeName::Column: {
                const bool rows = key.attribute == AttributeName::Row;
                std::vector<unsigned> same_count;
                std::vector<unsigned> any;
                for (unsigned m = 1; m <= full; ++m) {
                    if (lines_of(m, g.grid_dim, rows) != static_cast<unsigned>(value)) continue;
                    any.push_back(m);
                    if (std::popcount(m) == std::popcount(s.mask)) same_count.push_back(m);
                }
                if (any.empty()) return std::nullopt;
                s.mask = same_count.empty() ? rng.pick(any) : rng.pick(same_count);
                break;
            }
            case AttributeName::InsideOutside: break;
        }
    }
    Panel out = compose(layout, groups);
    if (attribute_value(out, key) != value) return std::nullopt;
    return out;
}

std::optional<Panel> perturb(const Panel& panel, AttrKey key, Rng& rng) {
    const auto cur = attribute_value(panel, key);
    if (!cur) return std::nullopt;
    const auto values = fresh_values(panel, key, {*cur});
    if (values.empty()) return std::nullopt;
    for (int attempt = 0; attempt < 8; ++attempt) {
        auto p = with_value(panel, key, rng.pick(values), rng);
        if (p && !(*p == panel)) return p;
    }
    return std::nullopt;
}

namespace {

std::vector<AttrKey> usable_keys(const Panel& correct, std::span<const AttrKey> keys) {
    const auto all = perturbable_keys(correct);
    if (keys.empty()) return all;
    std::vector<AttrKey> out;
    for (const AttrKey k : keys) {
        if (std::find(all.begin(), all.end(), k) != all.end() &&
            std::find(out.begin(), out.end(), k) == out.end()) {
            out.push_back(k);
        }
    }
    return out;
}

}  // namespace

AnswerSet gen_biased(const Panel& correct, std::uint64_t seed, std::span<const AttrKey> keys) {
    Rng rng(seed);
    const auto allowed = usable_keys(correct, keys);
    if (allowed.empty()) throw GenerationExhausted("biased answers: no attribute can be perturbed");
    std::vector<Panel> distractors;
    for (int attempt = 0; attempt < 2000 && distractors.size() < 7; ++attempt) {
        auto p = perturb(correct, rng.pick(allowed), rng);
        if (p && !(*p == correct) && !contains(distractors, *p)) distractors.push_back(std::move(*p));
    }
    if (distractors.size() < 7) {
        throw GenerationExhausted("biased answers: could not form 7 distinct distractors");
    }
    AnswerSet out;
    out.strategy = AnswerStrategy::BiasedPerturbation;
    out.correct_index = rng.uniform(0, 7);
    out.candidates = place_correct(correct, std::move(distractors), out.correct_index);
    return out;
}

AnswerSet gen_fair(const Panel& correct, std::uint64_t seed, std::span<const AttrKey> keys) {
    Rng rng(seed);
    const auto allowed = usable_keys(correct, keys);
    if (allowed.empty()) throw GenerationExhausted("fair answers: no attribute can be perturbed");

    for (int attempt = 0; attempt < 50; ++attempt) {
        std::vector<Panel> tree = {correct};
        std::vector<AttrKey> used;
        bool ok = true;
        for (int level = 0; level < 3 && ok; ++level) {
            std::vector<AttrKey> unused;
            for (const AttrKey k : allowed) {
                if (std::find(used.begin(), used.end(), k) == used.end()) unused.push_back(k);
            }
            const bool fresh = !unused.empty();
            const AttrKey key = fresh ? rng.pick(unused) : rng.pick(allowed);
            used.push_back(key);

            std::set<int> taken;
            for (const auto& c : tree) {
                if (const auto v = attribute_value(c, key)) taken.insert(*v);
            }
            std::vector<Panel> siblings;
            if (fresh) {
                const auto values = fresh_values(correct, key, taken);
                if (values.empty()) {
                    ok = false;
                    break;
                }
                const int shared = rng.pick(values);
                for (const auto& c : tree) {
                    auto s = with_value(c, key, shared, rng);
                    if (!s) {
                        ok = false;
                        break;
                    }
                    siblings.push_back(std::move(*s));
                }
            } else {
                // prefer values unseen anywhere in the tree; small domains fall back to
                // any value that still yields a new candidate
                for (const auto& c : tree) {
                    auto values = fresh_values(c, key, taken);
                    rng.shuffle(values);
                    const auto cur = attribute_value(c, key);
                    auto fallback = fresh_values(c, key, cur ? std::set<int>{*cur} : std::set<int>{});
                    rng.shuffle(fallback);
                    values.insert(values.end(), fallback.begin(), fallback.end());
                    std::optional<Panel> chosen;
                    for (int v : values) {
                        auto s = with_value(c, key, v, rng);
                        if (s && !contains(tree, *s) && !contains(siblings, *s)) {
                            taken.insert(v);
                            chosen = std::move(s);
                            break;
                        }
                    }
                    if (!chosen) {
                        ok = false;
                        break;
                    }
                    siblings.push_back(std::move(*chosen));
                }
            }
            if (!ok) break;
            for (auto& s : siblings) {
                if (contains(tree, s)) {
                    ok = false;
                    break;
                }
                tree.push_back(std::move(s));
            }
        }
        if (!ok || tree.size() != 8) continue;

        std::vector<Panel> others(tree.begin() + 1, tree.end());
        rng.shuffle(others);
        AnswerSet out;
        out.strategy = AnswerStrategy::FairBisection;
        out.correct_index = rng.uniform(0, 7);
        out.candidates = place_correct(correct, std::move(others), out.correct_index);
        return out;
    }
    throw GenerationExhausted("fair answers: attribute bisection could not produce 8 distinct candidates");
}

AnswerSet generate_answers(AnswerStrategy strategy, const Panel& correct, std::uint64_t seed,
                           std::span<const AttrKey> keys) {
    return strategy == AnswerStrategy::BiasedPerturbation ? gen_biased(correct, seed, keys)
                                                          : gen_fair(correct, seed, keys);
}

std::vector<int> attack_features(const Panel& panel) {
    const int slots = slot_count(panel.layout);
    std::vector<int> f(static_cast<std::size_t>(slots) * 4 + 1, -1);
    for (const auto& e : panel.entities) {
        if (e.slot < 0 || e.slot >= slots) continue;
        const auto base = static_cast<std::size_t>(e.slot) * 4;
        f[base] = static_cast<int>(e.shape);
        f[base + 1] = e.size;
        f[base + 2] = e.color;
        f[base + 3] = e.angle;
    }
    f.back() = static_cast<int>(panel.entities.size());
    return f;
}

AttackVerdict majority_vote_attack(std::span<const Panel, 8> candidates) {
    std::array<std::vector<int>, 8> features;
    std::size_t width = 0;
    for (int i = 0; i < 8; ++i) {
        features[i] = attack_features(candidates[i]);
        width = std::max(width, features[i].size());
    }
    for (auto& f : features) f.resize(width, -1);

    AttackVerdict verdict;
    for (std::size_t k = 0; k < width; ++k) {
        std::array<int, 8> freq{};
        int best = 0;
        for (int i = 0; i < 8; ++i) {
            for (int j = 0; j < 8; ++j) freq[i] += features[i][k] == features[j][k] ? 1 : 0;
            best = std::max(best, freq[i]);
        }
        for (int i = 0; i < 8; ++i) verdict.score_vector[i] += freq[i] == best ? 1 : 0;
    }
    int chosen = 0;
    for (int i = 1; i < 8; ++i) {
        if (verdict.score_vector[i] > verdict.score_vector[chosen]) chosen = i;
    }
    verdict.chosen_index = chosen;
    return verdict;
}

std::string_view to_string(Attack attack) noexcept {
    switch (attack) {
        case Attack::MajorityVote: return "majority-vote";
    }
    return "majority-vote";
}

std::optional<Attack> parse_attack(std::string_view s) noexcept {
    if (s == "majority-vote") return Attack::MajorityVote;
    return std::nullopt;
}

AttackVerdict run_attack(Attack attack, std::span<const Panel, 8> candidates) {
    switch (attack) {
        case Attack::MajorityVote: return majority_vote_attack(candidates);
    }
    return majority_vote_attack(candidates);
}

ExploitabilityReport exploitability(std::span<const Problem> problems, Attack attack) {
    if (problems.empty()) throw EmptyDataset("exploitability: dataset is empty");
    ExploitabilityReport report;
    report.attack = attack;
    ExploitabilityRow all{"all", 0, 0};
    std::map<std::string, ExploitabilityRow> per_tag;
    for (const auto& p : problems) {
        const auto verdict = run_attack(attack, p.answers);
        const bool hit = verdict.chosen_index == p.correct_index;
        ++all.n;
        all.hits += hit ? 1 : 0;
        const std::string tag = p.concept_tags.empty() ? "untagged" : describe(p.concept_tags.front());
        auto& row = per_tag[tag];
        row.concept_tag = tag;
        ++row.n;
        row.hits += hit ? 1 : 0;
    }
    report.rows.push_back(all);
    for (auto& [tag, row] : per_tag) report.rows.push_back(row);
    return report;
}

std::string to_csv(const ExploitabilityReport& report) {
    std::string out = "concept_tag,n,attack,rate\n";
    for (const auto& row : report.rows) {
        out += csv::join({row.concept_tag, std::to_string(row.n), std::string(to_string(report.attack)),
                          csv::format_rate(row.rate())});
        out += '\n';
    }
    return out;
}

}  // namespace conceptprobe::raven
