#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "conceptprobe/common/random.hpp"
#include "conceptprobe/raven/types.hpp"

namespace conceptprobe::raven {

struct AnswerSet {
    std::array<Panel, 8> candidates;
    int correct_index = 0;
    AnswerStrategy strategy = AnswerStrategy::FairBisection;
};

/// Keys whose value can be changed on this panel (domain larger than one).
std::vector<AttrKey> perturbable_keys(const Panel& panel);

/// Panel equal to `panel` except that `key` reads `value`. Number edits add
/// or drop random slots; row/column edits keep the entity count when
/// possible. nullopt when no such panel exists.
std::optional<Panel> with_value(const Panel& panel, AttrKey key, int value, Rng& rng);

/// Re-samples one attribute to a different in-domain value.
std::optional<Panel> perturb(const Panel& panel, AttrKey key, Rng& rng);

/// Seven distractors, each the correct panel with exactly one attribute
/// re-sampled. `keys` restricts which attributes may change (empty = all
/// perturbable keys). Throws GenerationExhausted.
AnswerSet gen_biased(const Panel& correct, std::uint64_t seed, std::span<const AttrKey> keys = {});

/// Three-level attribute bisection tree: each level picks an attribute and
/// gives every existing candidate a sibling that differs in it. A level on a
/// fresh attribute assigns all siblings the same new value, so every value
/// of that attribute ends up shared by exactly half of the candidates.
/// Throws GenerationExhausted.
AnswerSet gen_fair(const Panel& correct, std::uint64_t seed, std::span<const AttrKey> keys = {});

AnswerSet generate_answers(AnswerStrategy strategy, const Panel& correct, std::uint64_t seed,
                           std::span<const AttrKey> keys = {});

// ---------------------------------------------------------------------------
// Context-blind attacks
// ---------------------------------------------------------------------------

struct AttackVerdict {
    std::optional<int> chosen_index;  // nullopt = abstain
    std::array<int, 8> score_vector{};
};

/// Per-slot entity attributes (shape, size, color, angle; -1 when the slot
/// is empty) followed by the entity count.
std::vector<int> attack_features(const Panel& panel);

/// Scores each candidate by the number of features on which it takes a
/// modal value (all tied modes count) and returns the argmax, lowest index
/// on ties. Reads nothing but the candidate list.
AttackVerdict majority_vote_attack(std::span<const Panel, 8> candidates);

enum class Attack { MajorityVote };
std::string_view to_string(Attack attack) noexcept;
std::optional<Attack> parse_attack(std::string_view s) noexcept;
AttackVerdict run_attack(Attack attack, std::span<const Panel, 8> candidates);

struct ExploitabilityRow {
    std::string concept_tag;  // "all" for the whole dataset
    std::size_t n = 0;
    std::size_t hits = 0;
    double rate() const { return n == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(n); }
};

struct ExploitabilityReport {
    Attack attack = Attack::MajorityVote;
    std::vector<ExploitabilityRow> rows;  // "all" first, then tags sorted

    double rate() const { return rows.empty() ? 0.0 : rows.front().rate(); }
};

/// Fraction of problems where the attack picks the correct index, with a
/// per-concept breakdown. Throws EmptyDataset.
ExploitabilityReport exploitability(std::span<const Problem> problems, Attack attack);

/// CSV with header "concept_tag,n,attack,rate".
std::string to_csv(const ExploitabilityReport& report);

}  // namespace conceptprobe::raven
