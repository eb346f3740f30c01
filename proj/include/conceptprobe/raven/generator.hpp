#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "conceptprobe/common/random.hpp"
#include "conceptprobe/raven/types.hpp"

namespace conceptprobe::raven {

struct GenerationOptions {
    AnswerStrategy answer_strategy = AnswerStrategy::FairBisection;
    int retry_budget = 1000;  // rejected attempts before GenerationExhausted
};

/// Builds one panel whose listed attributes take the required values; all
/// other attributes are drawn uniformly. nullopt when the requirements
/// cannot be met together.
std::optional<Panel> build_panel(LayoutKind layout, const std::map<AttrKey, int>& required, Rng& rng);

/// The per-row ruleset drawn for a spec: bound attributes get the family's
/// relation, the rest follow the spec's background policy.
RuleSet draw_ruleset(const ConceptSpec& spec, Rng& rng);

/// Deterministic in (spec, seed, options). Rejection-samples until the
/// oracle certifies a unique answer. Throws InvalidSpec or
/// GenerationExhausted.
Problem sample_problem(const ConceptSpec& spec, std::uint64_t seed, const GenerationOptions& options = {});

/// Per-problem seed: derive_seed(master_seed, spec_index, instance_index).
std::uint64_t problem_seed(std::uint64_t master_seed, std::size_t spec_index, std::size_t instance_index);

std::string problem_id(std::string_view prefix, std::size_t spec_index, std::size_t instance_index);

struct Dataset {
    std::uint64_t master_seed = 0;
    std::vector<ConceptSpec> specs;
    std::vector<Problem> problems;  // spec-major order
};

/// n_per_spec problems for every spec, ids "<prefix>-sNNN-NNNNN". Problems
/// are generated on `threads` workers; the result does not depend on it.
/// Throws GenerationExhausted naming the offending spec.
Dataset concept_suite(std::span<const ConceptSpec> specs, std::size_t n_per_spec, std::uint64_t seed,
                      const GenerationOptions& options = {}, std::string_view id_prefix = "raven",
                      unsigned threads = 0);

/// 21 Sameness variations covering all five layouts.
std::vector<ConceptSpec> default_sameness_specs();
/// 8 Progression variations.
std::vector<ConceptSpec> default_progression_specs();
/// Mixed RAVEN-style specs (random background rules) spanning every layout
/// and relation family; used for train/val/test splits.
std::vector<ConceptSpec> standard_specs();

}  // namespace conceptprobe::raven
