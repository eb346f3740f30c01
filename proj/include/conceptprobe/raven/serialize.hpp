#pragma once

// Problem JSON.
//
//   {"version":1, "id", "layout", "context":[8 panels], "answers":[8 panels],
//    "correct_index", "concept_tags":[descriptor...], "seed",
//    "answer_strategy", "rules":{"rules":[{relation,attribute,param}], "free":[key...]}}
//
// A panel is {"slots":[{"slot","shape","size","color","angle"}]} with the angle
// in degrees. "answer_strategy" and "rules" are optional on input.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "conceptprobe/raven/types.hpp"
#include "json.hpp"

namespace conceptprobe::raven {

inline constexpr int kProblemFormatVersion = 1;

nlohmann::json panel_to_json(const Panel& panel);
nlohmann::json problem_to_json(const Problem& problem);

/// Throws SchemaViolation whose path is a JSON pointer to the bad field.
Panel panel_from_json(const nlohmann::json& j, LayoutKind layout, const std::string& path = "");
Problem problem_from_json(const nlohmann::json& j);

/// One line, no trailing newline.
std::string write_problem(const Problem& problem);
Problem read_problem(std::string_view text);

/// JSON-lines: one problem per line.
void write_problems_jsonl(std::ostream& out, std::span<const Problem> problems);
std::vector<Problem> read_problems_jsonl(std::istream& in);

}  // namespace conceptprobe::raven
