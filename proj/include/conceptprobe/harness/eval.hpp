#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "conceptprobe/harness/adapter.hpp"
#include "conceptprobe/harness/dataset.hpp"
#include "json.hpp"

namespace conceptprobe::harness {

struct ReportRow {
    std::string model;
    std::string slice;
    std::size_t n = 0;
    double accuracy = 0.0;

    friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct EvalReport {
    std::vector<ReportRow> rows;
    /// Emission details (timestamp, adapter command, dataset path, counts).
    /// Never part of the rows, so two runs can be compared row for row.
    nlohmann::json metadata = nlohmann::json::object();
};

struct ProblemResult {
    std::string id;
    std::vector<std::string> concept_tags;
    OutcomeStatus status = OutcomeStatus::Ok;
    nlohmann::json answers = nlohmann::json::array();
    double score = 0.0;
    std::string message;
};

nlohmann::json result_to_json(const ProblemResult& r);
ProblemResult result_from_json(const nlohmann::json& j);

struct EvalOptions {
    std::string model = "model";
    int guesses = 0;  // 0 = domain default (1 for RAVEN, 3 for ARC)
    unsigned workers = 1;
    bool image_mode = false;
    std::filesystem::path dataset_dir;  // needed for image mode
    bool overall_slice = true;          // slice named after the split
    bool concept_slices = true;         // one slice per concept (see concept_slice)
    std::ostream* log = nullptr;        // per-problem JSON lines, dataset order
};

struct EvalRun {
    EvalReport report;
    std::vector<ProblemResult> results;  // dataset order
    std::size_t failures = 0;
    std::size_t timeouts = 0;
    std::size_t flagged = 0;  // answered with a note, e.g. the oracle's rule conflicts
};

/// RAVEN: 1 iff the first answer is the correct index. ARC: arc::score.
double score_answers(const GeneratedSplit& split, std::size_t index, const nlohmann::json& answers);

/// Feeds every problem to the adapter (one adapter per worker), scores and
/// aggregates. Throws EmptyDataset, ConfigInvalid (guesses out of the
/// domain's range), AdapterCrashed or ProtocolViolation.
EvalRun run_eval(const GeneratedSplit& split, const AdapterFactory& factory, const EvalOptions& options);

/// Aggregates per-problem results into rows; `overall` names the whole-set slice.
std::vector<ReportRow> aggregate(std::string_view model, std::string_view overall,
                                 std::span<const ProblemResult> results, bool overall_slice = true,
                                 bool concept_slices = true);

/// Re-scores a persisted result log against the dataset and aggregates it.
/// Throws SchemaViolation when the log does not cover the dataset or a
/// logged score disagrees with the recomputed one.
std::vector<ReportRow> audit(const GeneratedSplit& split, std::istream& log, std::string_view model,
                             bool overall_slice = true, bool concept_slices = true);

/// "model,slice,n,accuracy" with 6-decimal accuracies.
std::string report_csv(std::span<const ReportRow> rows);
/// Throws SchemaViolation.
std::vector<ReportRow> parse_report_csv(std::string_view text);

/// Model x slice pivot, slice headers "name (n)", slices and models in
/// order of first appearance, accuracies as percentages.
std::string report_text(std::span<const ReportRow> rows);

}  // namespace conceptprobe::harness
