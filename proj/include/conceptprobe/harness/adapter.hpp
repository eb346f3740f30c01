#pragma once

// Solver adapters. A solver sees one request per problem:
//   {"id": ..., "domain": "raven" | "arc", "payload": {...}}
// and answers with
//   {"id": ..., "answers": [...]}
// RAVEN payload: {"layout", "context": [8 panels], "answers": [8 panels]}
//   or, in image mode, {"image": "<path to sheet .pgm>"}; answers are
//   candidate indices 0..7 and only the first counts.
// ARC payload: the task without test outputs; answers hold one list of up
//   to k guess grids per test input.
// Concept tags, correct indices, seeds and generator rules never appear in
// a request. A response may carry {"id", "error": "..."} to give up on a
// problem; that is scored 0 and counted as a failure.

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "conceptprobe/arc/grid.hpp"
#include "conceptprobe/harness/dataset.hpp"
#include "conceptprobe/raven/types.hpp"
#include "json.hpp"

namespace conceptprobe::harness {

struct Request {
    std::string id;
    DatasetDomain domain = DatasetDomain::Raven;
    nlohmann::json payload;
};

nlohmann::json request_to_json(const Request& r);

/// Leak-free request builders.
Request raven_request(const raven::Problem& problem);
Request raven_image_request(const raven::Problem& problem, const std::filesystem::path& image);
Request arc_request(const arc::Task& task);

/// One request per dataset entry; image mode needs rendered images.
std::vector<Request> dataset_requests(const GeneratedSplit& split, const std::filesystem::path& dir = {},
                                      bool image_mode = false);

enum class OutcomeStatus { Ok, Failed, Timeout };
std::string_view to_string(OutcomeStatus s) noexcept;

struct Outcome {
    OutcomeStatus status = OutcomeStatus::Ok;
    nlohmann::json answers = nlohmann::json::array();
    std::string message;
};

/// Checks a response line against its request and the guess limit. Throws
/// ProtocolViolation carrying the offending line.
Outcome parse_response(const std::string& line, const Request& request, int max_guesses);

class Adapter {
public:
    virtual ~Adapter() = default;
    virtual std::string name() const = 0;
    virtual Outcome solve(const Request& request, int max_guesses) = 0;
    /// Directory-batch adapters answer everything in one call.
    virtual bool batch() const { return false; }
    virtual std::vector<Outcome> solve_all(std::span<const Request> requests, int max_guesses);
};

/// Creates one adapter per evaluation worker.
using AdapterFactory = std::function<std::unique_ptr<Adapter>()>;

// Built-in solvers. They read only the request.
//   oracle     RAVEN: symbolic oracle over the payload panels. ARC: as reference.
//   reference  ARC: every family transform consistent with all train pairs,
//              applied to each test input. RAVEN: as oracle.
//   random     RAVEN: uniform index seeded by the problem id. ARC: random grid
//              of the test input's size.
//   identity   RAVEN: index 0. ARC: the test input.
std::unique_ptr<Adapter> make_builtin(std::string_view name, std::uint64_t seed = 0);
bool is_builtin(std::string_view name) noexcept;

struct SubprocessOptions {
    std::string command;  // run through /bin/sh -c
    std::chrono::milliseconds timeout{60'000};
};

/// Keeps one solver process alive and exchanges one JSON line per problem.
/// A timed-out process is killed and restarted for the next problem. A
/// process that dies before answering is restarted and the problem retried
/// once; a second death throws AdapterCrashed.
std::unique_ptr<Adapter> make_subprocess(const SubprocessOptions& options);

struct DirectoryBatchOptions {
    std::string command;  // run once as: <command> <requests dir> <responses dir>
    std::filesystem::path work_dir;
    std::chrono::milliseconds timeout_per_problem{60'000};
};

/// Writes requests/<n>.json, runs the solver once, then reads
/// responses/<n>.json (same numbering). Missing responses are failures.
std::unique_ptr<Adapter> make_directory_batch(const DirectoryBatchOptions& options);

}  // namespace conceptprobe::harness
