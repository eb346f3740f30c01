#pragma once

// Human trial service. Sessions walk a suite (a dataset directory) in
// manifest order; every event is appended to <journal>/<session>.jsonl and
// replayed on startup.
//
//   GET  /api/suites                      [{name, domain, n}]
//   POST /api/session {suite}             {session_id, n}
//   GET  /api/session/{id}/next           {done, problem_id, index, n, domain, payload}
//   POST /api/session/{id}/answer {problem_id, answer}   {accepted, remaining}
//   GET  /api/session/{id}/summary        {n, answered, correct, accuracy, per_concept, human_baseline}
//   GET  /api/session/{id}/summary.csv    model,slice,n,accuracy
//   GET  /api/session/{id}/image/{problem}/sheet.png
//   GET  /api/session/{id}/image/{problem}/candidate/{k}.png
//
// RAVEN answers are candidate indices 0..7; ARC answers are one grid (or a
// list of grids when the task has several test inputs). Accuracy is over
// answered problems. Errors: 400 malformed, 404 unknown session or suite,
// 409 second answer to a problem.

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "conceptprobe/harness/dataset.hpp"
#include "conceptprobe/harness/eval.hpp"
#include "json.hpp"

namespace conceptprobe::harness {

inline constexpr double kHumanBaseline = 0.84;

struct Reply {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";

    nlohmann::json json() const { return nlohmann::json::parse(body); }
};

struct Suite {
    std::string name;
    GeneratedSplit data;
    std::map<std::string, std::size_t> index;  // problem id -> position
};

struct TrialAnswer {
    nlohmann::json answer;
    double score = 0.0;
    std::string time;
};

struct TrialSession {
    std::string id;
    std::string suite;
    std::vector<std::string> problem_ids;
    std::map<std::string, TrialAnswer> answers;
    std::mutex mu;  // serializes answer recording and journal appends
};

class TrialService {
public:
    /// Loads every dataset directory directly under `suites_dir` (or
    /// `suites_dir` itself when it holds a manifest), then replays journals.
    TrialService(const std::filesystem::path& suites_dir, const std::filesystem::path& journal_dir,
                 int image_side = 96);

    std::vector<std::string> suite_names() const;

    Reply suites() const;
    Reply create_session(const std::string& body);
    Reply next(const std::string& session_id);
    Reply answer(const std::string& session_id, const std::string& body);
    Reply summary(const std::string& session_id);
    Reply summary_csv(const std::string& session_id);
    Reply image(const std::string& session_id, const std::string& problem_id, int candidate);  // -1 = sheet

    std::size_t session_count() const;

private:
    std::shared_ptr<TrialSession> find(const std::string& id) const;
    std::vector<ReportRow> slices(TrialSession& s);
    void replay(const std::filesystem::path& journal);
    double score(const Suite& suite, std::size_t index, const nlohmann::json& answer) const;
    std::optional<std::string> check_answer(const Suite& suite, std::size_t index, const nlohmann::json& answer) const;

    std::map<std::string, Suite> suites_;
    std::filesystem::path journal_dir_;
    int image_side_;
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<TrialSession>> sessions_;
};

/// HTTP front end over a TrialService.
class TrialServer {
public:
    explicit TrialServer(TrialService& service, const std::filesystem::path& static_dir = {});
    ~TrialServer();
    TrialServer(const TrialServer&) = delete;
    TrialServer& operator=(const TrialServer&) = delete;

    /// Binds to `port` (0 = any free port) and returns the bound port, or -1.
    int bind(const std::string& host, int port);
    /// Serves until stop(); call after bind().
    void run();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace conceptprobe::harness
