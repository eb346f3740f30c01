#include "conceptprobe/harness/trial.hpp"

#include <atomic>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <random>

#include "conceptprobe/common/error.hpp"
#include "conceptprobe/harness/adapter.hpp"
#include "conceptprobe/raven/render.hpp"
#include "httplib.h"

namespace conceptprobe::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

Reply json_reply(int status, const json& body) { return {status, body.dump(), "application/json"}; }
Reply error_reply(int status, const std::string& what) { return json_reply(status, {{"error", what}}); }

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string new_session_id() {
    static std::mutex mu;
    static std::random_device rd;
    std::lock_guard lock(mu);
    std::string id;
    char buf[9];
    for (int i = 0; i < 4; ++i) {
        std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(rd()));
        id += buf;
    }
    return id;
}

void append_line(const fs::path& path, const json& event) {
    std::ofstream out(path, std::ios::app | std::ios::binary);
    out << event.dump() << '\n';
    out.flush();
    if (!out) throw std::runtime_error("cannot append to journal " + path.string());
}

bool is_grid_json(const json& j) {
    return j.is_array() && !j.empty() && j.front().is_array() && (j.front().empty() || j.front().front().is_number());
}

}  // namespace

TrialService::TrialService(const fs::path& suites_dir, const fs::path& journal_dir, int image_side)
    : journal_dir_(journal_dir), image_side_(image_side) {
    raven::sheet_geometry(image_side);  // rejects unsupported sizes early
    const auto add = [&](const fs::path& dir) {
        Suite s;
        s.name = (dir.filename().empty() ? dir.parent_path() : dir).filename().string();
        s.data = load_dataset(dir);
        for (std::size_t i = 0; i < s.data.manifest.entries.size(); ++i) s.index[s.data.manifest.entries[i].id] = i;
        suites_.emplace(s.name, std::move(s));
    };
    if (fs::exists(suites_dir / "manifest.json")) {
        add(fs::absolute(suites_dir).lexically_normal());
    } else if (fs::is_directory(suites_dir)) {
        for (const auto& e : fs::directory_iterator(suites_dir)) {
            if (e.is_directory() && fs::exists(e.path() / "manifest.json")) add(e.path());
        }
    }
    if (suites_.empty()) throw ConfigInvalid("no suites (dataset directories) under " + suites_dir.string());
    fs::create_directories(journal_dir_);
    std::vector<fs::path> journals;
    for (const auto& e : fs::directory_iterator(journal_dir_)) {
        if (e.is_regular_file() && e.path().extension() == ".jsonl") journals.push_back(e.path());
    }
    std::sort(journals.begin(), journals.end());
    for (const auto& j : journals) replay(j);
}

std::vector<std::string> TrialService::suite_names() const {
    std::vector<std::string> out;
    for (const auto& [name, s] : suites_) out.push_back(name);
    return out;
}

std::size_t TrialService::session_count() const {
    std::lock_guard lock(mu_);
    return sessions_.size();
}

std::shared_ptr<TrialSession> TrialService::find(const std::string& id) const {
    std::lock_guard lock(mu_);
    const auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

std::optional<std::string> TrialService::check_answer(const Suite& suite, std::size_t index,
                                                      const json& answer) const {
    if (suite.data.manifest.domain == DatasetDomain::Raven) {
        if (!answer.is_number_integer() || answer.get<long long>() < 0 || answer.get<long long>() > 7)
            return "answer must be a candidate index 0..7";
        return std::nullopt;
    }
    const std::size_t tests = suite.data.arc[index].test.size();
    const auto check_grid = [](const json& g) -> std::optional<std::string> {
        try {
            if (!is_grid_json(g)) return "answer must be a grid (array of rows)";
            arc::make_grid(g.get<std::vector<std::vector<int>>>());
        } catch (const ValueOutOfRange& e) {
            return std::string("invalid grid: ") + e.what();
        } catch (const json::exception&) {
            return "grid cells must be integers";
        }
        return std::nullopt;
    };
    if (tests == 1 && is_grid_json(answer)) return check_grid(answer);
    if (!answer.is_array() || answer.size() != tests)
        return "answer must be a grid per test input (" + std::to_string(tests) + ")";
    for (const auto& g : answer) {
        if (auto why = check_grid(g)) return why;
    }
    return std::nullopt;
}

double TrialService::score(const Suite& suite, std::size_t index, const json& answer) const {
    if (suite.data.manifest.domain == DatasetDomain::Raven) return score_answers(suite.data, index, json::array({answer}));
    json per_test = json::array();
    if (suite.data.arc[index].test.size() == 1 && is_grid_json(answer)) {
        per_test.push_back(json::array({answer}));
    } else {
        for (const auto& g : answer) per_test.push_back(json::array({g}));
    }
    // One attempt per test input; a task counts only when every test is solved.
    return score_answers(suite.data, index, per_test) == 1.0 ? 1.0 : 0.0;
}

void TrialService::replay(const fs::path& journal) {
    std::ifstream in(journal);
    std::string line;
    std::shared_ptr<TrialSession> s;
    const Suite* suite = nullptr;
    while (std::getline(in, line)) {
        json ev;
        try {
            ev = json::parse(line);
        } catch (const json::parse_error&) {
            continue;  // a torn final line from an interrupted write
        }
        if (!ev.is_object()) continue;
        const std::string kind = ev.value("event", "");
        if (kind == "session" && !s) {
            const auto it = suites_.find(ev.value("suite", ""));
            if (it == suites_.end()) {
                std::cerr << "journal " << journal << ": suite '" << ev.value("suite", "") << "' not loaded, skipped\n";
                return;
            }
            suite = &it->second;
            s = std::make_shared<TrialSession>();
            s->id = ev.value("session_id", journal.stem().string());
            s->suite = suite->name;
            s->problem_ids = ev.value("problem_ids", std::vector<std::string>{});
        } else if (kind == "answer" && s) {
            const std::string pid = ev.value("problem_id", "");
            const auto it = suite->index.find(pid);
            if (it == suite->index.end() || s->answers.count(pid) || !ev.contains("answer")) continue;
            if (check_answer(*suite, it->second, ev["answer"])) continue;
            s->answers[pid] = {ev["answer"], score(*suite, it->second, ev["answer"]), ev.value("time", "")};
        }
    }
    if (s) {
        std::lock_guard lock(mu_);
        sessions_[s->id] = s;
    }
}

Reply TrialService::suites() const {
    json out = json::array();
    for (const auto& [name, s] : suites_) {
        out.push_back({{"name", name}, {"domain", to_string(s.data.manifest.domain)}, {"n", s.data.manifest.entries.size()}});
    }
    return json_reply(200, out);
}

Reply TrialService::create_session(const std::string& body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::parse_error&) {
        return error_reply(400, "body must be JSON");
    }
    if (!j.is_object() || !j.contains("suite") || !j["suite"].is_string()) return error_reply(400, "expected {\"suite\": name}");
    const auto it = suites_.find(j["suite"].get<std::string>());
    if (it == suites_.end()) return error_reply(404, "unknown suite '" + j["suite"].get<std::string>() + "'");

    auto s = std::make_shared<TrialSession>();
    s->id = new_session_id();
    s->suite = it->first;
    for (const auto& e : it->second.data.manifest.entries) s->problem_ids.push_back(e.id);
    append_line(journal_dir_ / (s->id + ".jsonl"), {{"event", "session"},
                                                     {"session_id", s->id},
                                                     {"suite", s->suite},
                                                     {"problem_ids", s->problem_ids},
                                                     {"time", utc_now()}});
    {
        std::lock_guard lock(mu_);
        sessions_[s->id] = s;
    }
    return json_reply(201, {{"session_id", s->id}, {"n", s->problem_ids.size()}});
}

Reply TrialService::next(const std::string& session_id) {
    const auto s = find(session_id);
    if (!s) return error_reply(404, "unknown session");
    std::lock_guard lock(s->mu);
    const Suite& suite = suites_.at(s->suite);
    for (std::size_t i = 0; i < s->problem_ids.size(); ++i) {
        const std::string& pid = s->problem_ids[i];
        if (s->answers.count(pid)) continue;
        const std::size_t idx = suite.index.at(pid);
        json payload;
        if (suite.data.manifest.domain == DatasetDomain::Raven) {
            const std::string base = "/api/session/" + s->id + "/image/" + pid;
            json candidates = json::array();
            for (int k = 0; k < 8; ++k) candidates.push_back(base + "/candidate/" + std::to_string(k) + ".png");
            payload = {{"sheet", base + "/sheet.png"}, {"candidates", candidates}};
        } else {
            payload = arc_request(suite.data.arc[idx]).payload;
        }
        return json_reply(200, {{"done", false},
                                {"problem_id", pid},
                                {"index", i},
                                {"n", s->problem_ids.size()},
                                {"domain", to_string(suite.data.manifest.domain)},
                                {"payload", payload}});
    }
    return json_reply(200, {{"done", true}, {"n", s->problem_ids.size()}});
}

Reply TrialService::answer(const std::string& session_id, const std::string& body) {
    const auto s = find(session_id);
    if (!s) return error_reply(404, "unknown session");
    json j;
    try {
        j = json::parse(body);
    } catch (const json::parse_error&) {
        return error_reply(400, "body must be JSON");
    }
    if (!j.is_object() || !j.contains("problem_id") || !j["problem_id"].is_string() || !j.contains("answer"))
        return error_reply(400, "expected {\"problem_id\": id, \"answer\": ...}");
    const std::string pid = j["problem_id"].get<std::string>();
    std::lock_guard lock(s->mu);
    const Suite& suite = suites_.at(s->suite);
    if (std::find(s->problem_ids.begin(), s->problem_ids.end(), pid) == s->problem_ids.end())
        return error_reply(400, "problem '" + pid + "' is not part of this session");
    if (s->answers.count(pid)) return error_reply(409, "problem '" + pid + "' was already answered");
    const std::size_t idx = suite.index.at(pid);
    if (auto why = check_answer(suite, idx, j["answer"])) return error_reply(400, *why);

    TrialAnswer a{j["answer"], score(suite, idx, j["answer"]), utc_now()};
    append_line(journal_dir_ / (s->id + ".jsonl"),
                {{"event", "answer"}, {"problem_id", pid}, {"answer", a.answer}, {"time", a.time}});
    s->answers[pid] = std::move(a);
    return json_reply(200, {{"accepted", true}, {"remaining", s->problem_ids.size() - s->answers.size()}});
}

std::vector<ReportRow> TrialService::slices(TrialSession& s) {
    const Suite& suite = suites_.at(s.suite);
    std::vector<ProblemResult> results;
    for (const auto& pid : s.problem_ids) {
        const auto it = s.answers.find(pid);
        if (it == s.answers.end()) continue;
        ProblemResult r;
        r.id = pid;
        r.concept_tags = suite.data.manifest.entries[suite.index.at(pid)].concept_tags;
        r.score = it->second.score;
        results.push_back(std::move(r));
    }
    return aggregate("human:" + s.id, s.suite, results);
}

Reply TrialService::summary(const std::string& session_id) {
    const auto s = find(session_id);
    if (!s) return error_reply(404, "unknown session");
    std::lock_guard lock(s->mu);
    const auto rows = slices(*s);
    double correct = 0;
    for (const auto& [pid, a] : s->answers) correct += a.score;
    const std::size_t answered = s->answers.size();
    json per_concept = json::object();
    for (const auto& r : rows) {
        if (r.slice == s->suite) continue;
        per_concept[r.slice] = {{"n", r.n}, {"correct", std::round(r.accuracy * static_cast<double>(r.n))}, {"accuracy", r.accuracy}};
    }
    return json_reply(200, {{"session_id", s->id},
                            {"suite", s->suite},
                            {"n", s->problem_ids.size()},
                            {"answered", answered},
                            {"correct", correct},
                            {"accuracy", answered == 0 ? 0.0 : correct / static_cast<double>(answered)},
                            {"complete", answered == s->problem_ids.size()},
                            {"per_concept", per_concept},
                            {"human_baseline", {{"accuracy", kHumanBaseline}, {"label", "reference human accuracy (84%)"}}}});
}

Reply TrialService::summary_csv(const std::string& session_id) {
    const auto s = find(session_id);
    if (!s) return error_reply(404, "unknown session");
    std::lock_guard lock(s->mu);
    return {200, report_csv(slices(*s)), "text/csv"};
}

Reply TrialService::image(const std::string& session_id, const std::string& problem_id, int candidate) {
    const auto s = find(session_id);
    if (!s) return error_reply(404, "unknown session");
    const Suite& suite = suites_.at(s->suite);
    if (suite.data.manifest.domain != DatasetDomain::Raven) return error_reply(404, "ARC problems have no images");
    if (std::find(s->problem_ids.begin(), s->problem_ids.end(), problem_id) == s->problem_ids.end())
        return error_reply(404, "unknown problem");
    if (candidate < -1 || candidate > 7) return error_reply(404, "candidate must be 0..7");
    const raven::Problem& p = suite.data.raven[suite.index.at(problem_id)];
    const raven::Bitmap bmp = candidate < 0 ? raven::render_problem(p, image_side_)
                                            : raven::render_panel(p.answers[candidate], image_side_);
    return {200, raven::encode_png(bmp), "image/png"};
}

// ---------------------------------------------------------------------------
// HTTP
// ---------------------------------------------------------------------------

struct TrialServer::Impl {
    explicit Impl(TrialService& s) : service(s) {}
    TrialService& service;
    httplib::Server server;
};

TrialServer::TrialServer(TrialService& service, const fs::path& static_dir)
    : impl_(std::make_unique<Impl>(service)) {
    auto& srv = impl_->server;
    auto& svc = impl_->service;
    const auto send = [](httplib::Response& res, const Reply& r) {
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    };
    srv.Get("/api/suites", [&svc, send](const httplib::Request&, httplib::Response& res) { send(res, svc.suites()); });
    srv.Post("/api/session", [&svc, send](const httplib::Request& req, httplib::Response& res) {
        send(res, svc.create_session(req.body));
    });
    srv.Get(R"(/api/session/([^/]+)/next)", [&svc, send](const httplib::Request& req, httplib::Response& res) {
        send(res, svc.next(req.matches[1]));
    });
    srv.Post(R"(/api/session/([^/]+)/answer)", [&svc, send](const httplib::Request& req, httplib::Response& res) {
        send(res, svc.answer(req.matches[1], req.body));
    });
    srv.Get(R"(/api/session/([^/]+)/summary)", [&svc, send](const httplib::Request& req, httplib::Response& res) {
        send(res, svc.summary(req.matches[1]));
    });
    srv.Get(R"(/api/session/([^/]+)/summary\.csv)", [&svc, send](const httplib::Request& req, httplib::Response& res) {
        send(res, svc.summary_csv(req.matches[1]));
    });
    srv.Get(R"(/api/session/([^/]+)/image/([^/]+)/sheet\.png)",
            [&svc, send](const httplib::Request& req, httplib::Response& res) {
                send(res, svc.image(req.matches[1], req.matches[2], -1));
            });
    srv.Get(R"(/api/session/([^/]+)/image/([^/]+)/candidate/([0-9])\.png)",
            [&svc, send](const httplib::Request& req, httplib::Response& res) {
                send(res, svc.image(req.matches[1], req.matches[2], std::stoi(req.matches[3])));
            });
    if (!static_dir.empty()) srv.set_mount_point("/", static_dir.string());
}

TrialServer::~TrialServer() { stop(); }

int TrialServer::bind(const std::string& host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

void TrialServer::run() { impl_->server.listen_after_bind(); }
void TrialServer::stop() { impl_->server.stop(); }
void TrialServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace conceptprobe::harness
