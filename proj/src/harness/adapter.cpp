#include "conceptprobe/harness/adapter.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>

#include "conceptprobe/arc/concepts.hpp"
#include "conceptprobe/common/error.hpp"
#include "conceptprobe/common/random.hpp"
#include "conceptprobe/raven/oracle.hpp"
#include "conceptprobe/raven/serialize.hpp"

namespace conceptprobe::harness {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

// ---------------------------------------------------------------------------
// Requests and responses
// ---------------------------------------------------------------------------

json request_to_json(const Request& r) {
    return {{"id", r.id}, {"domain", to_string(r.domain)}, {"payload", r.payload}};
}

Request raven_request(const raven::Problem& problem) {
    json context = json::array();
    json answers = json::array();
    for (const auto& p : problem.matrix.context) context.push_back(raven::panel_to_json(p));
    for (const auto& p : problem.answers) answers.push_back(raven::panel_to_json(p));
    return {problem.id, DatasetDomain::Raven,
            {{"layout", raven::to_string(problem.matrix.layout)}, {"context", context}, {"answers", answers}}};
}

Request raven_image_request(const raven::Problem& problem, const fs::path& image) {
    return {problem.id, DatasetDomain::Raven, {{"image", fs::absolute(image).string()}}};
}

Request arc_request(const arc::Task& task) {
    arc::Task blind = task;
    blind.concept_tag.reset();
    for (auto& p : blind.test) p.output = arc::Grid{};
    return {task.id, DatasetDomain::Arc, arc::task_to_json(blind, false)};
}

std::vector<Request> dataset_requests(const GeneratedSplit& split, const fs::path& dir, bool image_mode) {
    std::vector<Request> out;
    const auto& entries = split.manifest.entries;
    if (split.manifest.domain == DatasetDomain::Raven) {
        if (image_mode && split.manifest.render_side == 0)
            throw ConfigInvalid("image mode needs a dataset rendered with \"render\" > 0");
        for (std::size_t i = 0; i < split.raven.size(); ++i) {
            out.push_back(image_mode ? raven_image_request(split.raven[i], dir / "images" / (entries[i].id + ".pgm"))
                                     : raven_request(split.raven[i]));
        }
    } else {
        for (const auto& t : split.arc) out.push_back(arc_request(t));
    }
    return out;
}

std::string_view to_string(OutcomeStatus s) noexcept {
    switch (s) {
        case OutcomeStatus::Ok: return "ok";
        case OutcomeStatus::Failed: return "failed";
        case OutcomeStatus::Timeout: return "timeout";
    }
    return "?";
}

namespace {

[[noreturn]] void violation(const std::string& line, const std::string& why) {
    std::string shown = line.size() > 400 ? line.substr(0, 400) + "..." : line;
    throw ProtocolViolation(why + "; offending line: " + shown);
}

arc::Grid grid_from_json(const json& j) {
    if (!j.is_array()) throw ValueOutOfRange("grid must be an array of rows");
    std::vector<std::vector<int>> rows;
    for (const auto& row : j) {
        if (!row.is_array()) throw ValueOutOfRange("grid row must be an array");
        auto& r = rows.emplace_back();
        for (const auto& v : row) {
            if (!v.is_number_integer()) throw ValueOutOfRange("grid cell must be an integer");
            r.push_back(v.get<int>());
        }
    }
    return arc::make_grid(rows);
}

}  // namespace

Outcome parse_response(const std::string& line, const Request& request, int max_guesses) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error&) {
        violation(line, "response is not JSON");
    }
    if (!j.is_object()) violation(line, "response must be an object");
    if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>() != request.id)
        violation(line, "response id does not match request '" + request.id + "'");
    Outcome out;
    if (j.contains("error")) {
        out.status = OutcomeStatus::Failed;
        out.answers = json::array();
        out.message = j["error"].is_string() ? j["error"].get<std::string>() : j["error"].dump();
        return out;
    }
    if (!j.contains("answers") || !j["answers"].is_array()) violation(line, "response needs an \"answers\" array");
    const json& answers = j["answers"];
    if (request.domain == DatasetDomain::Raven) {
        if (static_cast<int>(answers.size()) > max_guesses)
            violation(line, "more than " + std::to_string(max_guesses) + " answers");
        for (const auto& a : answers) {
            if (!a.is_number_integer() || a.get<int>() < 0 || a.get<int>() > 7)
                violation(line, "RAVEN answers must be candidate indices 0..7");
        }
    } else {
        const std::size_t tests = request.payload.at("test").size();
        if (answers.size() > tests) violation(line, "more guess lists than test inputs");
        for (const auto& guesses : answers) {
            if (!guesses.is_array()) violation(line, "ARC answers must be one list of grids per test input");
            if (static_cast<int>(guesses.size()) > max_guesses)
                violation(line, "more than " + std::to_string(max_guesses) + " guesses for one test input");
            for (const auto& g : guesses) {
                try {
                    grid_from_json(g);
                } catch (const ValueOutOfRange& e) {
                    violation(line, std::string("invalid grid: ") + e.what());
                }
            }
        }
    }
    out.answers = answers;
    if (j.contains("note") && j["note"].is_string()) out.message = j["note"].get<std::string>();
    if (answers.empty()) {
        out.status = OutcomeStatus::Failed;
        out.message = "no answers";
    }
    return out;
}

std::vector<Outcome> Adapter::solve_all(std::span<const Request> requests, int max_guesses) {
    std::vector<Outcome> out;
    out.reserve(requests.size());
    for (const auto& r : requests) out.push_back(solve(r, max_guesses));
    return out;
}

// ---------------------------------------------------------------------------
// Built-ins
// ---------------------------------------------------------------------------

namespace {

std::uint64_t id_hash(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) h = (h ^ ch) * 0x100000001b3ULL;
    return h;
}

json grid_json(const arc::Grid& g) { return arc::to_rows(g); }

Outcome failed(std::string why) { return {OutcomeStatus::Failed, json::array(), std::move(why)}; }

Outcome raven_oracle(const Request& r) {
    const json& p = r.payload;
    if (!p.contains("context")) return failed("symbolic payload required");
    const auto layout = raven::parse_layout(p.at("layout").get<std::string>());
    if (!layout) return failed("unknown layout");
    std::array<raven::Panel, 8> context, answers;
    for (int i = 0; i < 8; ++i) {
        context[i] = raven::panel_from_json(p.at("context").at(i), *layout);
        answers[i] = raven::panel_from_json(p.at("answers").at(i), *layout);
    }
    const auto verdict = raven::solve(context, answers);
    if (verdict.indices.empty()) return failed("no consistent candidate");
    // Several rules fit some key and disagree; the answer rests on the maximal rule set.
    std::string note;
    if (verdict.rule_conflict || verdict.kind == raven::Verdict::Kind::Ambiguous) note = "rule conflict";
    return {OutcomeStatus::Ok, json::array({verdict.indices.front()}), note};
}

Outcome arc_reference(const Request& r, int max_guesses) {
    const arc::Task task = arc::task_from_json(r.payload, r.id);
    std::vector<arc::Family> consistent;
    for (arc::Family f : arc::kAllFamilies) {
        bool ok = true;
        for (const auto& pair : task.train) {
            try {
                ok = arc::reference_transform(f, pair.input) == pair.output;
            } catch (const Error&) {
                ok = false;
            }
            if (!ok) break;
        }
        if (ok) consistent.push_back(f);
    }
    json answers = json::array();
    for (const auto& pair : task.test) {
        std::vector<arc::Grid> guesses;
        for (arc::Family f : consistent) {
            if (static_cast<int>(guesses.size()) >= max_guesses) break;
            try {
                arc::Grid g = arc::reference_transform(f, pair.input);
                if (std::find(guesses.begin(), guesses.end(), g) == guesses.end()) guesses.push_back(std::move(g));
            } catch (const Error&) {
            }
        }
        json list = json::array();
        for (const auto& g : guesses) list.push_back(grid_json(g));
        answers.push_back(std::move(list));
    }
    return {OutcomeStatus::Ok, std::move(answers), consistent.empty() ? "no family fits" : ""};
}

class Builtin final : public Adapter {
public:
    Builtin(std::string name, std::uint64_t seed) : name_(std::move(name)), seed_(seed) {}
    std::string name() const override { return name_; }

    Outcome solve(const Request& r, int max_guesses) override {
        if (max_guesses < 1) return failed("no guesses allowed");
        const bool raven = r.domain == DatasetDomain::Raven;
        if (name_ == "oracle" || name_ == "reference") return raven ? raven_oracle(r) : arc_reference(r, max_guesses);
        Rng rng(derive_seed(seed_, id_hash(r.id)));
        if (raven) return {OutcomeStatus::Ok, json::array({name_ == "random" ? static_cast<int>(rng.index(8)) : 0}), ""};
        json answers = json::array();
        for (const auto& t : r.payload.at("test")) {
            arc::Grid g = grid_from_json(t.at("input"));
            if (name_ == "random") {
                for (auto& c : g.cells) c = static_cast<std::uint8_t>(rng.index(arc::kColors));
            }
            answers.push_back(json::array({grid_json(g)}));
        }
        return {OutcomeStatus::Ok, std::move(answers), ""};
    }

private:
    std::string name_;
    std::uint64_t seed_;
};

}  // namespace

bool is_builtin(std::string_view name) noexcept {
    return name == "oracle" || name == "reference" || name == "random" || name == "identity";
}

std::unique_ptr<Adapter> make_builtin(std::string_view name, std::uint64_t seed) {
    if (!is_builtin(name)) throw ConfigInvalid("unknown built-in adapter '" + std::string(name) + "'");
    return std::make_unique<Builtin>(std::string(name), seed);
}

// ---------------------------------------------------------------------------
// Processes
// ---------------------------------------------------------------------------

namespace {

void ignore_sigpipe() {
    static std::once_flag once;
    std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

struct Child {
    pid_t pid = -1;
    int in = -1;   // our end of the child's stdin
    int out = -1;  // our end of the child's stdout
    std::string buffer;

    bool alive() const { return pid > 0; }

    void stop() {
        if (in >= 0) ::close(in);
        if (out >= 0) ::close(out);
        in = out = -1;
        if (pid > 0) {
            ::kill(-pid, SIGKILL);
            ::kill(pid, SIGKILL);
            int status = 0;
            while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
            }
        }
        pid = -1;
        buffer.clear();
    }
};

/// Starts /bin/sh -c script [args...] in its own process group.
Child spawn(const std::string& script, const std::vector<std::string>& args, bool pipes) {
    ignore_sigpipe();
    int to_child[2] = {-1, -1};
    int from_child[2] = {-1, -1};
    if (pipes && (::pipe2(to_child, O_CLOEXEC) != 0 || ::pipe2(from_child, O_CLOEXEC) != 0))
        throw AdapterCrashed(std::string("pipe: ") + std::strerror(errno));
    std::vector<std::string> argv_s = {"/bin/sh", "-c", script, "sh"};
    argv_s.insert(argv_s.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_s) argv.push_back(a.data());
    argv.push_back(nullptr);

    const pid_t pid = ::fork();
    if (pid < 0) throw AdapterCrashed(std::string("fork: ") + std::strerror(errno));
    if (pid == 0) {
        ::setpgid(0, 0);
        if (pipes) {
            ::dup2(to_child[0], STDIN_FILENO);
            ::dup2(from_child[1], STDOUT_FILENO);
        } else {
            const int devnull = ::open("/dev/null", O_RDONLY);
            if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
        }
        ::execv("/bin/sh", argv.data());
        ::_exit(127);
    }
    ::setpgid(pid, pid);
    Child c;
    c.pid = pid;
    if (pipes) {
        ::close(to_child[0]);
        ::close(from_child[1]);
        c.in = to_child[1];
        c.out = from_child[0];
    }
    return c;
}

enum class ReadResult { Line, Eof, Timeout };

ReadResult read_line(Child& c, Clock::time_point deadline, std::string& line) {
    for (;;) {
        if (const auto nl = c.buffer.find('\n'); nl != std::string::npos) {
            line = c.buffer.substr(0, nl);
            c.buffer.erase(0, nl + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return ReadResult::Line;
        }
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
        if (left <= 0) return ReadResult::Timeout;
        pollfd p{c.out, POLLIN, 0};
        const int rc = ::poll(&p, 1, static_cast<int>(std::min<long long>(left, 1'000'000)));
        if (rc < 0 && errno == EINTR) continue;
        if (rc == 0) return ReadResult::Timeout;
        char buf[65536];
        const ssize_t n = ::read(c.out, buf, sizeof buf);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return ReadResult::Eof;
        c.buffer.append(buf, static_cast<std::size_t>(n));
    }
}

bool write_all(int fd, std::string_view bytes) {
    while (!bytes.empty()) {
        const ssize_t n = ::write(fd, bytes.data(), bytes.size());
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return false;
        bytes.remove_prefix(static_cast<std::size_t>(n));
    }
    return true;
}

class SubprocessAdapter final : public Adapter {
public:
    explicit SubprocessAdapter(SubprocessOptions o) : options_(std::move(o)) {
        if (options_.command.empty()) throw ConfigInvalid("adapter command is empty");
        if (options_.timeout.count() <= 0) throw ConfigInvalid("adapter timeout must be positive");
    }
    ~SubprocessAdapter() override { child_.stop(); }

    std::string name() const override { return options_.command; }

    Outcome solve(const Request& request, int max_guesses) override {
        const std::string line = request_to_json(request).dump() + "\n";
        for (int attempt = 0; attempt < 2; ++attempt) {
            if (!child_.alive()) child_ = spawn(options_.command, {}, true);
            const auto deadline = Clock::now() + options_.timeout;
            std::string reply;
            const bool sent = write_all(child_.in, line);
            const ReadResult r = sent ? read_line(child_, deadline, reply) : ReadResult::Eof;
            if (r == ReadResult::Line) return parse_response(reply, request, max_guesses);
            child_.stop();
            if (r == ReadResult::Timeout) {
                return {OutcomeStatus::Timeout, json::array(),
                        "no answer within " + std::to_string(options_.timeout.count()) + " ms"};
            }
        }
        throw AdapterCrashed("solver '" + options_.command + "' exited twice while answering " + request.id);
    }

private:
    SubprocessOptions options_;
    Child child_;
};

/// Waits for a non-piped child. Returns the exit status, or nullopt after a
/// timeout (the child is killed).
std::optional<int> wait_for(Child& c, std::chrono::milliseconds timeout) {
    const auto deadline = Clock::now() + timeout;
    for (;;) {
        int status = 0;
        const pid_t rc = ::waitpid(c.pid, &status, WNOHANG);
        if (rc == c.pid) {
            c.pid = -1;
            return WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
        }
        if (Clock::now() >= deadline) {
            c.stop();
            return std::nullopt;
        }
        ::usleep(2000);
    }
}

class DirectoryBatchAdapter final : public Adapter {
public:
    explicit DirectoryBatchAdapter(DirectoryBatchOptions o) : options_(std::move(o)) {
        if (options_.command.empty()) throw ConfigInvalid("adapter command is empty");
        if (options_.work_dir.empty()) throw ConfigInvalid("directory-batch adapter needs a work directory");
        if (options_.timeout_per_problem.count() <= 0) throw ConfigInvalid("adapter timeout must be positive");
    }

    std::string name() const override { return options_.command; }
    bool batch() const override { return true; }

    Outcome solve(const Request& request, int max_guesses) override {
        return solve_all(std::span<const Request>(&request, 1), max_guesses).front();
    }

    std::vector<Outcome> solve_all(std::span<const Request> requests, int max_guesses) override {
        const fs::path req_dir = options_.work_dir / "requests";
        const fs::path resp_dir = options_.work_dir / "responses";
        fs::remove_all(req_dir);
        fs::remove_all(resp_dir);
        fs::create_directories(req_dir);
        fs::create_directories(resp_dir);
        for (std::size_t i = 0; i < requests.size(); ++i) {
            write_file(req_dir / file_name(i), request_to_json(requests[i]).dump() + "\n");
        }
        const auto timeout = options_.timeout_per_problem * static_cast<long>(std::max<std::size_t>(1, requests.size()));
        bool timed_out = false;
        for (int attempt = 0;; ++attempt) {
            Child c = spawn(options_.command + " \"$1\" \"$2\"", {req_dir.string(), resp_dir.string()}, false);
            const auto status = wait_for(c, timeout);
            if (!status) {
                timed_out = true;
                break;
            }
            if (*status == 0) break;
            if (attempt == 1)
                throw AdapterCrashed("solver '" + options_.command + "' exited with status " +
                                     std::to_string(*status) + " twice");
        }
        std::vector<Outcome> out;
        for (std::size_t i = 0; i < requests.size(); ++i) {
            const fs::path p = resp_dir / file_name(i);
            if (!fs::exists(p)) {
                out.push_back({timed_out ? OutcomeStatus::Timeout : OutcomeStatus::Failed, json::array(),
                               "no response file"});
                continue;
            }
            std::string text = read_file(p);
            while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
            out.push_back(parse_response(text, requests[i], max_guesses));
        }
        return out;
    }

private:
    static std::string file_name(std::size_t i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%06zu.json", i);
        return buf;
    }

    DirectoryBatchOptions options_;
};

}  // namespace

std::unique_ptr<Adapter> make_subprocess(const SubprocessOptions& options) {
    return std::make_unique<SubprocessAdapter>(options);
}

std::unique_ptr<Adapter> make_directory_batch(const DirectoryBatchOptions& options) {
    return std::make_unique<DirectoryBatchAdapter>(options);
}

}  // namespace conceptprobe::harness
