#include "conceptprobe/harness/eval.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "conceptprobe/common/csv.hpp"
#include "conceptprobe/common/error.hpp"

namespace conceptprobe::harness {

using nlohmann::json;

json result_to_json(const ProblemResult& r) {
    json j = {{"id", r.id},
              {"concept_tags", r.concept_tags},
              {"status", to_string(r.status)},
              {"answers", r.answers},
              {"score", r.score}};
    if (!r.message.empty()) j["message"] = r.message;
    return j;
}

ProblemResult result_from_json(const json& j) {
    if (!j.is_object()) throw SchemaViolation("", "result must be an object");
    ProblemResult r;
    try {
        r.id = j.at("id").get<std::string>();
        r.concept_tags = j.at("concept_tags").get<std::vector<std::string>>();
        const auto status = j.at("status").get<std::string>();
        if (status == "ok") r.status = OutcomeStatus::Ok;
        else if (status == "failed") r.status = OutcomeStatus::Failed;
        else if (status == "timeout") r.status = OutcomeStatus::Timeout;
        else throw SchemaViolation("/status", "unknown status '" + status + "'");
        r.answers = j.at("answers");
        r.score = j.at("score").get<double>();
        r.message = j.value("message", std::string());
    } catch (const json::exception& e) {
        throw SchemaViolation("", std::string("malformed result: ") + e.what());
    }
    return r;
}

double score_answers(const GeneratedSplit& split, std::size_t index, const json& answers) {
    if (!answers.is_array() || answers.empty()) return 0.0;
    if (split.manifest.domain == DatasetDomain::Raven) {
        return answers.front() == split.raven.at(index).correct_index ? 1.0 : 0.0;
    }
    std::vector<std::vector<arc::Grid>> predictions;
    for (const auto& guesses : answers) {
        auto& list = predictions.emplace_back();
        for (const auto& g : guesses) list.push_back(arc::make_grid(g.get<std::vector<std::vector<int>>>()));
    }
    return arc::score(split.arc.at(index), predictions);
}

namespace {

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

ProblemResult to_result(const ManifestEntry& entry, Outcome outcome) {
    ProblemResult r;
    r.id = entry.id;
    r.concept_tags = entry.concept_tags;
    r.status = outcome.status;
    r.answers = std::move(outcome.answers);
    r.message = std::move(outcome.message);
    return r;
}

}  // namespace

std::vector<ReportRow> aggregate(std::string_view model, std::string_view overall,
                                 std::span<const ProblemResult> results, bool overall_slice, bool concept_slices) {
    std::vector<std::string> order;
    std::map<std::string, std::pair<std::size_t, double>> sums;
    const auto add = [&](const std::string& slice, double score) {
        auto [it, fresh] = sums.try_emplace(slice, 0, 0.0);
        if (fresh) order.push_back(slice);
        it->second.first += 1;
        it->second.second += score;
    };
    for (const auto& r : results) {
        if (overall_slice) add(std::string(overall), r.score);
        if (!concept_slices) continue;
        std::vector<std::string> seen;
        for (const auto& tag : r.concept_tags) {
            std::string s = concept_slice(tag);
            if (s.empty() || std::find(seen.begin(), seen.end(), s) != seen.end()) continue;
            if (overall_slice && s == overall) continue;
            seen.push_back(s);
            add(s, r.score);
        }
    }
    std::vector<ReportRow> rows;
    for (const auto& s : order) {
        const auto& [n, total] = sums[s];
        rows.push_back({std::string(model), s, n, total / static_cast<double>(n)});
    }
    return rows;
}

EvalRun run_eval(const GeneratedSplit& split, const AdapterFactory& factory, const EvalOptions& options) {
    const auto& entries = split.manifest.entries;
    if (entries.empty()) throw EmptyDataset("dataset '" + split.manifest.name + "/" + split.manifest.split + "' is empty");
    const bool raven = split.manifest.domain == DatasetDomain::Raven;
    const int guesses = options.guesses == 0 ? (raven ? 1 : arc::kMaxGuesses) : options.guesses;
    if (raven && guesses != 1) throw ConfigInvalid("RAVEN solvers choose exactly one candidate (guesses = 1)");
    if (!raven && (guesses < 1 || guesses > arc::kMaxGuesses))
        throw ConfigInvalid("ARC guesses must be within 1..3");

    const std::vector<Request> requests = dataset_requests(split, options.dataset_dir, options.image_mode);
    std::vector<Outcome> outcomes(requests.size());
    std::string adapter_name;

    auto first = factory();
    adapter_name = first->name();
    if (first->batch()) {
        outcomes = first->solve_all(requests, guesses);
        if (outcomes.size() != requests.size()) throw ProtocolViolation("batch adapter returned the wrong number of outcomes");
    } else {
        const unsigned workers = std::max(1u, std::min<unsigned>(options.workers, static_cast<unsigned>(requests.size())));
        std::atomic<std::size_t> next{0};
        std::atomic<bool> stop{false};
        std::mutex mu;
        std::size_t failed_at = requests.size();
        std::exception_ptr error;
        const auto work = [&](std::unique_ptr<Adapter> adapter) {
            try {
                if (!adapter) adapter = factory();
            } catch (...) {
                std::lock_guard lock(mu);
                if (!error) error = std::current_exception();
                stop = true;
                return;
            }
            while (!stop) {
                const std::size_t i = next.fetch_add(1);
                if (i >= requests.size()) return;
                try {
                    outcomes[i] = adapter->solve(requests[i], guesses);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (i < failed_at) {
                        failed_at = i;
                        error = std::current_exception();
                    }
                    stop = true;
                }
            }
        };
        std::vector<std::thread> pool;
        for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work, nullptr);
        work(std::move(first));
        for (auto& t : pool) t.join();
        if (error) std::rethrow_exception(error);
    }

    EvalRun run;
    run.results.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        ProblemResult r = to_result(entries[i], std::move(outcomes[i]));
        if (r.status == OutcomeStatus::Ok) {
            r.score = score_answers(split, i, r.answers);
            if (!r.message.empty()) ++run.flagged;
        } else if (r.status == OutcomeStatus::Failed) {
            ++run.failures;
        } else {
            ++run.timeouts;
        }
        if (options.log) *options.log << result_to_json(r).dump() << '\n';
        run.results.push_back(std::move(r));
    }
    if (options.log) options.log->flush();

    run.report.rows = aggregate(options.model, split.manifest.split, run.results, options.overall_slice,
                                options.concept_slices);
    run.report.metadata = {{"timestamp", utc_now()},
                           {"adapter", adapter_name},
                           {"dataset", split.manifest.name},
                           {"split", split.manifest.split},
                           {"guesses", guesses},
                           {"image_mode", options.image_mode},
                           {"problems", entries.size()},
                           {"failures", run.failures},
                           {"timeouts", run.timeouts},
                           {"flagged", run.flagged}};
    return run;
}

std::vector<ReportRow> audit(const GeneratedSplit& split, std::istream& log, std::string_view model,
                             bool overall_slice, bool concept_slices) {
    const auto& entries = split.manifest.entries;
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < entries.size(); ++i) index[entries[i].id] = i;
    std::vector<std::optional<ProblemResult>> seen(entries.size());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(log, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string at = "line " + std::to_string(lineno);
        ProblemResult r;
        try {
            r = result_from_json(json::parse(line));
        } catch (const json::parse_error&) {
            throw SchemaViolation(at, "not JSON");
        }
        const auto it = index.find(r.id);
        if (it == index.end()) throw SchemaViolation(at, "unknown problem id '" + r.id + "'");
        if (seen[it->second]) throw SchemaViolation(at, "duplicate result for '" + r.id + "'");
        const double rescored = r.status == OutcomeStatus::Ok ? score_answers(split, it->second, r.answers) : 0.0;
        if (std::abs(rescored - r.score) > 1e-9) throw SchemaViolation(at, "logged score disagrees with the answers");
        r.concept_tags = entries[it->second].concept_tags;
        seen[it->second] = std::move(r);
    }
    std::vector<ProblemResult> results;
    for (std::size_t i = 0; i < seen.size(); ++i) {
        if (!seen[i]) throw SchemaViolation("", "log has no result for '" + entries[i].id + "'");
        results.push_back(std::move(*seen[i]));
    }
    return aggregate(model, split.manifest.split, results, overall_slice, concept_slices);
}

std::string report_csv(std::span<const ReportRow> rows) {
    std::string out = "model,slice,n,accuracy\n";
    for (const auto& r : rows) {
        out += csv::join({r.model, r.slice, std::to_string(r.n), csv::format_rate(r.accuracy)});
        out += '\n';
    }
    return out;
}

std::vector<ReportRow> parse_report_csv(std::string_view text) {
    std::vector<ReportRow> rows;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1) {
            if (line != "model,slice,n,accuracy") throw SchemaViolation("line 1", "expected header model,slice,n,accuracy");
            continue;
        }
        if (line.empty()) continue;
        const auto f = csv::split(line);
        const std::string at = "line " + std::to_string(lineno);
        if (f.size() != 4) throw SchemaViolation(at, "expected 4 fields");
        ReportRow r{f[0], f[1], 0, 0.0};
        try {
            std::size_t used = 0;
            r.n = std::stoull(f[2], &used);
            if (used != f[2].size()) throw std::invalid_argument("n");
            r.accuracy = std::stod(f[3], &used);
            if (used != f[3].size()) throw std::invalid_argument("accuracy");
        } catch (const std::exception&) {
            throw SchemaViolation(at, "bad number");
        }
        if (r.accuracy < 0.0 || r.accuracy > 1.0) throw SchemaViolation(at, "accuracy outside [0, 1]");
        rows.push_back(std::move(r));
    }
    if (lineno == 0) throw SchemaViolation("", "empty report");
    return rows;
}

std::string report_text(std::span<const ReportRow> rows) {
    std::vector<std::string> models, slices;
    std::map<std::string, std::size_t> slice_n;
    std::map<std::pair<std::string, std::string>, double> cell;
    for (const auto& r : rows) {
        if (std::find(models.begin(), models.end(), r.model) == models.end()) models.push_back(r.model);
        if (!slice_n.count(r.slice)) {
            slices.push_back(r.slice);
            slice_n[r.slice] = r.n;
        }
        cell[{r.model, r.slice}] = r.accuracy;
    }
    std::vector<std::vector<std::string>> table;
    table.push_back({"model"});
    for (const auto& s : slices) table.back().push_back(s + " (" + std::to_string(slice_n[s]) + ")");
    for (const auto& m : models) {
        auto& line = table.emplace_back(std::vector<std::string>{m});
        for (const auto& s : slices) {
            const auto it = cell.find({m, s});
            if (it == cell.end()) {
                line.push_back("-");
                continue;
            }
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * it->second);
            line.push_back(buf);
        }
    }
    std::vector<std::size_t> width(slices.size() + 1, 0);
    for (const auto& line : table)
        for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
    std::string out;
    for (const auto& line : table) {
        for (std::size_t c = 0; c < line.size(); ++c) {
            const std::string pad(width[c] - line[c].size(), ' ');
            if (c == 0) out += line[c] + pad;
            else out += "  " + pad + line[c];
        }
        out += '\n';
    }
    return out;
}

}  // namespace conceptprobe::harness
