#include <fstream>
#include <sstream>

#include "conceptprobe/arc/concepts.hpp"
#include "conceptprobe/common/error.hpp"
#include "conceptprobe/harness/adapter.hpp"
#include "conceptprobe/harness/eval.hpp"
#include "doctest.h"
#include "temp_dir.hpp"

using namespace conceptprobe;
using namespace conceptprobe::harness;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const GeneratedSplit& raven_split() {
    static const GeneratedSplit s = generate_one_split(
        parse_config({{"domain", "raven"}, {"name", "ev"}, {"master_seed", 9}, {"specs", "probe"},
                      {"render", 32}, {"splits", {{"probe", 58}}}}),
        {"probe", 58});
    return s;
}

const GeneratedSplit& arc_split() {
    static const GeneratedSplit s = generate_one_split(
        parse_config({{"domain", "arc"}, {"name", "ev"}, {"master_seed", 9}, {"suite", "all"},
                      {"splits", {{"probe", 26}}}}),
        {"probe", 26});
    return s;
}

AdapterFactory builtin(std::string name) {
    return [name] { return make_builtin(name, 1); };
}

std::string fake(const std::string& args) { return std::string(CONCEPTPROBE_FAKE_SOLVER) + " " + args; }

AdapterFactory shell(const std::string& command, int timeout_ms = 20'000) {
    return [=] { return make_subprocess({command, std::chrono::milliseconds(timeout_ms)}); };
}

AdapterFactory subprocess(const std::string& args, int timeout_ms = 20'000) { return shell(fake(args), timeout_ms); }

double overall(const EvalRun& run) { return run.report.rows.front().accuracy; }

}  // namespace

TEST_CASE("requests carry no answer or concept information") {
    for (const auto& p : raven_split().raven) {
        const std::string bytes = request_to_json(raven_request(p)).dump();
        for (const char* leak : {"concept_tag", "correct_index", "seed", "rules", "answer_strategy", "sameness",
                                 "progression"}) {
            CHECK(bytes.find(leak) == std::string::npos);
        }
    }
    for (const auto& t : arc_split().arc) {
        const Request r = arc_request(t);
        const std::string bytes = request_to_json(r).dump();
        CHECK(bytes.find("concept_tag") == std::string::npos);
        CHECK(bytes.find("top_bottom") == std::string::npos);
        CHECK(bytes.find("boundary") == std::string::npos);
        for (const auto& pair : r.payload["test"]) CHECK_FALSE(pair.contains("output"));
        CHECK(r.payload["train"].size() == t.train.size());
    }
}

TEST_CASE("parse_response") {
    const Request raven{"p1", DatasetDomain::Raven, json::object()};
    CHECK(parse_response(R"({"id":"p1","answers":[4]})", raven, 1).answers == json::array({4}));
    CHECK(parse_response(R"({"id":"p1","answers":[]})", raven, 1).status == OutcomeStatus::Failed);
    const Outcome noted = parse_response(R"({"id":"p1","answers":[2],"note":"unsure"})", raven, 1);
    CHECK(noted.status == OutcomeStatus::Ok);
    CHECK(noted.message == "unsure");
    const Outcome err = parse_response(R"({"id":"p1","error":"no idea"})", raven, 1);
    CHECK(err.status == OutcomeStatus::Failed);
    CHECK(err.message == "no idea");
    for (const char* bad : {"nonsense", "[1]", R"({"id":"p2","answers":[1]})", R"({"id":"p1"})",
                            R"({"id":"p1","answers":[8]})", R"({"id":"p1","answers":[1,2]})",
                            R"({"id":"p1","answers":["1"]})"}) {
        try {
            parse_response(bad, raven, 1);
            FAIL("expected ProtocolViolation for " << bad);
        } catch (const ProtocolViolation& e) {
            CHECK(std::string(e.what()).find(bad) != std::string::npos);
        }
    }
    const Request arc{"t", DatasetDomain::Arc, {{"train", json::array()}, {"test", json::array({json::object()})}}};
    CHECK(parse_response(R"({"id":"t","answers":[[[[1]],[[2]],[[3]]]]})", arc, 3).status == OutcomeStatus::Ok);
    CHECK_THROWS_AS(parse_response(R"({"id":"t","answers":[[[[1]],[[2]],[[3]],[[4]]]]})", arc, 3), ProtocolViolation);
    CHECK_THROWS_AS(parse_response(R"({"id":"t","answers":[[[[1]]],[[[1]]]]})", arc, 3), ProtocolViolation);
    CHECK_THROWS_AS(parse_response(R"({"id":"t","answers":[[[[12]]]]})", arc, 3), ProtocolViolation);
    CHECK_THROWS_AS(parse_response(R"({"id":"t","answers":[[[[1,2],[3]]]]})", arc, 3), ProtocolViolation);
}

TEST_CASE("built-in adapters") {
    EvalOptions o;
    o.model = "oracle";
    const EvalRun oracle = run_eval(raven_split(), builtin("oracle"), o);
    CHECK(overall(oracle) == 1.0);
    std::size_t noted = 0;
    for (const auto& r : oracle.results) noted += r.message == "rule conflict";
    CHECK(oracle.flagged == noted);
    CHECK(oracle.report.metadata["flagged"] == noted);
    CHECK(overall(run_eval(arc_split(), builtin("reference"), o)) == 1.0);
    CHECK(overall(run_eval(arc_split(), builtin("oracle"), o)) == 1.0);

    const EvalRun id = run_eval(arc_split(), builtin("identity"), o);
    CHECK(overall(id) == 0.0);
    for (std::size_t i = 0; i < arc_split().arc.size(); ++i) {
        CHECK(id.results[i].score == 0.0);
    }
    const EvalRun rnd = run_eval(arc_split(), builtin("random"), o);
    CHECK(overall(rnd) == 0.0);

    SUBCASE("reference answers with one guess when one family fits") {
        o.guesses = 1;
        CHECK(overall(run_eval(arc_split(), builtin("reference"), o)) == 1.0);
    }
    SUBCASE("guess limits") {
        o.guesses = 4;
        CHECK_THROWS_AS(run_eval(arc_split(), builtin("reference"), o), ConfigInvalid);
        o.guesses = 3;
        CHECK_THROWS_AS(run_eval(raven_split(), builtin("oracle"), o), ConfigInvalid);
    }
    CHECK_THROWS_AS(make_builtin("psychic"), ConfigInvalid);
}

TEST_CASE("random RAVEN adapter is near chance") {
    const auto split = generate_one_split(
        parse_config({{"domain", "raven"}, {"name", "rnd"}, {"master_seed", 5}, {"specs", "standard"},
                      {"splits", {{"test", 1000}}}}),
        {"test", 1000});
    EvalOptions o;
    const double acc = overall(run_eval(split, builtin("random"), o));
    CHECK(acc > 0.095);
    CHECK(acc < 0.155);
}

TEST_CASE("report rows, slices and determinism") {
    EvalOptions o;
    o.model = "m";
    const EvalRun a = run_eval(raven_split(), builtin("random"), o);
    const EvalRun b = run_eval(raven_split(), builtin("random"), o);
    CHECK(a.report.rows == b.report.rows);
    CHECK(a.report.metadata.contains("timestamp"));
    REQUIRE(a.report.rows.size() == 3);
    CHECK(a.report.rows[0].slice == "probe");
    CHECK(a.report.rows[0].n == 58);
    CHECK(a.report.rows[1].slice == "sameness");
    CHECK(a.report.rows[1].n == 42);
    CHECK(a.report.rows[2].slice == "progression");
    CHECK(a.report.rows[2].n == 16);
    for (const auto& r : a.report.rows) {
        CHECK(r.accuracy >= 0.0);
        CHECK(r.accuracy <= 1.0);
    }
    o.overall_slice = false;
    CHECK(run_eval(raven_split(), builtin("random"), o).report.rows.size() == 2);
    o.overall_slice = true;
    o.concept_slices = false;
    CHECK(run_eval(raven_split(), builtin("random"), o).report.rows.size() == 1);

    GeneratedSplit empty = raven_split();
    empty.manifest.entries.clear();
    empty.raven.clear();
    CHECK_THROWS_AS(run_eval(empty, builtin("random"), EvalOptions{}), EmptyDataset);
}

TEST_CASE("result log audit") {
    std::stringstream log;
    EvalOptions o;
    o.model = "r";
    o.log = &log;
    const EvalRun run = run_eval(raven_split(), builtin("random"), o);
    const std::string text = log.str();
    std::istringstream in(text);
    CHECK(audit(raven_split(), in, "r") == run.report.rows);

    std::stringstream arc_log;
    o.log = &arc_log;
    const EvalRun arc_run = run_eval(arc_split(), builtin("reference"), o);
    CHECK(audit(arc_split(), arc_log, "r") == arc_run.report.rows);

    SUBCASE("a tampered score is caught") {
        std::istringstream lines(text);
        std::string out, line;
        bool flipped = false;
        while (std::getline(lines, line)) {
            json j = json::parse(line);
            if (!flipped) {
                j["score"] = 1.0 - j["score"].get<double>();
                flipped = true;
            }
            out += j.dump() + "\n";
        }
        std::istringstream bad(out);
        CHECK_THROWS_AS(audit(raven_split(), bad, "r"), SchemaViolation);
    }
    SUBCASE("a missing line is caught") {
        std::istringstream bad(text.substr(text.find('\n') + 1));
        CHECK_THROWS_AS(audit(raven_split(), bad, "r"), SchemaViolation);
    }
}

TEST_CASE("report CSV round-trip and table shape") {
    const std::vector<ReportRow> rows = {
        {"MRNet", "test", 10000, 0.73}, {"MRNet", "sameness", 210, 0.49}, {"MRNet", "progression", 80, 0.44},
        {"SCL", "test", 10000, 0.89},   {"SCL", "sameness", 210, 0.62},   {"SCL", "progression", 80, 0.68},
    };
    const std::string text = report_csv(rows);
    CHECK(text.rfind("model,slice,n,accuracy\nMRNet,test,10000,0.730000\n", 0) == 0);
    const auto back = parse_report_csv(text);
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].model == rows[i].model);
        CHECK(back[i].slice == rows[i].slice);
        CHECK(back[i].n == rows[i].n);
        CHECK(back[i].accuracy == doctest::Approx(rows[i].accuracy).epsilon(1e-9));
    }
    CHECK(report_csv(back) == text);

    const std::string table = report_text(rows);
    std::istringstream lines(table);
    std::string header, l1, l2, extra;
    std::getline(lines, header);
    std::getline(lines, l1);
    std::getline(lines, l2);
    CHECK_FALSE(std::getline(lines, extra));
    CHECK(header.find("test (10000)") != std::string::npos);
    CHECK(header.find("sameness (210)") != std::string::npos);
    CHECK(header.find("progression (80)") != std::string::npos);
    CHECK(header.find("test") < header.find("sameness"));
    CHECK(header.find("sameness") < header.find("progression"));
    CHECK(l1.rfind("MRNet", 0) == 0);
    CHECK(l1.find("73.0%") != std::string::npos);
    CHECK(l2.find("68.0%") != std::string::npos);
    CHECK(l1.size() == header.size());

    const std::vector<ReportRow> one = {{"oracle", "test", 5, 1.0}};
    std::istringstream single(report_text(one));
    int n = 0;
    std::string line;
    while (std::getline(single, line)) ++n;
    CHECK(n == 2);

    CHECK_THROWS_AS(parse_report_csv("model,slice\n"), SchemaViolation);
    CHECK_THROWS_AS(parse_report_csv("model,slice,n,accuracy\na,b,x,0.5\n"), SchemaViolation);
    CHECK_THROWS_AS(parse_report_csv("model,slice,n,accuracy\na,b,1,1.5\n"), SchemaViolation);
}

TEST_CASE("subprocess-lines adapter") {
    testutil::TempDir tmp;
    EvalOptions o;
    o.model = "oracle";
    const EvalRun base = run_eval(raven_split(), builtin("oracle"), o);
    const std::string first = raven_split().raven[0].id;
    const std::string third = raven_split().raven[2].id;

    SUBCASE("answers match the built-in and requests are leak-free") {
        const fs::path rec = tmp / "seen.jsonl";
        const EvalRun run = run_eval(raven_split(), subprocess("lines oracle --record " + rec.string()), o);
        CHECK(run.report.rows == base.report.rows);
        const std::string seen = read_file(rec);
        CHECK(seen.find("concept_tag") == std::string::npos);
        CHECK(seen.find("correct_index") == std::string::npos);
        CHECK(std::count(seen.begin(), seen.end(), '\n') == 58);
    }
    SUBCASE("ARC over the same protocol") {
        const fs::path rec = tmp / "seen.jsonl";
        const EvalRun run = run_eval(arc_split(), subprocess("lines reference --record " + rec.string()), o);
        CHECK(overall(run) == 1.0);
        const std::string seen = read_file(rec);
        CHECK(seen.find("concept_tag") == std::string::npos);
        CHECK(seen.find("\"output\"") != std::string::npos);  // train outputs only
        const std::string id_run = std::to_string(overall(run_eval(arc_split(), subprocess("lines identity"), o)));
        CHECK(id_run == "0.000000");
    }
    SUBCASE("several workers give the same report") {
        o.workers = 3;
        CHECK(run_eval(raven_split(), subprocess("lines oracle"), o).report.rows == base.report.rows);
    }
    SUBCASE("one crash is retried") {
        const EvalRun run = run_eval(
            raven_split(), subprocess("lines oracle --crash-on " + third + " --once " + (tmp / "m").string()), o);
        CHECK(run.report.rows == base.report.rows);
        CHECK(run.failures == 0);
    }
    SUBCASE("a second crash is fatal") {
        CHECK_THROWS_AS(run_eval(raven_split(), subprocess("lines oracle --crash-on " + third), o), AdapterCrashed);
        CHECK_THROWS_AS(run_eval(raven_split(), shell("exit 1"), o), AdapterCrashed);
    }
    SUBCASE("timeouts score zero and are counted") {
        const EvalRun run = run_eval(raven_split(), subprocess("lines oracle --hang-on " + first, 300), o);
        CHECK(run.timeouts == 1);
        CHECK(run.failures == 0);
        CHECK(run.results[0].status == OutcomeStatus::Timeout);
        CHECK(run.results[0].score == 0.0);
        CHECK(run.results[1].score == 1.0);
        CHECK(overall(run) == doctest::Approx(57.0 / 58.0));
    }
    SUBCASE("solver errors are failures") {
        const EvalRun run = run_eval(raven_split(), subprocess("lines oracle --error-on " + first), o);
        CHECK(run.failures == 1);
        CHECK(run.results[0].score == 0.0);
    }
    SUBCASE("protocol violations name the line") {
        try {
            run_eval(raven_split(), subprocess("lines oracle --garbage-on " + third), o);
            FAIL("expected ProtocolViolation");
        } catch (const ProtocolViolation& e) {
            CHECK(std::string(e.what()).find("this is not json") != std::string::npos);
        }
        CHECK_THROWS_AS(run_eval(raven_split(), subprocess("lines oracle --wrong-id-on " + first), o),
                        ProtocolViolation);
        CHECK_THROWS_AS(run_eval(raven_split(), subprocess("lines oracle --extra-guesses"), o), ProtocolViolation);
        CHECK_THROWS_AS(run_eval(arc_split(), subprocess("lines reference --extra-guesses"), o), ProtocolViolation);
    }
    SUBCASE("bad adapter options") {
        CHECK_THROWS_AS(make_subprocess({"", std::chrono::milliseconds(10)}), ConfigInvalid);
        CHECK_THROWS_AS(make_subprocess({"cat", std::chrono::milliseconds(0)}), ConfigInvalid);
    }
}

TEST_CASE("directory-batch adapter") {
    testutil::TempDir tmp;
    EvalOptions o;
    o.model = "oracle";
    const auto factory = [&](std::string command) -> AdapterFactory {
        return [=, &tmp] {
            return make_directory_batch({command, tmp / "work", std::chrono::milliseconds(20'000)});
        };
    };
    const EvalRun base = run_eval(raven_split(), builtin("oracle"), o);
    CHECK(run_eval(raven_split(), factory(fake("batch oracle")), o).report.rows == base.report.rows);
    CHECK(overall(run_eval(arc_split(), factory(fake("batch reference")), o)) == 1.0);
    CHECK_THROWS_AS(run_eval(raven_split(), factory("exit 4;"), o), AdapterCrashed);

    const EvalRun none = run_eval(raven_split(), factory("true"), o);
    CHECK(none.failures == 58);
    CHECK(overall(none) == 0.0);
}

TEST_CASE("image mode sends PGM paths") {
    testutil::TempDir tmp;
    write_dataset(tmp.path(), raven_split());
    const GeneratedSplit loaded = load_dataset(tmp.path());
    const auto reqs = dataset_requests(loaded, tmp.path(), true);
    REQUIRE(reqs.size() == 58);
    for (const auto& r : reqs) {
        REQUIRE(r.payload.size() == 1);
        const fs::path p = r.payload["image"].get<std::string>();
        CHECK(p.is_absolute());
        CHECK(fs::exists(p));
        CHECK(read_file(p).rfind("P5", 0) == 0);
    }
    // The built-in oracle is symbolic and declines image payloads.
    EvalOptions o;
    o.image_mode = true;
    o.dataset_dir = tmp.path();
    const EvalRun run = run_eval(loaded, builtin("oracle"), o);
    CHECK(run.failures == 58);

    GeneratedSplit unrendered = loaded;
    unrendered.manifest.render_side = 0;
    CHECK_THROWS_AS(dataset_requests(unrendered, tmp.path(), true), ConfigInvalid);
}
