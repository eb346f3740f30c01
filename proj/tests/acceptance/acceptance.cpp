// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. `--quick` skips the 70,000-problem generation.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "conceptprobe/arc/concepts.hpp"
#include "conceptprobe/common/error.hpp"
#include "conceptprobe/harness/adapter.hpp"
#include "conceptprobe/harness/dataset.hpp"
#include "conceptprobe/harness/eval.hpp"
#include "conceptprobe/raven/answers.hpp"
#include "conceptprobe/raven/generator.hpp"
#include "conceptprobe/raven/oracle.hpp"
#include "conceptprobe/raven/rules.hpp"

using namespace conceptprobe;
using namespace conceptprobe::harness;
using nlohmann::json;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

void criterion(const std::string& name, const std::function<std::string(bool&)>& body) {
    bool ok = true;
    std::string detail;
    const auto t0 = Clock::now();
    try {
        detail = body(ok);
    } catch (const std::exception& e) {
        ok = false;
        detail = std::string("exception: ") + e.what();
    }
    if (!ok) ++failures;
    std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << " [" << fmt("%.1f", seconds_since(t0))
              << " s]" << std::endl;
}

struct ScratchDir {
    fs::path path;
    ScratchDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("conceptprobe-acceptance-" + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~ScratchDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

json raven_config(const std::string& name, std::uint64_t seed, const json& specs, const json& splits,
                  const std::string& strategy = "fair", int render = 0) {
    return {{"domain", "raven"}, {"name", name},         {"master_seed", seed}, {"specs", specs},
            {"splits", splits},  {"answer_strategy", strategy}, {"render", render}};
}

GeneratedSplit one_split(const json& config) {
    const GenerationConfig c = parse_config(config);
    return generate_one_split(c, c.splits.front());
}

AdapterFactory builtin(const std::string& name) {
    return [name] { return make_builtin(name, 2024); };
}

double overall(const EvalRun& run) { return run.report.rows.front().accuracy; }

/// Every RuleSet over the layout's keys, filtered by check_row on rows 1
/// and 2 and by the existence of some panel completing row 3.
std::vector<raven::RuleSet> brute_force_rulesets(const std::array<raven::Panel, 8>& ctx,
                                                 const std::vector<raven::Panel>& all_panels) {
    using namespace raven;
    const LayoutKind layout = ctx[0].layout;
    const auto keys = layout_keys(layout);
    std::vector<std::vector<Rule>> options;
    for (const AttrKey k : keys) options.push_back(candidate_rules(layout, k));
    std::vector<RuleSet> out;
    std::vector<std::size_t> choice(keys.size(), 0);
    const std::array<Panel, 3> row1 = {ctx[0], ctx[1], ctx[2]};
    const std::array<Panel, 3> row2 = {ctx[3], ctx[4], ctx[5]};
    while (true) {
        RuleSet rs;
        rs.layout = layout;
        for (std::size_t i = 0; i < keys.size(); ++i) {
            if (choice[i] == 0) rs.free_attributes.push_back(keys[i]);
            else rs.rules.push_back(options[i][choice[i] - 1]);
        }
        normalize(rs);
        if (check_row(rs, row1) && check_row(rs, row2)) {
            for (const Panel& p : all_panels) {
                const std::array<Panel, 3> row3 = {ctx[6], ctx[7], p};
                if (check_row(rs, row3)) {
                    out.push_back(rs);
                    break;
                }
            }
        }
        std::size_t i = 0;
        for (; i < choice.size(); ++i) {
            if (++choice[i] <= options[i].size()) break;
            choice[i] = 0;
        }
        if (i == choice.size()) break;
    }
    return out;
}

std::vector<raven::Panel> all_center_panels() {
    using namespace raven;
    std::vector<Panel> out;
    const auto dom = [](AttributeName a) { return domain_values(LayoutKind::Center, {Group::All, a}); };
    for (int shape : dom(AttributeName::Shape))
        for (int size : dom(AttributeName::Size))
            for (int color : dom(AttributeName::Color))
                for (int angle : dom(AttributeName::Angle))
                    out.push_back(Panel{LayoutKind::Center, {Entity{static_cast<Shape>(shape), size, color, angle, 0}}});
    return out;
}

std::string sorted_key(std::vector<raven::RuleSet> sets) {
    std::vector<std::string> parts;
    for (const auto& rs : sets) {
        std::string s;
        for (const auto& r : rs.rules)
            s += std::string(raven::to_string(r.relation)) + ":" + raven::key_name(r.key) + ":" + std::to_string(r.param) + ";";
        parts.push_back(s);
    }
    std::sort(parts.begin(), parts.end());
    std::string all;
    for (const auto& p : parts) all += p + "|";
    return all;
}

}  // namespace

int main(int argc, char** argv) {
    const bool quick = argc > 1 && std::string(argv[1]) == "--quick";
    ScratchDir scratch;
    const json standard = "standard";
    double biased_rate = 0.0;

    criterion("bias-exploit", [&](bool& ok) {
        const auto t0 = Clock::now();
        const GeneratedSplit s = one_split(raven_config("biased", 101, standard, {{"test", 1000}}, "biased"));
        biased_rate = raven::exploitability(s.raven, raven::Attack::MajorityVote).rate();
        const double t = seconds_since(t0);
        ok = s.raven.size() == 1000 && biased_rate > 0.90 && t < 60.0;
        return "majority-vote accuracy " + fmt("%.3f", biased_rate) + " on 1000 biased problems (need > 0.90), " +
               fmt("%.1f", t) + " s (need < 60 s)";
    });

    criterion("fair-answers", [&](bool& ok) {
        const GeneratedSplit s = one_split(raven_config("fair", 101, standard, {{"test", 1000}}, "fair"));
        const double rate = raven::exploitability(s.raven, raven::Attack::MajorityVote).rate();
        ok = s.raven.size() == 1000 && rate >= 0.05 && rate <= 0.25 && biased_rate - rate >= 0.5;
        return "majority-vote accuracy " + fmt("%.3f", rate) + " on 1000 fair problems (need 0.05..0.25), gap " +
               fmt("%.3f", biased_rate - rate) + " (need >= 0.5)";
    });

    criterion("well-posed", [&](bool& ok) {
        const GeneratedSplit s = one_split(raven_config("wellposed", 202, standard, {{"test", 700}}));
        std::set<std::string> layouts, families;
        int unique = 0;
        for (const auto& p : s.raven) {
            layouts.insert(std::string(raven::to_string(p.matrix.layout)));
            for (const auto& t : p.concept_tags) families.insert(std::string(raven::to_string(t.family)));
            unique += raven::solve(p).is_unique(p.correct_index) ? 1 : 0;
        }
        const double acc = overall(run_eval(s, builtin("oracle"), EvalOptions{}));

        std::vector<raven::ConceptSpec> small = {
            raven::parse_descriptor("sameness[color]@center"),
            raven::parse_descriptor("progression[size]@center"),
            raven::parse_descriptor("arithmetic[color]@center"),
            raven::parse_descriptor("progression[shape]@center/bg=random"),
            raven::parse_descriptor("arithmetic[color]@center/bg=random"),
        };
        const auto panels = all_center_panels();
        int agree = 0;
        for (int i = 0; i < 100; ++i) {
            const raven::Problem p = raven::sample_problem(small[i % small.size()], derive_seed(303, i));
            const auto brute = brute_force_rulesets(p.matrix.context, panels);
            const auto induced = raven::induce_rules(p.matrix.context, p.matrix.layout);
            agree += sorted_key(brute) == sorted_key(induced) ? 1 : 0;
        }
        ok = acc == 1.0 && unique == 700 && layouts.size() == 5 && families.size() == 3 && agree == 100;
        return "oracle adapter accuracy " + fmt("%.3f", acc) + " on 700 problems, " + std::to_string(unique) +
               "/700 uniquely solvable, " + std::to_string(layouts.size()) + " layouts, " +
               std::to_string(families.size()) + " relation families; brute-force rule sets equal induce_rules on " +
               std::to_string(agree) + "/100";
    });

    criterion("raven-suite-shape", [&](bool& ok) {
        const GeneratedSplit probe = one_split(raven_config("probe", 303, "probe", {{"probe", 290}}));
        std::map<std::string, int> per;
        bool tagged = true;
        for (const auto& e : probe.manifest.entries) {
            tagged = tagged && !e.concept_tags.empty();
            for (const auto& t : e.concept_tags) ++per[concept_slice(t)];
        }
        const GeneratedSplit test = one_split(raven_config("desk", 303, standard, {{"test", 100}}));
        EvalOptions o;
        o.model = "oracle";
        o.concept_slices = false;
        std::vector<ReportRow> rows = run_eval(test, builtin("oracle"), o).report.rows;
        o.overall_slice = false;
        o.concept_slices = true;
        for (const auto& r : run_eval(probe, builtin("oracle"), o).report.rows) rows.push_back(r);
        o.model = "random";
        o.concept_slices = false;
        o.overall_slice = true;
        for (const auto& r : run_eval(test, builtin("random"), o).report.rows) rows.push_back(r);
        o.overall_slice = false;
        o.concept_slices = true;
        for (const auto& r : run_eval(probe, builtin("random"), o).report.rows) rows.push_back(r);

        const std::string table = report_text(rows);
        std::istringstream lines(table);
        std::string header;
        std::getline(lines, header);
        const bool columns = header.find("test (100)") != std::string::npos &&
                             header.find("sameness (210)") != std::string::npos &&
                             header.find("progression (80)") != std::string::npos &&
                             header.find("test (100)") < header.find("sameness (210)") &&
                             header.find("sameness (210)") < header.find("progression (80)");
        const auto back = parse_report_csv(report_csv(rows));
        const bool round_trip = report_csv(back) == report_csv(rows) && back.size() == 6;
        ok = per["sameness"] == 210 && per["progression"] == 80 && per.size() == 2 && tagged && columns && round_trip;
        return std::to_string(per["sameness"]) + " sameness + " + std::to_string(per["progression"]) +
               " progression problems, all tagged; table header \"" + header + "\"; CSV round-trip " +
               (round_trip ? "exact" : "differs");
    });

    criterion("arc-suite-shape", [&](bool& ok) {
        const auto tb = one_split({{"domain", "arc"}, {"name", "tb"}, {"master_seed", 7}, {"suite", "top_bottom"},
                                   {"splits", {{"probe", 14}}}});
        const auto bd = one_split({{"domain", "arc"}, {"name", "bd"}, {"master_seed", 7}, {"suite", "boundary"},
                                   {"splits", {{"probe", 12}}}});
        EvalOptions o;
        o.guesses = 3;
        const double ref_tb = overall(run_eval(tb, builtin("reference"), o));
        const double ref_bd = overall(run_eval(bd, builtin("reference"), o));

        // identity on extraction families only
        double id_sum = 0;
        int extraction = 0;
        for (const auto* s : {&tb, &bd}) {
            const EvalRun run = run_eval(*s, builtin("identity"), o);
            for (std::size_t i = 0; i < s->arc.size(); ++i) {
                const auto fam = arc::parse_family(s->arc[i].concept_tag->substr(s->arc[i].concept_tag->find('/') + 1));
                if (fam && arc::is_extraction(*fam)) {
                    id_sum += run.results[i].score;
                    ++extraction;
                }
            }
        }

        // 3-guess rule: the correct grid counts in any of three positions,
        // never as a fourth guess, and two wrong guesses score nothing.
        int permutations = 0, perm_ok = 0;
        bool fourth_rejected = true, wrong_zero = true;
        for (const auto* s : {&tb, &bd}) {
            for (const auto& task : s->arc) {
                const arc::Grid& truth = task.test[0].output;
                arc::Grid w1 = task.test[0].input;
                arc::Grid w2(1, 1, (truth.height == 1 && truth.width == 1 && truth.at(0, 0) == 9) ? 8 : 9);
                if (w1 == truth) w1 = arc::Grid(2, 2, 0);
                std::vector<arc::Grid> g = {w1, w2, truth};
                std::sort(g.begin(), g.end(), [](const arc::Grid& a, const arc::Grid& b) { return a.cells < b.cells || (a.cells == b.cells && a.width < b.width); });
                do {
                    ++permutations;
                    const std::vector<std::vector<arc::Grid>> pred = {g};
                    perm_ok += arc::score(task, pred) == 1.0 ? 1 : 0;
                } while (std::next_permutation(g.begin(), g.end(), [](const arc::Grid& a, const arc::Grid& b) {
                    return a.cells < b.cells || (a.cells == b.cells && a.width < b.width);
                }));
                const std::vector<std::vector<arc::Grid>> wrong = {{w1, w2}};
                wrong_zero = wrong_zero && arc::score(task, wrong) == 0.0;
                try {
                    const std::vector<std::vector<arc::Grid>> four = {{w1, w2, w1, truth}};
                    arc::score(task, four);
                    fourth_rejected = false;
                } catch (const TooManyGuesses&) {
                }
            }
        }
        ok = tb.arc.size() == 14 && bd.arc.size() == 12 && ref_tb == 1.0 && ref_bd == 1.0 && extraction > 0 &&
             id_sum == 0.0 && perm_ok == permutations && permutations == 26 * 6 && fourth_rejected && wrong_zero;
        return std::to_string(tb.arc.size()) + " top/bottom + " + std::to_string(bd.arc.size()) +
               " boundary tasks; reference " + fmt("%.3f", ref_tb) + " / " + fmt("%.3f", ref_bd) +
               "; identity " + fmt("%.3f", extraction ? id_sum / extraction : -1) + " on " +
               std::to_string(extraction) + " extraction tasks; guess permutations " + std::to_string(perm_ok) +
               "/" + std::to_string(permutations) + " credited" + (fourth_rejected ? ", 4th guess rejected" : "");
    });

    criterion("determinism", [&](bool& ok) {
        const std::vector<json> configs = {
            raven_config("det-raven", 404, standard, {{"train", 60}, {"test", 30}}, "fair", 64),
            raven_config("det-probe", 404, "probe", {{"probe", 58}}, "biased", 48),
            {{"domain", "arc"}, {"name", "det-arc"}, {"master_seed", 404}, {"suite", "all"}, {"splits", {{"probe", 26}}}},
        };
        int checked = 0, identical = 0, pgm = 0;
        for (const auto& j : configs) {
            const GenerationConfig c = parse_config(j);
            for (const auto& s : c.splits) {
                const fs::path a = scratch.path / "det" / c.name / s.name / "a";
                const fs::path b = scratch.path / "det" / c.name / s.name / "b";
                write_dataset(a, generate_one_split(c, s, 0), 0);
                const GeneratedSplit loaded = load_dataset(a);
                write_dataset(b, regenerate(loaded.manifest, 1), 1);
                ++checked;
                identical += directory_digest(a) == directory_digest(b) ? 1 : 0;
                if (fs::exists(a / "images")) {
                    for (const auto& e : fs::directory_iterator(a / "images")) {
                        pgm += read_file(e.path()) == read_file(b / "images" / e.path().filename()) ? 1 : 0;
                    }
                }
            }
        }
        ok = checked == 4 && identical == 4 && pgm == 60 + 30 + 58;
        return std::to_string(identical) + "/" + std::to_string(checked) +
               " regenerated datasets hash-identical (SHA-256 over every file), " + std::to_string(pgm) +
               " PGM renders byte-identical";
    });

    criterion("random-baseline", [&](bool& ok) {
        const GeneratedSplit s = one_split(raven_config("random", 505, standard, {{"test", 1000}}));
        const double acc = overall(run_eval(s, builtin("random"), EvalOptions{}));
        ok = std::abs(acc - 0.125) <= 0.03;
        return "random adapter accuracy " + fmt("%.3f", acc) + " over 1000 problems (need 0.125 +- 0.03)";
    });

    criterion("desk-scale", [&](bool& ok) {
        const auto t0 = Clock::now();
        const json config = raven_config("desk", 606, standard, {{"train", 300}, {"val", 100}, {"test", 100}, {"probe", 200}}, "fair", 64);
        const GenerationConfig c = parse_config(config);
        std::size_t total = 0;
        double min_acc = 1.0;
        for (const auto& s : c.splits) {
            const fs::path dir = scratch.path / "desk" / s.name;
            write_dataset(dir, generate_one_split(c, s));
            const GeneratedSplit loaded = load_dataset(dir);
            total += loaded.raven.size();
            min_acc = std::min(min_acc, overall(run_eval(loaded, builtin("oracle"), EvalOptions{})));
            raven::exploitability(loaded.raven, raven::Attack::MajorityVote);
        }
        const double t = seconds_since(t0);
        ok = total == 700 && min_acc == 1.0 && t < 300.0;
        return std::to_string(total) + " problems generated, rendered, written, reloaded, attacked and solved in " +
               fmt("%.1f", t) + " s (need < 300 s)";
    });

    criterion("full-scale", [&](bool& ok) {
        if (quick) {
            ok = false;
            return std::string("skipped (--quick)");
        }
        const auto t0 = Clock::now();
        const GenerationConfig c = parse_config(
            raven_config("full", 707, standard, {{"train", 42000}, {"val", 14000}, {"test", 14000}}));
        std::map<std::string, std::size_t> counts;
        std::set<std::uint64_t> seeds;
        std::size_t total = 0;
        for (const auto& s : c.splits) {
            const GeneratedSplit g = generate_one_split(c, s);
            counts[s.name] = g.raven.size();
            total += g.raven.size();
            for (const auto& p : g.raven) seeds.insert(p.seed);
        }
        const double t = seconds_since(t0);
        ok = counts["train"] == 42000 && counts["val"] == 14000 && counts["test"] == 14000 && seeds.size() == total;
        return std::to_string(total) + " problems (42000/14000/14000, all seeds distinct) in " + fmt("%.1f", t) + " s";
    });

    std::cout << (failures == 0 ? "ALL CRITERIA PASSED" : std::to_string(failures) + " CRITERIA FAILED") << std::endl;
    return failures == 0 ? 0 : 1;
}
