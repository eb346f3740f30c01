// conceptprobe command line.
//
//   gen raven   --family sameness --attrs color --layout center -n 100 --seed 42 -o DIR
//   gen arc     --family top-stripe-color -n 14 --seed 7 -o DIR
//   split       --config FILE [-o ROOT]
//   attack      --dataset DIR --strategy majority-vote
//   eval        --dataset DIR --adapter "CMD" --guesses 3 --report out.csv
//   report      a.csv b.csv ...
//   verify      --dataset DIR
//   render      --problem FILE --side 160 -o out.png
//   serve       --port 8080 --suites DIR
//
// Relative output paths default under $CONCEPTPROBE_DATA (else ./data).

#include <csignal>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "conceptprobe/common/error.hpp"
#include "conceptprobe/harness/adapter.hpp"
#include "conceptprobe/harness/dataset.hpp"
#include "conceptprobe/harness/eval.hpp"
#include "conceptprobe/harness/trial.hpp"
#include "conceptprobe/raven/answers.hpp"
#include "conceptprobe/raven/render.hpp"
#include "conceptprobe/raven/serialize.hpp"

using namespace conceptprobe;
using namespace conceptprobe::harness;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string underscores(std::string s) {
    std::replace(s.begin(), s.end(), '-', '_');
    return s;
}

fs::path resolve_out(const std::string& out, const std::string& name, const std::string& split) {
    if (!out.empty()) return out;
    return data_root() / name / split;
}

void write_split(const GenerationConfig& config, unsigned threads, const std::function<fs::path(const GeneratedSplit&)>& where) {
    for (const auto& s : config.splits) {
        const GeneratedSplit g = generate_one_split(config, s, threads);
        const fs::path dir = where(g);
        if (fs::exists(dir / "manifest.json")) fs::remove_all(dir);
        write_dataset(dir, g, threads);
        std::cout << s.name << ": " << g.manifest.entries.size() << " problems -> " << dir.string() << "\n"
                  << "  sha256 " << directory_digest(dir) << "\n";
    }
}

struct GenArgs {
    std::string family, attrs, layout, background, specs, suite, strategy = "fair", out, name, split = "probe";
    std::size_t n = 0;
    std::uint64_t seed = 0;
    int render = 0;
    unsigned threads = 0;
};

json raven_gen_config(const GenArgs& a) {
    json j = {{"domain", "raven"},
              {"name", a.name.empty() ? "raven" : a.name},
              {"master_seed", a.seed},
              {"answer_strategy", a.strategy},
              {"render", a.render},
              {"splits", {{a.split, a.n}}}};
    if (!a.specs.empty()) {
        if (a.specs.find('[') == std::string::npos) {
            j["specs"] = a.specs;
        } else {
            json list = json::array();
            std::stringstream ss(a.specs);
            std::string d;
            while (std::getline(ss, d, ';')) list.push_back(d);
            j["specs"] = list;
        }
        return j;
    }
    if (a.family.empty() || a.attrs.empty() || a.layout.empty())
        throw ConfigInvalid("gen raven needs --specs, or --family, --attrs and --layout");
    std::string attrs = a.attrs;
    std::replace(attrs.begin(), attrs.end(), ',', '+');
    std::string d = underscores(a.family) + "[" + attrs + "]@" + underscores(a.layout);
    if (!a.background.empty()) d += "/bg=" + a.background;
    j["specs"] = json::array({d});
    return j;
}

json arc_gen_config(const GenArgs& a) {
    json j = {{"domain", "arc"},
              {"name", a.name.empty() ? "arc" : a.name},
              {"master_seed", a.seed},
              {"suite", a.suite.empty() ? "all" : underscores(a.suite)},
              {"splits", {{a.split, a.n}}}};
    if (!a.family.empty()) {
        json fams = json::array();
        std::stringstream ss(a.family);
        std::string f;
        while (std::getline(ss, f, ',')) fams.push_back(underscores(f));
        j["families"] = fams;
    }
    return j;
}

TrialServer* g_server = nullptr;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"conceptprobe: concept-probing puzzle generators, solvers' harness and trial service"};
    app.require_subcommand(1);
    unsigned threads = 0;
    app.add_option("--threads", threads, "worker threads for generation (0 = all cores)");

    // gen ------------------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "generate one dataset");
    gen->require_subcommand(1);
    GenArgs ga;
    const auto common_gen = [&](CLI::App* c) {
        c->add_option("-n", ga.n, "number of problems")->required()->check(CLI::PositiveNumber);
        c->add_option("--seed", ga.seed, "master seed")->required();
        c->add_option("-o,--out", ga.out, "output dataset directory");
        c->add_option("--name", ga.name, "dataset name (used in ids)");
        c->add_option("--split", ga.split, "split label")->capture_default_str();
    };
    auto* gen_raven = gen->add_subcommand("raven", "RAVEN-style matrices");
    common_gen(gen_raven);
    gen_raven->add_option("--family", ga.family, "sameness | progression | arithmetic");
    gen_raven->add_option("--attrs", ga.attrs, "bound attributes, comma separated (e.g. color,outer.size)");
    gen_raven->add_option("--layout", ga.layout, "center | grid_2x2 | grid_3x3 | out_in_center | out_in_grid");
    gen_raven->add_option("--background", ga.background, "free | constant | random");
    gen_raven->add_option("--specs", ga.specs,
                          "preset (standard, sameness, progression, probe) or ';'-separated descriptors");
    gen_raven->add_option("--strategy", ga.strategy, "answer set: fair | biased")->capture_default_str();
    gen_raven->add_option("--render", ga.render, "also write PGM sheets with this panel side (32..1024)");
    auto* gen_arc = gen->add_subcommand("arc", "ARC-style grid tasks");
    common_gen(gen_arc);
    gen_arc->add_option("--family", ga.family, "family name(s), comma separated; hyphens allowed");
    gen_arc->add_option("--suite", ga.suite, "top_bottom | boundary | all");

    // split ----------------------------------------------------------------
    auto* split = app.add_subcommand("split", "generate every split of a config file");
    std::string config_file, split_out;
    split->add_option("--config", config_file, "generation config (JSON)")->required()->check(CLI::ExistingFile);
    split->add_option("-o,--out", split_out, "root directory; splits go to ROOT/<name>/<split>");

    // attack ---------------------------------------------------------------
    auto* attack = app.add_subcommand("attack", "context-blind attack on a RAVEN dataset");
    std::string dataset, strategy = "majority-vote", attack_csv;
    attack->add_option("--dataset", dataset)->required()->check(CLI::ExistingDirectory);
    attack->add_option("--strategy", strategy)->capture_default_str();
    attack->add_option("--csv", attack_csv, "also write the CSV here");

    // eval -----------------------------------------------------------------
    auto* eval = app.add_subcommand("eval", "evaluate a solver on a dataset");
    std::string adapter_cmd, builtin, batch_cmd, batch_dir, report_path, log_path, model, slices = "all";
    int guesses = 0;
    double timeout_s = 60;
    unsigned workers = 1;
    bool image_mode = false;
    eval->add_option("--dataset", dataset)->required()->check(CLI::ExistingDirectory);
    auto* o_adapter = eval->add_option("--adapter", adapter_cmd, "solver command speaking JSON lines");
    auto* o_builtin = eval->add_option("--builtin", builtin, "oracle | reference | random | identity");
    auto* o_batch = eval->add_option("--batch", batch_cmd, "solver command for directory-batch mode");
    o_adapter->excludes(o_builtin)->excludes(o_batch);
    o_builtin->excludes(o_batch);
    eval->add_option("--batch-dir", batch_dir, "work directory for --batch");
    eval->add_option("--guesses", guesses, "answers allowed (RAVEN 1, ARC up to 3; default per domain)");
    eval->add_option("--timeout", timeout_s, "seconds per problem")->capture_default_str()->check(CLI::PositiveNumber);
    eval->add_option("--workers", workers, "parallel solver processes")->capture_default_str();
    eval->add_flag("--image", image_mode, "send PGM paths instead of symbolic panels");
    eval->add_option("--model", model, "model name in the report (default: adapter name)");
    eval->add_option("--report", report_path, "write the CSV report here");
    eval->add_option("--log", log_path, "write per-problem results (JSON lines) here");
    eval->add_option("--slices", slices, "all | overall | concepts")->capture_default_str();

    // report ---------------------------------------------------------------
    auto* report = app.add_subcommand("report", "merge report CSVs into one table");
    std::vector<std::string> csvs;
    std::string merged_out;
    report->add_option("files", csvs)->required()->check(CLI::ExistingFile);
    report->add_option("-o,--out", merged_out, "write the merged CSV here");

    // verify ---------------------------------------------------------------
    auto* verify = app.add_subcommand("verify", "regenerate a dataset from its manifest and compare hashes");
    verify->add_option("--dataset", dataset)->required()->check(CLI::ExistingDirectory);

    // render ---------------------------------------------------------------
    auto* render = app.add_subcommand("render", "render one RAVEN problem file");
    std::string problem_file, render_out;
    int side = 160;
    render->add_option("--problem", problem_file)->required()->check(CLI::ExistingFile);
    render->add_option("--side", side)->capture_default_str();
    render->add_option("-o,--out", render_out, ".png or .pgm")->required();

    // serve ----------------------------------------------------------------
    auto* serve = app.add_subcommand("serve", "HTTP trial service");
    int port = 8080;
    std::string suites_dir, journal_dir, static_dir, host = "127.0.0.1";
    int image_side = 96;
    serve->add_option("--port", port)->capture_default_str();
    serve->add_option("--host", host)->capture_default_str();
    serve->add_option("--suites", suites_dir, "directory of dataset directories")->required();
    serve->add_option("--journal", journal_dir, "session journals (default SUITES/../journal)");
    serve->add_option("--static", static_dir, "serve a built UI from this directory");
    serve->add_option("--image-side", image_side)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen_raven->parsed() || gen_arc->parsed()) {
            const json j = gen_raven->parsed() ? raven_gen_config(ga) : arc_gen_config(ga);
            const GenerationConfig config = parse_config(j);
            write_split(config, threads, [&](const GeneratedSplit& g) {
                return resolve_out(ga.out, g.manifest.name, g.manifest.split);
            });
        } else if (split->parsed()) {
            json j;
            try {
                j = json::parse(read_file(config_file));
            } catch (const json::parse_error& e) {
                throw ConfigInvalid(std::string("/: malformed JSON: ") + e.what());
            }
            const GenerationConfig config = parse_config(j);
            const fs::path root = split_out.empty() ? data_root() : fs::path(split_out);
            write_split(config, threads, [&](const GeneratedSplit& g) { return root / g.manifest.name / g.manifest.split; });
        } else if (attack->parsed()) {
            const auto a = raven::parse_attack(strategy);
            if (!a) throw ConfigInvalid("unknown attack '" + strategy + "'");
            const GeneratedSplit g = load_dataset(dataset);
            if (g.manifest.domain != DatasetDomain::Raven) throw ConfigInvalid("attacks apply to RAVEN datasets");
            const std::string text = raven::to_csv(raven::exploitability(g.raven, *a));
            std::cout << text;
            if (!attack_csv.empty()) write_file(attack_csv, text);
        } else if (eval->parsed()) {
            const GeneratedSplit g = load_dataset(dataset);
            AdapterFactory factory;
            std::string name;
            const auto timeout = std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000));
            if (!builtin.empty()) {
                make_builtin(builtin);
                factory = [builtin] { return make_builtin(builtin); };
                name = builtin;
            } else if (!adapter_cmd.empty()) {
                factory = [adapter_cmd, timeout] { return make_subprocess({adapter_cmd, timeout}); };
                name = adapter_cmd;
            } else if (!batch_cmd.empty()) {
                const fs::path work = batch_dir.empty() ? fs::temp_directory_path() / "conceptprobe-batch" : fs::path(batch_dir);
                factory = [batch_cmd, work, timeout] { return make_directory_batch({batch_cmd, work, timeout}); };
                name = batch_cmd;
            } else {
                throw ConfigInvalid("eval needs --adapter, --builtin or --batch");
            }
            EvalOptions o;
            o.model = model.empty() ? name : model;
            o.guesses = guesses;
            o.workers = workers;
            o.image_mode = image_mode;
            o.dataset_dir = dataset;
            if (slices != "all" && slices != "overall" && slices != "concepts")
                throw ConfigInvalid("--slices must be all, overall or concepts");
            o.overall_slice = slices != "concepts";
            o.concept_slices = slices != "overall";
            std::ofstream log;
            if (!log_path.empty()) {
                log.open(log_path, std::ios::trunc);
                if (!log) throw std::runtime_error("cannot write " + log_path);
                o.log = &log;
            }
            const EvalRun run = run_eval(g, factory, o);
            std::cout << report_text(run.report.rows);
            std::cerr << run.report.metadata.dump() << "\n";
            if (!report_path.empty()) write_file(report_path, report_csv(run.report.rows));
        } else if (report->parsed()) {
            std::vector<ReportRow> rows;
            for (const auto& f : csvs) {
                const auto part = parse_report_csv(read_file(f));
                rows.insert(rows.end(), part.begin(), part.end());
            }
            std::cout << report_text(rows);
            if (!merged_out.empty()) write_file(merged_out, report_csv(rows));
        } else if (verify->parsed()) {
            const GeneratedSplit g = load_dataset(dataset);
            const fs::path tmp = fs::temp_directory_path() / ("conceptprobe-verify-" + std::to_string(::getpid()));
            fs::remove_all(tmp);
            write_dataset(tmp, regenerate(g.manifest, threads), threads);
            const std::string want = directory_digest(dataset);
            const std::string got = directory_digest(tmp);
            fs::remove_all(tmp);
            std::cout << "stored      " << want << "\nregenerated " << got << "\n";
            if (want != got) {
                std::cout << "MISMATCH\n";
                return 1;
            }
            std::cout << "identical\n";
        } else if (render->parsed()) {
            const raven::Problem p = raven::read_problem(read_file(problem_file));
            const raven::Bitmap bmp = raven::render_problem(p, side);
            write_file(render_out, fs::path(render_out).extension() == ".pgm" ? raven::encode_pgm(bmp)
                                                                               : raven::encode_png(bmp));
        } else if (serve->parsed()) {
            const fs::path journal = journal_dir.empty() ? fs::path(suites_dir).parent_path() / "journal" : fs::path(journal_dir);
            TrialService svc(suites_dir, journal, image_side);
            TrialServer server(svc, static_dir);
            const int bound = server.bind(host, port);
            if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
            g_server = &server;
            std::signal(SIGINT, [](int) {
                if (g_server) g_server->stop();
            });
            std::signal(SIGTERM, [](int) {
                if (g_server) g_server->stop();
            });
            std::cout << "serving " << svc.suite_names().size() << " suite(s) on http://" << host << ":" << bound
                      << "  journal " << journal.string() << std::endl;
            server.run();
            g_server = nullptr;
        }
    } catch (const SchemaViolation& e) {
        std::cerr << "error: SchemaViolation at " << (e.path().empty() ? "/" : e.path()) << ": " << e.detail() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
