#include "conceptprobe/harness/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "conceptprobe/common/digest.hpp"
#include "conceptprobe/common/error.hpp"
#include "conceptprobe/common/parallel.hpp"
#include "conceptprobe/common/random.hpp"
#include "conceptprobe/raven/generator.hpp"
#include "conceptprobe/raven/render.hpp"
#include "conceptprobe/raven/serialize.hpp"

namespace conceptprobe::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kManifestFormat = 1;

bool non_negative(const json& j) {
    return j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0);
}

bool safe_name(std::string_view s) {
    if (s.empty() || s.size() > 64 || s == "." || s == "..") return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
    });
}

std::optional<DatasetDomain> parse_domain(std::string_view s) {
    if (s == "raven") return DatasetDomain::Raven;
    if (s == "arc") return DatasetDomain::Arc;
    return std::nullopt;
}

std::string entry_id(const std::string& name, const std::string& split, std::size_t i) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%06zu", i);
    return name + "-" + split + "-" + buf;
}

std::vector<raven::ConceptSpec> preset_specs(std::string_view name) {
    if (name == "standard") return raven::standard_specs();
    if (name == "sameness") return raven::default_sameness_specs();
    if (name == "progression") return raven::default_progression_specs();
    if (name == "probe") {
        auto out = raven::default_sameness_specs();
        const auto prog = raven::default_progression_specs();
        out.insert(out.end(), prog.begin(), prog.end());
        return out;
    }
    throw ConfigInvalid("/specs: unknown preset '" + std::string(name) + "'");
}

std::vector<arc::Variation> preset_suite(std::string_view name) {
    if (name == "top_bottom") return arc::default_top_bottom_suite();
    if (name == "boundary") return arc::default_boundary_suite();
    if (name == "all") {
        auto out = arc::default_top_bottom_suite();
        const auto b = arc::default_boundary_suite();
        out.insert(out.end(), b.begin(), b.end());
        return out;
    }
    throw ConfigInvalid("/suite: unknown suite '" + std::string(name) + "'");
}

}  // namespace

std::string_view to_string(DatasetDomain d) noexcept { return d == DatasetDomain::Raven ? "raven" : "arc"; }

std::string concept_slice(std::string_view tag) {
    return std::string(tag.substr(0, std::min(tag.find('['), tag.find('/'))));
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

json manifest_to_json(const DatasetManifest& m) {
    json entries = json::array();
    for (const auto& e : m.entries) {
        entries.push_back({{"id", e.id}, {"path", e.path}, {"concept_tags", e.concept_tags}});
    }
    return {{"format", kManifestFormat},  {"domain", to_string(m.domain)}, {"name", m.name},
            {"split", m.split},           {"master_seed", m.master_seed},  {"generator", m.generator},
            {"render_side", m.render_side}, {"entries", std::move(entries)}};
}

DatasetManifest manifest_from_json(const json& j) {
    if (!j.is_object()) throw SchemaViolation("", "manifest must be an object");
    const auto need = [&](const char* field) -> const json& {
        if (!j.contains(field)) throw SchemaViolation(std::string("/") + field, "missing");
        return j.at(field);
    };
    if (need("format") != kManifestFormat) throw SchemaViolation("/format", "unsupported manifest format");
    DatasetManifest m;
    const json& domain = need("domain");
    if (!domain.is_string() || !parse_domain(domain.get<std::string>()))
        throw SchemaViolation("/domain", "expected \"raven\" or \"arc\"");
    m.domain = *parse_domain(domain.get<std::string>());
    for (const char* f : {"name", "split"}) {
        if (!need(f).is_string()) throw SchemaViolation(std::string("/") + f, "expected a string");
    }
    m.name = j["name"].get<std::string>();
    m.split = j["split"].get<std::string>();
    if (!non_negative(need("master_seed"))) throw SchemaViolation("/master_seed", "expected an unsigned integer");
    m.master_seed = j["master_seed"].get<std::uint64_t>();
    m.generator = need("generator");
    if (j.contains("render_side")) {
        if (!j["render_side"].is_number_integer()) throw SchemaViolation("/render_side", "expected an integer");
        m.render_side = j["render_side"].get<int>();
    }
    const json& entries = need("entries");
    if (!entries.is_array()) throw SchemaViolation("/entries", "expected an array");
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const std::string at = "/entries/" + std::to_string(i);
        const json& e = entries[i];
        if (!e.is_object()) throw SchemaViolation(at, "expected an object");
        ManifestEntry entry;
        for (const char* f : {"id", "path"}) {
            if (!e.contains(f) || !e[f].is_string()) throw SchemaViolation(at + "/" + f, "expected a string");
        }
        entry.id = e["id"].get<std::string>();
        entry.path = e["path"].get<std::string>();
        if (e.contains("concept_tags")) {
            const json& tags = e["concept_tags"];
            if (!tags.is_array()) throw SchemaViolation(at + "/concept_tags", "expected an array");
            for (std::size_t t = 0; t < tags.size(); ++t) {
                if (!tags[t].is_string())
                    throw SchemaViolation(at + "/concept_tags/" + std::to_string(t), "expected a string");
                entry.concept_tags.push_back(tags[t].get<std::string>());
            }
        }
        m.entries.push_back(std::move(entry));
    }
    return m;
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

GenerationConfig parse_config(const json& j) {
    if (!j.is_object()) throw ConfigInvalid("/: config must be a JSON object");
    GenerationConfig c;
    c.source = j;

    if (!j.contains("domain") || !j["domain"].is_string() || !parse_domain(j["domain"].get<std::string>()))
        throw ConfigInvalid("/domain: expected \"raven\" or \"arc\"");
    c.domain = *parse_domain(j["domain"].get<std::string>());

    if (j.contains("name")) {
        if (!j["name"].is_string() || !safe_name(j["name"].get<std::string>()))
            throw ConfigInvalid("/name: expected a name of letters, digits, '_', '-' or '.'");
        c.name = j["name"].get<std::string>();
    }
    if (!j.contains("master_seed") || !non_negative(j["master_seed"]))
        throw ConfigInvalid("/master_seed: expected an unsigned integer");
    c.master_seed = j["master_seed"].get<std::uint64_t>();

    if (!j.contains("splits") || !j["splits"].is_object() || j["splits"].empty())
        throw ConfigInvalid("/splits: expected a non-empty object of split name to count");
    for (const auto& [name, count] : j["splits"].items()) {
        if (!safe_name(name)) throw ConfigInvalid("/splits/" + name + ": bad split name");
        if (!non_negative(count) || count.get<std::uint64_t>() == 0)
            throw ConfigInvalid("/splits/" + name + ": expected a positive count");
        c.splits.push_back({name, count.get<std::size_t>()});
    }

    if (j.contains("render")) {
        if (!j["render"].is_number_integer()) throw ConfigInvalid("/render: expected an integer side length");
        c.render_side = j["render"].get<int>();
        if (c.render_side != 0 && (c.render_side < raven::SheetGeometry::kMinSide ||
                                   c.render_side > raven::SheetGeometry::kMaxSide))
            throw ConfigInvalid("/render: side must be 0 or within [32, 1024]");
        if (c.render_side != 0 && c.domain == DatasetDomain::Arc)
            throw ConfigInvalid("/render: only RAVEN datasets are rendered");
    }

    if (c.domain == DatasetDomain::Raven) {
        const json specs = j.value("specs", json("standard"));
        if (specs.is_string()) {
            c.specs = preset_specs(specs.get<std::string>());
        } else if (specs.is_array() && !specs.empty()) {
            for (std::size_t i = 0; i < specs.size(); ++i) {
                const std::string at = "/specs/" + std::to_string(i);
                if (!specs[i].is_string()) throw ConfigInvalid(at + ": expected a concept descriptor");
                try {
                    c.specs.push_back(raven::parse_descriptor(specs[i].get<std::string>()));
                    raven::validate_spec(c.specs.back());
                } catch (const InvalidSpec& e) {
                    throw ConfigInvalid(at + ": " + e.what());
                }
            }
        } else {
            throw ConfigInvalid("/specs: expected a preset name or a non-empty descriptor list");
        }
        if (j.contains("answer_strategy")) {
            const auto s = j["answer_strategy"].is_string()
                               ? raven::parse_answer_strategy(j["answer_strategy"].get<std::string>())
                               : std::nullopt;
            if (!s) throw ConfigInvalid("/answer_strategy: expected \"fair\" or \"biased\"");
            c.answer_strategy = *s;
        }
    } else {
        if (j.contains("suite") && !j["suite"].is_string()) throw ConfigInvalid("/suite: expected a suite name");
        c.variations = preset_suite(j.value("suite", std::string("all")));
        if (j.contains("families")) {
            const json& fams = j["families"];
            if (!fams.is_array() || fams.empty()) throw ConfigInvalid("/families: expected a non-empty array");
            std::set<arc::Family> keep;
            for (std::size_t i = 0; i < fams.size(); ++i) {
                const auto f = fams[i].is_string() ? arc::parse_family(fams[i].get<std::string>()) : std::nullopt;
                if (!f) throw ConfigInvalid("/families/" + std::to_string(i) + ": unknown family");
                keep.insert(*f);
            }
            std::erase_if(c.variations, [&](const arc::Variation& v) { return !keep.contains(v.family); });
            if (c.variations.empty()) throw ConfigInvalid("/families: no variation of these families in the suite");
        }
    }
    return c;
}

std::uint64_t split_seed(std::uint64_t master_seed, std::string_view split) {
    // FNV-1a of the split name keeps the mapping independent of split order.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : split) h = (h ^ ch) * 0x100000001b3ULL;
    return derive_seed(master_seed, h);
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

GeneratedSplit generate_one_split(const GenerationConfig& config, const SplitSpec& split, unsigned threads) {
    GeneratedSplit out;
    DatasetManifest& m = out.manifest;
    m.domain = config.domain;
    m.name = config.name;
    m.split = split.name;
    m.master_seed = config.master_seed;
    m.generator = config.source;
    m.render_side = config.render_side;
    m.entries.resize(split.count);
    const std::uint64_t seed = split_seed(config.master_seed, split.name);

    if (config.domain == DatasetDomain::Raven) {
        if (config.specs.empty()) throw ConfigInvalid("/specs: empty");
        const raven::GenerationOptions options{config.answer_strategy};
        const std::size_t ns = config.specs.size();
        out.raven.resize(split.count);
        parallel_for(split.count, threads, [&](std::size_t i) {
            raven::Problem p = raven::sample_problem(config.specs[i % ns], raven::problem_seed(seed, i % ns, i / ns),
                                                     options);
            p.id = entry_id(config.name, split.name, i);
            ManifestEntry& e = m.entries[i];
            e.id = p.id;
            e.path = "problems/" + p.id + ".json";
            for (const auto& t : p.concept_tags) e.concept_tags.push_back(raven::describe(t));
            out.raven[i] = std::move(p);
        });
    } else {
        if (config.variations.empty()) throw ConfigInvalid("/suite: empty");
        const std::size_t nv = config.variations.size();
        out.arc.resize(split.count);
        parallel_for(split.count, threads, [&](std::size_t i) {
            const arc::Variation& v = config.variations[i % nv];
            arc::Task t = arc::generate_task(v.family, v.params, derive_seed(seed, i),
                                             entry_id(config.name, split.name, i));
            ManifestEntry& e = m.entries[i];
            e.id = t.id;
            e.path = "problems/" + t.id + ".json";
            if (t.concept_tag) e.concept_tags.push_back(*t.concept_tag);
            out.arc[i] = std::move(t);
        });
    }
    return out;
}

std::vector<GeneratedSplit> build_split(const GenerationConfig& config, unsigned threads) {
    std::vector<GeneratedSplit> out;
    for (const auto& s : config.splits) out.push_back(generate_one_split(config, s, threads));
    return out;
}

GeneratedSplit regenerate(const DatasetManifest& manifest, unsigned threads) {
    const GenerationConfig config = parse_config(manifest.generator);
    for (const auto& s : config.splits) {
        if (s.name == manifest.split) return generate_one_split(config, s, threads);
    }
    throw ConfigInvalid("/splits: manifest split '" + manifest.split + "' is not in its generator config");
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, std::string_view bytes) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_dataset(const fs::path& dir, const GeneratedSplit& split, unsigned threads) {
    const DatasetManifest& m = split.manifest;
    fs::create_directories(dir / "problems");
    if (m.render_side > 0) fs::create_directories(dir / "images");
    parallel_for(m.entries.size(), threads, [&](std::size_t i) {
        const ManifestEntry& e = m.entries[i];
        if (m.domain == DatasetDomain::Raven) {
            write_file(dir / e.path, raven::write_problem(split.raven[i]) + "\n");
            if (m.render_side > 0) {
                write_file(dir / "images" / (e.id + ".pgm"),
                           raven::encode_pgm(raven::render_problem(split.raven[i], m.render_side)));
            }
        } else {
            write_file(dir / e.path, arc::write_task(split.arc[i]) + "\n");
        }
    });
    write_file(dir / "manifest.json", manifest_to_json(m).dump(2) + "\n");
}

GeneratedSplit load_dataset(const fs::path& dir) {
    GeneratedSplit out;
    json j;
    try {
        j = json::parse(read_file(dir / "manifest.json"));
    } catch (const json::parse_error& e) {
        throw SchemaViolation("", std::string("manifest.json: malformed JSON: ") + e.what());
    }
    out.manifest = manifest_from_json(j);
    const auto& entries = out.manifest.entries;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const fs::path p = dir / entries[i].path;
        if (!fs::exists(p)) throw SchemaViolation("/entries/" + std::to_string(i) + "/path", "missing file " + p.string());
        const std::string text = read_file(p);
        if (out.manifest.domain == DatasetDomain::Raven) {
            out.raven.push_back(raven::read_problem(text));
        } else {
            out.arc.push_back(arc::parse_task(text, entries[i].id));
        }
    }
    return out;
}

std::string directory_digest(const fs::path& dir) {
    std::vector<std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) files.push_back(fs::relative(e.path(), dir).generic_string());
    }
    std::sort(files.begin(), files.end());
    Sha256 h;
    for (const auto& f : files) {
        const std::string bytes = read_file(dir / f);
        h.update(f).update(std::string_view("\0", 1)).update(std::to_string(bytes.size())).update(
            std::string_view("\0", 1));
        h.update(bytes);
    }
    return h.hex();
}

fs::path data_root() {
    const char* env = std::getenv("CONCEPTPROBE_DATA");
    return env && *env ? fs::path(env) : fs::path("data");
}

}  // namespace conceptprobe::harness
