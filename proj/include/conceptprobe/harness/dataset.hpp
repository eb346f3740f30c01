#pragma once

// Dataset directories and the generation configs that produce them.
//
// A dataset directory holds manifest.json, problems/<id>.json and, when
// rendering was requested, images/<id>.pgm. The manifest embeds the
// generation config, so any dataset can be regenerated from its manifest.
//
// Generation config (JSON):
//   {"domain": "raven", "name": "standard", "master_seed": 42,
//    "specs": "standard" | "sameness" | "progression" | [descriptor, ...],
//    "answer_strategy": "fair" | "biased",
//    "splits": {"train": 300, "val": 100, "test": 100}, "render": 0}
//   {"domain": "arc", "name": "arc", "master_seed": 7,
//    "suite": "top_bottom" | "boundary" | "all", "families": [name, ...],
//    "splits": {"probe": 26}}
// "probe" specs are the 21 sameness plus 8 progression variations. ARC
// "families" keeps only the suite variations of the listed families.
// Split seeds are derive_seed(master_seed, hash(split name)), so splits
// never share a seed stream. Problems cycle through the specs (or ARC
// variations) in order, giving exact counts.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "conceptprobe/arc/concepts.hpp"
#include "conceptprobe/raven/types.hpp"
#include "json.hpp"

namespace conceptprobe::harness {

enum class DatasetDomain { Raven, Arc };
std::string_view to_string(DatasetDomain d) noexcept;

struct ManifestEntry {
    std::string id;
    std::string path;  // relative to the dataset directory
    std::vector<std::string> concept_tags;

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
    DatasetDomain domain = DatasetDomain::Raven;
    std::string name;
    std::string split;
    std::uint64_t master_seed = 0;
    nlohmann::json generator;  // the config this split came from
    int render_side = 0;       // 0 = no images
    std::vector<ManifestEntry> entries;

    friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

nlohmann::json manifest_to_json(const DatasetManifest& m);
/// Throws SchemaViolation.
DatasetManifest manifest_from_json(const nlohmann::json& j);

struct SplitSpec {
    std::string name;
    std::size_t count = 0;
};

struct GenerationConfig {
    DatasetDomain domain = DatasetDomain::Raven;
    std::string name = "dataset";
    std::uint64_t master_seed = 0;
    std::vector<SplitSpec> splits;
    int render_side = 0;
    // raven
    std::vector<raven::ConceptSpec> specs;
    raven::AnswerStrategy answer_strategy = raven::AnswerStrategy::FairBisection;
    // arc
    std::vector<arc::Variation> variations;

    nlohmann::json source;  // the JSON this config was parsed from
};

/// Throws ConfigInvalid.
GenerationConfig parse_config(const nlohmann::json& j);

/// Coarse slice a concept tag reports under: the text before the first '['
/// or '/' ("sameness[color]@center" -> "sameness", "boundary/x" -> "boundary").
std::string concept_slice(std::string_view tag);

std::uint64_t split_seed(std::uint64_t master_seed, std::string_view split);

/// One generated split, held in memory.
struct GeneratedSplit {
    DatasetManifest manifest;
    std::vector<raven::Problem> raven;
    std::vector<arc::Task> arc;
};

/// Generates every split of the config. Throws GenerationExhausted or
/// ConfigInvalid.
std::vector<GeneratedSplit> build_split(const GenerationConfig& config, unsigned threads = 0);
GeneratedSplit generate_one_split(const GenerationConfig& config, const SplitSpec& split, unsigned threads = 0);

/// Regenerates a split from the config recorded in its manifest.
GeneratedSplit regenerate(const DatasetManifest& manifest, unsigned threads = 0);

/// Writes manifest, problem files and (if render_side > 0) PGM sheets.
void write_dataset(const std::filesystem::path& dir, const GeneratedSplit& split, unsigned threads = 0);

/// Reads a dataset directory; every listed path must exist and parse.
GeneratedSplit load_dataset(const std::filesystem::path& dir);

/// SHA-256 over every file under `dir`, in sorted relative-path order.
std::string directory_digest(const std::filesystem::path& dir);

/// Default data root: $CONCEPTPROBE_DATA, else "./data".
std::filesystem::path data_root();

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace conceptprobe::harness
