#include <map>
#include <set>

#include "conceptprobe/common/error.hpp"
#include "conceptprobe/harness/dataset.hpp"
#include "conceptprobe/raven/generator.hpp"
#include "doctest.h"
#include "temp_dir.hpp"

using namespace conceptprobe;
using namespace conceptprobe::harness;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json desk_config() {
    return {{"domain", "raven"},
            {"name", "desk"},
            {"master_seed", 42},
            {"specs", "standard"},
            {"splits", {{"train", 300}, {"val", 100}, {"test", 100}}}};
}

}  // namespace

TEST_CASE("parse_config rejects malformed configs") {
    const auto bad = [](json j) { CHECK_THROWS_AS(parse_config(j), ConfigInvalid); };
    bad(json::array());
    bad({{"master_seed", 1}, {"splits", {{"a", 1}}}});
    json j = desk_config();
    j["domain"] = "chess";
    bad(j);
    j = desk_config();
    j.erase("master_seed");
    bad(j);
    j = desk_config();
    j["master_seed"] = -3;
    bad(j);
    j = desk_config();
    j["splits"] = json::object();
    bad(j);
    j = desk_config();
    j["splits"]["train"] = 0;
    bad(j);
    j = desk_config();
    j["splits"] = {{"../up", 3}};
    bad(j);
    j = desk_config();
    j["specs"] = {"sameness[colour]@center"};
    bad(j);
    j = desk_config();
    j["specs"] = "everything";
    bad(j);
    j = desk_config();
    j["render"] = 16;
    bad(j);
    j = desk_config();
    j["answer_strategy"] = "lopsided";
    bad(j);
    bad({{"domain", "arc"}, {"master_seed", 1}, {"splits", {{"p", 1}}}, {"families", {"no_such_family"}}});
    bad({{"domain", "arc"}, {"master_seed", 1}, {"splits", {{"p", 1}}}, {"render", 64}});

    try {
        j = desk_config();
        j["specs"] = {"sameness[color]@center", "sameness[colour]@center"};
        parse_config(j);
        FAIL("expected ConfigInvalid");
    } catch (const ConfigInvalid& e) {
        CHECK(std::string(e.what()).rfind("/specs/1", 0) == 0);
    }
}

TEST_CASE("concept_slice") {
    CHECK(concept_slice("sameness[color]@center") == "sameness");
    CHECK(concept_slice("progression[outer.size]@out_in_center") == "progression");
    CHECK(concept_slice("top_bottom/extract_topmost_object") == "top_bottom");
    CHECK(concept_slice("plain") == "plain");
}

TEST_CASE("split seeds depend only on master seed and split name") {
    CHECK(split_seed(1, "train") == split_seed(1, "train"));
    CHECK(split_seed(1, "train") != split_seed(1, "test"));
    CHECK(split_seed(1, "train") != split_seed(2, "train"));
}

TEST_CASE("build_split: desk scale counts, disjoint seeds, determinism") {
    const GenerationConfig config = parse_config(desk_config());
    const auto splits = build_split(config);
    REQUIRE(splits.size() == 3);
    std::map<std::string, std::size_t> counts;
    std::set<std::uint64_t> seeds;
    std::set<std::string> ids;
    std::size_t total = 0;
    for (const auto& s : splits) {
        counts[s.manifest.split] = s.manifest.entries.size();
        CHECK(s.raven.size() == s.manifest.entries.size());
        CHECK(s.manifest.master_seed == 42);
        CHECK(s.manifest.generator == desk_config());
        for (std::size_t i = 0; i < s.raven.size(); ++i) {
            CHECK(s.raven[i].id == s.manifest.entries[i].id);
            CHECK(s.manifest.entries[i].path == "problems/" + s.raven[i].id + ".json");
            CHECK_FALSE(s.manifest.entries[i].concept_tags.empty());
            seeds.insert(s.raven[i].seed);
            ids.insert(s.raven[i].id);
            ++total;
        }
    }
    CHECK(counts == std::map<std::string, std::size_t>{{"test", 100}, {"train", 300}, {"val", 100}});
    CHECK(seeds.size() == total);
    CHECK(ids.size() == total);

    // Specs are used round-robin.
    const auto& train = splits[0].manifest.split == "train" ? splits[0] : splits[1];
    const std::size_t ns = config.specs.size();
    for (std::size_t i = 0; i < 2 * ns; ++i) {
        CHECK(train.raven[i].concept_tags.front() == config.specs[i % ns]);
    }

    const auto again = build_split(config, 1);
    for (std::size_t k = 0; k < splits.size(); ++k) {
        CHECK(again[k].manifest == splits[k].manifest);
        CHECK(again[k].raven == splits[k].raven);
    }
}

TEST_CASE("probe preset yields 210 sameness and 80 progression problems") {
    const json j = {{"domain", "raven"}, {"name", "probe"}, {"master_seed", 3}, {"specs", "probe"},
                    {"splits", {{"probe", 290}}}};
    const auto split = build_split(parse_config(j)).front();
    std::map<std::string, int> per;
    for (const auto& e : split.manifest.entries) ++per[concept_slice(e.concept_tags.front())];
    CHECK(per == std::map<std::string, int>{{"progression", 80}, {"sameness", 210}});
}

TEST_CASE("ARC configs") {
    const json j = {{"domain", "arc"}, {"name", "tb"}, {"master_seed", 7}, {"suite", "top_bottom"},
                    {"splits", {{"probe", 14}}}};
    const auto split = build_split(parse_config(j)).front();
    REQUIRE(split.arc.size() == 14);
    std::map<std::string, int> per;
    for (std::size_t i = 0; i < 14; ++i) {
        CHECK(split.arc[i].id == split.manifest.entries[i].id);
        REQUIRE(split.manifest.entries[i].concept_tags.size() == 1);
        CHECK(split.manifest.entries[i].concept_tags[0] == *split.arc[i].concept_tag);
        ++per[split.manifest.entries[i].concept_tags[0]];
        // ids carry no family name
        CHECK(split.arc[i].id.find("stripe") == std::string::npos);
    }
    CHECK(per["top_bottom/top_stripe_color"] == 5);
    CHECK(per["top_bottom/extract_topmost_object"] == 5);
    CHECK(per["top_bottom/move_below_stripe"] == 4);

    const json only = {{"domain", "arc"},     {"name", "one"},
                       {"master_seed", 7},    {"families", {"move_to_closest_side"}},
                       {"splits", {{"x", 6}}}};
    const auto c = parse_config(only);
    CHECK(c.variations.size() == 4);
    const auto closest = build_split(c);
    for (const auto& e : closest.front().manifest.entries)
        CHECK(e.concept_tags[0] == "boundary/move_to_closest_side");
}

TEST_CASE("write, load and regenerate are byte-identical") {
    testutil::TempDir tmp;
    SUBCASE("raven with renders") {
        json j = desk_config();
        j["splits"] = {{"test", 12}};
        j["render"] = 48;
        j["answer_strategy"] = "biased";
        const auto split = build_split(parse_config(j)).front();
        write_dataset(tmp / "a", split);
        CHECK(fs::exists(tmp / "a" / "images" / (split.manifest.entries[0].id + ".pgm")));
        const auto loaded = load_dataset(tmp / "a");
        CHECK(loaded.manifest == split.manifest);
        CHECK(loaded.raven == split.raven);

        write_dataset(tmp / "b", regenerate(loaded.manifest));
        CHECK(directory_digest(tmp / "a") == directory_digest(tmp / "b"));

        json k = j;
        k["master_seed"] = 43;
        write_dataset(tmp / "c", build_split(parse_config(k)).front());
        CHECK(directory_digest(tmp / "a") != directory_digest(tmp / "c"));
    }
    SUBCASE("arc") {
        const json j = {{"domain", "arc"}, {"name", "bd"}, {"master_seed", 11}, {"suite", "boundary"},
                        {"splits", {{"probe", 12}}}};
        const auto split = build_split(parse_config(j)).front();
        write_dataset(tmp / "a", split);
        const auto loaded = load_dataset(tmp / "a");
        CHECK(loaded.arc == split.arc);
        write_dataset(tmp / "b", regenerate(loaded.manifest));
        CHECK(directory_digest(tmp / "a") == directory_digest(tmp / "b"));
    }
}

TEST_CASE("load_dataset failures") {
    testutil::TempDir tmp;
    json j = desk_config();
    j["splits"] = {{"test", 3}};
    const auto split = build_split(parse_config(j)).front();
    write_dataset(tmp.path(), split);
    fs::remove(tmp.path() / split.manifest.entries[1].path);
    try {
        load_dataset(tmp.path());
        FAIL("expected SchemaViolation");
    } catch (const SchemaViolation& e) {
        CHECK(e.path() == "/entries/1/path");
    }

    json m = manifest_to_json(split.manifest);
    m["entries"][2].erase("id");
    try {
        manifest_from_json(m);
        FAIL("expected SchemaViolation");
    } catch (const SchemaViolation& e) {
        CHECK(e.path() == "/entries/2/id");
    }
    m = manifest_to_json(split.manifest);
    m["format"] = 9;
    CHECK_THROWS_AS(manifest_from_json(m), SchemaViolation);

    json regen_bad = manifest_to_json(split.manifest);
    regen_bad["split"] = "nope";
    CHECK_THROWS_AS(regenerate(manifest_from_json(regen_bad)), ConfigInvalid);
}
