#include <fstream>
#include <set>
#include <sstream>

#include "conceptprobe/arc/concepts.hpp"
#include "conceptprobe/common/error.hpp"
#include "conceptprobe/common/random.hpp"
#include "doctest.h"

using namespace conceptprobe;
using namespace conceptprobe::arc;

namespace {

Task fixture(Family f) {
    std::ifstream in(std::string(CONCEPTPROBE_FIXTURES) + "/arc/" + std::string(to_string(f)) + ".json");
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_task(ss.str(), std::string(to_string(f)));
}

std::vector<Task> all_default_tasks(std::uint64_t seed) {
    auto v = default_top_bottom_suite();
    const auto b = default_boundary_suite();
    v.insert(v.end(), b.begin(), b.end());
    return generate_suite(v, seed);
}

}  // namespace

TEST_CASE("hand-worked fixtures") {
    for (Family f : kAllFamilies) {
        CAPTURE(to_string(f));
        Task t = fixture(f);
        CHECK(validate_task(t, f));
        for (const auto& p : t.test) CHECK(reference_transform(f, p.input) == p.output);

        t.test[0].output.cells[0] = static_cast<std::uint8_t>((t.test[0].output.cells[0] + 1) % kColors);
        CHECK_FALSE(validate_task(t, f));
    }
}

TEST_CASE("reference transforms on small scenes") {
    const Grid stripes = make_grid({{0, 0, 0}, {2, 2, 2}, {3, 3, 3}});
    CHECK(reference_transform(Family::TopStripeColor, stripes) == make_grid({{2}}));

    Grid one(6, 6);
    one.set(2, 3, 4);
    one.set(3, 3, 4);
    one.set(3, 4, 4);
    CHECK(reference_transform(Family::ExtractTopmostObject, one) == make_grid({{4, 0}, {4, 4}}));

    CHECK_THROWS_AS(reference_transform(Family::TopStripeColor, Grid(3, 3)), SceneContractViolation);
    CHECK_THROWS_AS(reference_transform(Family::MoveToColoredBoundary, one), SceneContractViolation);
    CHECK_THROWS_AS(reference_transform(Family::StripeReachingBoundary, one), SceneContractViolation);
    CHECK_THROWS_AS(reference_transform(Family::MoveToClosestVerticalBoundary, one), SceneContractViolation);
    Grid tie(4, 4);
    tie.set(1, 0, 5);
    tie.set(1, 3, 6);
    CHECK_THROWS_AS(reference_transform(Family::ExtractTopmostObject, tie), SceneContractViolation);
    try {
        reference_transform(Family::MoveObjectBelowStripe, stripes);
        FAIL("two stripes accepted");
    } catch (const SceneContractViolation& e) {
        CHECK(std::string(e.what()).find("exactly one stripe") != std::string::npos);
    }
}

TEST_CASE("closest side matches per-object translation") {
    FamilyParams p;
    p.min_objects = 1;
    p.max_objects = 4;
    p.min_height = 14;
    p.max_height = 20;
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        const Task t = generate_task(Family::MoveToClosestVerticalBoundary, p, rng.next());
        for (const auto& pair : t.train) {
            const Grid& in = pair.input;
            Grid expected = in;
            Grid inner = in;
            for (int r = 0; r < in.height; ++r) {
                inner.set(r, 0, 0);
                inner.set(r, in.width - 1, 0);
            }
            for (const auto& o : components(inner)) {
                const bool left = o.left - 1 <= in.width - 2 - o.right;
                expected = translate_until_contact(expected, o, left ? Direction::Left : Direction::Right).grid;
            }
            CHECK(reference_transform(Family::MoveToClosestVerticalBoundary, in) == expected);
        }
    }
}

TEST_CASE("generated tasks are self-consistent, deterministic and diverse") {
    const auto tasks = all_default_tasks(17);
    CHECK(tasks == all_default_tasks(17));
    for (const auto& t : tasks) {
        CAPTURE(t.id);
        REQUIRE(t.concept_tag.has_value());
        const Family f = *parse_family(t.concept_tag->substr(t.concept_tag->find('/') + 1));
        CHECK(validate_task(t, f));
        std::vector<std::vector<Grid>> preds;
        for (const auto& p : t.test) preds.push_back({reference_transform(f, p.input)});
        CHECK(score(t, preds) == 1.0);
        CHECK(parse_task(write_task(t), t.id) == t);
        const auto colors = [](const Grid& g) { return std::set<int>(g.cells.begin(), g.cells.end()); };
        const auto cells = [](const Grid& g) {
            std::set<std::pair<int, int>> out;
            for (int r = 0; r < g.height; ++r)
                for (int c = 0; c < g.width; ++c)
                    if (g.at(r, c) != 0) out.insert({r, c});
            return out;
        };
        for (std::size_t i = 0; i < t.train.size(); ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                CHECK(colors(t.train[i].input) != colors(t.train[j].input));
                CHECK(cells(t.train[i].input) != cells(t.train[j].input));
            }
        }
    }
}

TEST_CASE("suite shape") {
    const auto tb = default_top_bottom_suite();
    const auto bd = default_boundary_suite();
    CHECK(tb.size() == 14);
    CHECK(bd.size() == 12);
    for (const auto& v : tb) CHECK(family_group(v.family) == "top_bottom");
    for (const auto& v : bd) CHECK(family_group(v.family) == "boundary");
}

TEST_CASE("identity and constant baselines score zero") {
    Rng rng(9);
    for (Family f : kAllFamilies) {
        CAPTURE(to_string(f));
        for (int i = 0; i < 100; ++i) {
            const Task t = generate_task(f, FamilyParams{}, rng.next());
            std::vector<std::vector<Grid>> identity;
            std::vector<std::vector<Grid>> constant;
            for (const auto& p : t.test) {
                identity.push_back({p.input});
                constant.push_back({Grid(1, 1, 0)});
            }
            CHECK(score(t, identity) == 0.0);
            if (is_extraction(f)) CHECK(score(t, constant) == 0.0);
        }
    }
}

TEST_CASE("bad params are rejected") {
    FamilyParams p;
    p.demonstrations = 1;
    CHECK_THROWS_AS(generate_task(Family::TopStripeColor, p, 1), InvalidSpec);
    p = {};
    p.max_width = 31;
    CHECK_THROWS_AS(generate_task(Family::TopStripeColor, p, 1), InvalidSpec);
    p = {};
    p.min_height = p.max_height = 3;
    p.min_width = p.max_width = 3;
    p.min_objects = p.max_objects = 6;
    CHECK_THROWS_AS(generate_task(Family::ExtractTopmostObject, p, 1), GenerationExhausted);
}
