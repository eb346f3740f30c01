#include <set>

#include "conceptprobe/common/error.hpp"
#include "conceptprobe/raven/generator.hpp"
#include "conceptprobe/raven/oracle.hpp"
#include "conceptprobe/raven/rules.hpp"
#include "doctest.h"
#include "raven_helpers.hpp"

using namespace conceptprobe;
using namespace conceptprobe::raven;
using namespace testutil;

namespace {

std::vector<ConceptSpec> every_spec() {
    auto all = default_sameness_specs();
    for (const auto& s : default_progression_specs()) all.push_back(s);
    for (const auto& s : standard_specs()) all.push_back(s);
    return all;
}

}  // namespace

TEST_CASE("sample_problem is deterministic in spec and seed") {
    for (const auto& spec : every_spec()) {
        CAPTURE(describe(spec));
        const Problem a = sample_problem(spec, 42);
        const Problem b = sample_problem(spec, 42);
        CHECK(a == b);
        CHECK_FALSE(a == sample_problem(spec, 43));
    }
}

TEST_CASE("generated problems are closed, consistent and uniquely solvable") {
    for (const auto strategy : {AnswerStrategy::BiasedPerturbation, AnswerStrategy::FairBisection}) {
        GenerationOptions opts;
        opts.answer_strategy = strategy;
        for (const auto& spec : every_spec()) {
            CAPTURE(describe(spec));
            for (std::uint64_t seed = 0; seed < 5; ++seed) {
                const Problem p = sample_problem(spec, seed, opts);
                const RavenMatrix& m = p.matrix;
                CHECK(m.layout == spec.layout);
                CHECK(p.answer_strategy == strategy);
                for (const auto& panel : m.context) {
                    CHECK(panel.layout == spec.layout);
                    CHECK_NOTHROW(validate_panel(panel));
                }
                for (const auto& panel : p.answers) CHECK_NOTHROW(validate_panel(panel));
                CHECK(p.answers[p.correct_index] == m.ground_truth);

                const std::array<Panel, 3> r1 = {m.context[0], m.context[1], m.context[2]};
                const std::array<Panel, 3> r2 = {m.context[3], m.context[4], m.context[5]};
                const std::array<Panel, 3> r3 = {m.context[6], m.context[7], m.ground_truth};
                CHECK(check_row(m.ruleset, r1));
                CHECK(check_row(m.ruleset, r2));
                CHECK(check_row(m.ruleset, r3));

                CHECK(solve(p).is_unique(p.correct_index));
                CHECK(is_well_posed(m, p.answers, p.correct_index));

                CHECK(distinct_panels(p.answers) == 8);
            }
        }
    }
}

TEST_CASE("concept tags match the rules actually used") {
    for (const auto& spec : every_spec()) {
        CAPTURE(describe(spec));
        const Problem p = sample_problem(spec, 9);
        REQUIRE(p.concept_tags.size() == 1);
        CHECK(p.concept_tags.front() == spec);
        for (const AttrKey k : spec.bound_attributes) {
            bool bound = false;
            for (const Rule& r : p.matrix.ruleset.rules) {
                if (r.key == k) {
                    bound = true;
                    CHECK(r.relation == family_relation(spec.family));
                    if (spec.family != Family::Sameness) {
                        CHECK(std::find(spec.params.begin(), spec.params.end(), r.param) != spec.params.end());
                    }
                }
            }
            CHECK(bound);
        }
    }
}

TEST_CASE("default suites have the expected shape") {
    const auto same = default_sameness_specs();
    const auto prog = default_progression_specs();
    CHECK(same.size() == 21);
    CHECK(prog.size() == 8);
    std::set<LayoutKind> layouts;
    for (const auto& s : same) {
        CHECK(s.family == Family::Sameness);
        CHECK_NOTHROW(validate_spec(s));
        layouts.insert(s.layout);
    }
    CHECK(layouts.size() == kAllLayouts.size());
    for (const auto& s : prog) CHECK(s.family == Family::Progression);

    const Dataset ds = concept_suite(same, 10, 2024);
    CHECK(ds.problems.size() == 210);
    CHECK(ds.problems[0].id == "raven-s000-00000");
    CHECK(ds.problems[209].id == "raven-s020-00009");
    CHECK(concept_suite(prog, 10, 2024).problems.size() == 80);

    // worker count does not change the output
    const Dataset one = concept_suite(prog, 3, 5, {}, "raven", 1);
    const Dataset many = concept_suite(prog, 3, 5, {}, "raven", 4);
    CHECK(one.problems == many.problems);
}

TEST_CASE("impossible requests fail loudly") {
    CHECK_THROWS_AS(sample_problem(make_spec(Family::Arithmetic, {key(AttributeName::Shape)}, LayoutKind::Center), 1),
                    InvalidSpec);
    Rng rng(1);
    std::map<AttrKey, int> req = {{key(AttributeName::Number), 3}, {key(AttributeName::Position), 0b1}};
    CHECK_FALSE(build_panel(LayoutKind::Grid2x2, req, rng).has_value());
    req = {{key(AttributeName::Number), 2}};
    const auto p = build_panel(LayoutKind::Grid3x3, req, rng);
    REQUIRE(p.has_value());
    CHECK(p->entities.size() == 2);
}
