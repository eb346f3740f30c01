#include "conceptprobe/raven/serialize.hpp"

#include <istream>
#include <ostream>

#include "conceptprobe/common/error.hpp"

namespace conceptprobe::raven {

using nlohmann::json;

namespace {

const json& field(const json& obj, const char* name, const std::string& path) {
    if (!obj.is_object()) throw SchemaViolation(path.empty() ? "/" : path, "expected an object");
    const auto it = obj.find(name);
    if (it == obj.end()) throw SchemaViolation(path + "/" + name, "missing field");
    return *it;
}

int int_field(const json& obj, const char* name, const std::string& path) {
    const json& v = field(obj, name, path);
    if (!v.is_number_integer()) throw SchemaViolation(path + "/" + name, "expected an integer");
    return v.get<int>();
}

std::string string_field(const json& obj, const char* name, const std::string& path) {
    const json& v = field(obj, name, path);
    if (!v.is_string()) throw SchemaViolation(path + "/" + name, "expected a string");
    return v.get<std::string>();
}

std::array<Panel, 8> panels_from_json(const json& obj, const char* name, LayoutKind layout) {
    const std::string path = std::string("/") + name;
    const json& arr = field(obj, name, "");
    if (!arr.is_array() || arr.size() != 8) throw SchemaViolation(path, "expected an array of 8 panels");
    std::array<Panel, 8> out;
    for (std::size_t i = 0; i < 8; ++i) out[i] = panel_from_json(arr[i], layout, path + "/" + std::to_string(i));
    return out;
}

json rule_to_json(const Rule& r) {
    return {{"relation", to_string(r.relation)}, {"attribute", key_name(r.key)}, {"param", r.param}};
}

AttrKey key_from_json(const json& v, const std::string& path) {
    if (!v.is_string()) throw SchemaViolation(path, "expected an attribute name");
    const auto k = parse_key(v.get<std::string>());
    if (!k) throw SchemaViolation(path, "unknown attribute '" + v.get<std::string>() + "'");
    return *k;
}

RuleSet ruleset_from_json(const json& j, LayoutKind layout) {
    RuleSet rs{layout, {}, {}};
    const json& rules = field(j, "rules", "/rules");
    if (!rules.is_array()) throw SchemaViolation("/rules/rules", "expected an array");
    for (std::size_t i = 0; i < rules.size(); ++i) {
        const std::string p = "/rules/rules/" + std::to_string(i);
        const auto rel = parse_relation(string_field(rules[i], "relation", p));
        if (!rel) throw SchemaViolation(p + "/relation", "unknown relation");
        rs.rules.push_back({*rel, key_from_json(field(rules[i], "attribute", p), p + "/attribute"),
                            int_field(rules[i], "param", p)});
    }
    const json& free = field(j, "free", "/rules");
    if (!free.is_array()) throw SchemaViolation("/rules/free", "expected an array");
    for (std::size_t i = 0; i < free.size(); ++i) {
        rs.free_attributes.push_back(key_from_json(free[i], "/rules/free/" + std::to_string(i)));
    }
    normalize(rs);
    return rs;
}

}  // namespace

json panel_to_json(const Panel& panel) {
    json slots = json::array();
    for (const Entity& e : panel.entities) {
        slots.push_back({{"slot", e.slot},
                         {"shape", to_string(e.shape)},
                         {"size", e.size},
                         {"color", e.color},
                         {"angle", angle_degrees(e.angle)}});
    }
    return {{"slots", std::move(slots)}};
}

Panel panel_from_json(const json& j, LayoutKind layout, const std::string& path) {
    const json& slots = field(j, "slots", path);
    if (!slots.is_array()) throw SchemaViolation(path + "/slots", "expected an array");
    Panel p{layout, {}};
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const std::string sp = path + "/slots/" + std::to_string(i);
        Entity e;
        e.slot = int_field(slots[i], "slot", sp);
        const auto shape = parse_shape(string_field(slots[i], "shape", sp));
        if (!shape) throw SchemaViolation(sp + "/shape", "unknown shape");
        e.shape = *shape;
        e.size = int_field(slots[i], "size", sp);
        e.color = int_field(slots[i], "color", sp);
        const auto angle = angle_level(int_field(slots[i], "angle", sp));
        if (!angle) throw SchemaViolation(sp + "/angle", "angle must be one of -135,-90,...,180");
        e.angle = *angle;
        p.entities.push_back(e);
    }
    try {
        validate_panel(p);
    } catch (const Error& err) {
        throw SchemaViolation(path.empty() ? "/" : path, err.what());
    }
    return p;
}

json problem_to_json(const Problem& p) {
    json context = json::array();
    json answers = json::array();
    for (const auto& panel : p.matrix.context) context.push_back(panel_to_json(panel));
    for (const auto& panel : p.answers) answers.push_back(panel_to_json(panel));
    json tags = json::array();
    for (const auto& t : p.concept_tags) tags.push_back(describe(t));
    json rules = json::array();
    for (const Rule& r : p.matrix.ruleset.rules) rules.push_back(rule_to_json(r));
    json free = json::array();
    for (const AttrKey k : p.matrix.ruleset.free_attributes) free.push_back(key_name(k));
    return {{"version", kProblemFormatVersion},
            {"id", p.id},
            {"layout", to_string(p.matrix.layout)},
            {"context", std::move(context)},
            {"answers", std::move(answers)},
            {"correct_index", p.correct_index},
            {"concept_tags", std::move(tags)},
            {"seed", p.seed},
            {"answer_strategy", to_string(p.answer_strategy)},
            {"rules", {{"rules", std::move(rules)}, {"free", std::move(free)}}}};
}

Problem problem_from_json(const json& j) {
    if (!j.is_object()) throw SchemaViolation("/", "expected an object");
    if (const auto it = j.find("version"); it != j.end()) {
        if (!it->is_number_integer() || it->get<int>() < 1 || it->get<int>() > kProblemFormatVersion) {
            throw SchemaViolation("/version", "unsupported format version");
        }
    }
    Problem p;
    p.id = string_field(j, "id", "");
    const auto layout = parse_layout(string_field(j, "layout", ""));
    if (!layout) throw SchemaViolation("/layout", "unknown layout");
    p.matrix.layout = *layout;
    p.matrix.context = panels_from_json(j, "context", *layout);
    p.answers = panels_from_json(j, "answers", *layout);
    p.correct_index = int_field(j, "correct_index", "");
    if (p.correct_index < 0 || p.correct_index > 7) throw SchemaViolation("/correct_index", "must be 0..7");
    p.matrix.ground_truth = p.answers[p.correct_index];

    const json& tags = field(j, "concept_tags", "");
    if (!tags.is_array()) throw SchemaViolation("/concept_tags", "expected an array");
    for (std::size_t i = 0; i < tags.size(); ++i) {
        const std::string tp = "/concept_tags/" + std::to_string(i);
        if (!tags[i].is_string()) throw SchemaViolation(tp, "expected a descriptor string");
        try {
            p.concept_tags.push_back(parse_descriptor(tags[i].get<std::string>()));
        } catch (const Error& err) {
            throw SchemaViolation(tp, err.what());
        }
    }
    const json& seed = field(j, "seed", "");
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
        throw SchemaViolation("/seed", "expected a non-negative integer");
    }
    p.seed = seed.get<std::uint64_t>();

    if (const auto it = j.find("answer_strategy"); it != j.end()) {
        const auto s = it->is_string() ? parse_answer_strategy(it->get<std::string>()) : std::nullopt;
        if (!s) throw SchemaViolation("/answer_strategy", "expected \"biased\" or \"fair\"");
        p.answer_strategy = *s;
    }
    p.matrix.ruleset = RuleSet{*layout, {}, {}};
    if (const auto it = j.find("rules"); it != j.end()) p.matrix.ruleset = ruleset_from_json(*it, *layout);
    return p;
}

std::string write_problem(const Problem& problem) { return problem_to_json(problem).dump(); }

Problem read_problem(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaViolation("/", std::string("malformed JSON: ") + e.what());
    }
    return problem_from_json(j);
}

void write_problems_jsonl(std::ostream& out, std::span<const Problem> problems) {
    for (const auto& p : problems) out << write_problem(p) << '\n';
}

std::vector<Problem> read_problems_jsonl(std::istream& in) {
    std::vector<Problem> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(read_problem(line));
        } catch (const SchemaViolation& e) {
            throw SchemaViolation(e.path(), "line " + std::to_string(lineno) + ": " + e.detail());
        }
    }
    return out;
}

}  // namespace conceptprobe::raven
