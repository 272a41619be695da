#include "mast/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mast/error.hpp"
#include "mast/number_format.hpp"

namespace mast::io {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
    throw ParseError("native model: " + where + ": " + what, 0);
}

const json& field(const json& object, const char* key, const std::string& where) {
    if (!object.is_object()) schema_error(where, "expected an object");
    auto it = object.find(key);
    if (it == object.end()) schema_error(where, std::string("missing '") + key + "'");
    return *it;
}

const json* optional_field(const json& object, const char* key) {
    auto it = object.find(key);
    return it == object.end() || it->is_null() ? nullptr : &*it;
}

std::string as_string(const json& value, const std::string& where) {
    if (!value.is_string()) schema_error(where, "expected a string");
    return value.get<std::string>();
}

double as_number(const json& value, const std::string& where) {
    if (!value.is_number()) schema_error(where, "expected a number");
    return value.get<double>();
}

std::vector<std::string> as_strings(const json& value, const std::string& where) {
    if (!value.is_array()) schema_error(where, "expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < value.size(); ++i) {
        out.push_back(as_string(value[i], where + "[" + std::to_string(i) + "]"));
    }
    return out;
}

std::vector<double> as_numbers(const json& value, const std::string& where) {
    if (!value.is_array()) schema_error(where, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < value.size(); ++i) {
        out.push_back(as_number(value[i], where + "[" + std::to_string(i) + "]"));
    }
    return out;
}

json diagram_to_json(const InfluenceDiagram& diagram) {
    json chance = json::array();
    for (const auto& node : diagram.chance_nodes) {
        json j;
        j["id"] = node.id;
        j["label"] = node.label;
        j["states"] = node.scale.states;
        if (node.scale.numeric_values) j["numeric_values"] = *node.scale.numeric_values;
        j["parents"] = node.parents;
        if (node.prior) j["prior"] = *node.prior;
        if (node.cpt) j["cpt"] = node.cpt->columns;
        chance.push_back(std::move(j));
    }
    json utility = json::array();
    for (const auto& node : diagram.utility_nodes) {
        json j;
        j["id"] = node.id;
        j["label"] = node.label;
        j["parents"] = node.parents;
        j["utilities"] = node.utilities;
        utility.push_back(std::move(j));
    }
    return json{{"chance_nodes", std::move(chance)}, {"utility_nodes", std::move(utility)}};
}

InfluenceDiagram diagram_from_json(const json& j) {
    InfluenceDiagram diagram;
    const json& chance = field(j, "chance_nodes", "diagram");
    if (!chance.is_array()) schema_error("diagram.chance_nodes", "expected an array");
    for (std::size_t i = 0; i < chance.size(); ++i) {
        const std::string where = "diagram.chance_nodes[" + std::to_string(i) + "]";
        const json& n = chance[i];
        ChanceNode node;
        node.id = as_string(field(n, "id", where), where + ".id");
        node.label = as_string(field(n, "label", where), where + ".label");
        node.scale.states = as_strings(field(n, "states", where), where + ".states");
        if (const json* v = optional_field(n, "numeric_values")) {
            node.scale.numeric_values = as_numbers(*v, where + ".numeric_values");
        }
        node.parents = as_strings(field(n, "parents", where), where + ".parents");
        if (const json* v = optional_field(n, "prior")) node.prior = as_numbers(*v, where + ".prior");
        if (const json* v = optional_field(n, "cpt")) {
            if (!v->is_array()) schema_error(where + ".cpt", "expected an array of columns");
            CptTable cpt;
            cpt.child_states = node.scale.states;
            cpt.parent_ids = node.parents;
            for (std::size_t c = 0; c < v->size(); ++c) {
                cpt.columns.push_back(as_numbers((*v)[c], where + ".cpt[" + std::to_string(c) + "]"));
            }
            node.cpt = std::move(cpt);
        }
        diagram.chance_nodes.push_back(std::move(node));
    }
    const json& utility = field(j, "utility_nodes", "diagram");
    if (!utility.is_array()) schema_error("diagram.utility_nodes", "expected an array");
    for (std::size_t i = 0; i < utility.size(); ++i) {
        const std::string where = "diagram.utility_nodes[" + std::to_string(i) + "]";
        const json& n = utility[i];
        UtilityNode node;
        node.id = as_string(field(n, "id", where), where + ".id");
        node.label = as_string(field(n, "label", where), where + ".label");
        node.parents = as_strings(field(n, "parents", where), where + ".parents");
        node.utilities = as_numbers(field(n, "utilities", where), where + ".utilities");
        diagram.utility_nodes.push_back(std::move(node));
    }
    return diagram;
}

json outcome_map(const std::array<double, training::kOutcomeCount>& values) {
    json j = json::object();
    for (std::size_t i = 0; i < training::kOutcomeCount; ++i) {
        j[std::string(training::kOutcomeStates[i])] = values[i];
    }
    return j;
}

std::array<double, training::kOutcomeCount> outcome_array(const json& j, const std::string& where) {
    std::array<double, training::kOutcomeCount> out{};
    for (std::size_t i = 0; i < training::kOutcomeCount; ++i) {
        const std::string key(training::kOutcomeStates[i]);
        out[i] = as_number(field(j, key.c_str(), where), where + "." + key);
    }
    return out;
}

json extension_to_json(const training::MastModel& model, const inference::Evidence& evidence) {
    json factors = json::array();
    for (const auto& f : model.factors()) {
        factors.push_back({{"id", f.id},
                           {"label", f.label},
                           {"impact", f.impact},
                           {"outcome_values", outcome_map(f.outcome_values)},
                           {"prior", outcome_map(f.prior)}});
    }
    return json{{"factors", std::move(factors)},
                {"base_cost", model.base_cost()},
                {"training_node_id", model.training_node_id()},
                {"evidence", evidence.assignments}};
}

MastExtension extension_from_json(const json& j) {
    const std::string where = "mast_extension";
    MastExtension ext;
    const json& factors = field(j, "factors", where);
    if (!factors.is_array() || factors.size() != training::kFactorCount) {
        schema_error(where + ".factors", "expected an array of 4 factors");
    }
    for (std::size_t i = 0; i < training::kFactorCount; ++i) {
        const std::string fw = where + ".factors[" + std::to_string(i) + "]";
        const json& f = factors[i];
        training::RiskFactor& factor = ext.factors[i];
        factor.id = as_string(field(f, "id", fw), fw + ".id");
        factor.label = as_string(field(f, "label", fw), fw + ".label");
        factor.impact = as_number(field(f, "impact", fw), fw + ".impact");
        factor.outcome_values = outcome_array(field(f, "outcome_values", fw), fw + ".outcome_values");
        factor.prior = outcome_array(field(f, "prior", fw), fw + ".prior");
    }
    ext.base_cost = as_number(field(j, "base_cost", where), where + ".base_cost");
    ext.training_node_id = as_string(field(j, "training_node_id", where), where + ".training_node_id");
    if (const json* e = optional_field(j, "evidence")) {
        if (!e->is_object()) schema_error(where + ".evidence", "expected an object");
        for (const auto& [node, state] : e->items()) {
            ext.evidence.assignments[node] = as_string(state, where + ".evidence." + node);
        }
    }
    return ext;
}

std::string dump(const json& document) { return document.dump(2) + "\n"; }

// Line/column (1-based) of a byte offset.
std::pair<std::size_t, std::size_t> locate(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

std::string describe_column(const training::MastModel& model, std::size_t column) {
    const std::array<std::size_t, training::kFactorCount> radices{3, 3, 3, 3};
    const auto combo = combination_at(radices, column);
    std::string out = "column " + std::to_string(column) + " (";
    for (std::size_t i = 0; i < combo.size(); ++i) {
        if (i != 0) out += ", ";
        out += model.factors()[i].id + "=" + std::string(training::kOutcomeStates[combo[i]]);
    }
    return out + ")";
}

void verify_against_regeneration(const InfluenceDiagram& stored, const training::MastModel& rebuilt) {
    const ChanceNode* stored_training = stored.find_chance(rebuilt.training_node_id());
    if (stored_training == nullptr || !stored_training->cpt) {
        throw ConsistencyError("stored diagram has no CPT for '" + rebuilt.training_node_id() + "'");
    }
    const auto& expected = rebuilt.diagram().find_chance(rebuilt.training_node_id())->cpt->columns;
    const auto& actual = stored_training->cpt->columns;
    for (std::size_t c = 0; c < expected.size(); ++c) {
        if (c >= actual.size() || actual[c] != expected[c]) {
            std::string detail = c < actual.size() && !actual[c].empty()
                                     ? ": stored Yes=" + format_real(actual[c][0]) +
                                           ", regenerated Yes=" + format_real(expected[c][0])
                                     : "";
            throw ConsistencyError("stored CPT disagrees with stored impacts at " +
                                   describe_column(rebuilt, c) + detail);
        }
    }
    if (actual.size() != expected.size()) {
        throw ConsistencyError("stored CPT has " + std::to_string(actual.size()) + " columns, expected " +
                               std::to_string(expected.size()));
    }
    const InfluenceDiagram& regenerated = rebuilt.diagram();
    if (stored.chance_nodes.size() != regenerated.chance_nodes.size() ||
        stored.utility_nodes.size() != regenerated.utility_nodes.size()) {
        throw ConsistencyError("stored diagram does not have the four-factor model's node set");
    }
    for (std::size_t i = 0; i < stored.chance_nodes.size(); ++i) {
        if (!(stored.chance_nodes[i] == regenerated.chance_nodes[i])) {
            throw ConsistencyError("stored node '" + stored.chance_nodes[i].id +
                                   "' disagrees with the risk-factor extension");
        }
    }
    for (std::size_t i = 0; i < stored.utility_nodes.size(); ++i) {
        if (!(stored.utility_nodes[i] == regenerated.utility_nodes[i])) {
            throw ConsistencyError("stored utility node '" + stored.utility_nodes[i].id +
                                   "' disagrees with the risk-factor extension");
        }
    }
}

}  // namespace

std::string save_model(const InfluenceDiagram& diagram) {
    require_valid(diagram);
    return dump(json{{"format_version", kFormatVersion}, {"diagram", diagram_to_json(diagram)}});
}

std::string save_model(const training::MastModel& model, const inference::Evidence& evidence) {
    require_valid(model.diagram());
    inference::check_evidence(model.diagram(), evidence);
    return dump(json{{"format_version", kFormatVersion},
                     {"diagram", diagram_to_json(model.diagram())},
                     {"mast_extension", extension_to_json(model, evidence)}});
}

LoadedModel load_model(std::string_view text) {
    json document;
    try {
        document = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const auto [line, column] = locate(text, e.byte == 0 ? 0 : e.byte - 1);
        throw ParseError("native model: malformed JSON at line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ": " + e.what(),
                         line, column);
    }
    if (!document.is_object()) schema_error("document", "expected an object");

    const std::string version = as_string(field(document, "format_version", "document"), "format_version");
    if (version != kFormatVersion) {
        throw VersionError("unsupported model format version '" + version + "' (supported: " +
                           std::string(kFormatVersion) + ")");
    }

    LoadedModel loaded;
    loaded.diagram = diagram_from_json(field(document, "diagram", "document"));
    require_valid(loaded.diagram);

    if (const json* ext_json = optional_field(document, "mast_extension")) {
        MastExtension ext = extension_from_json(*ext_json);
        if (ext.training_node_id != training::kTrainingNodeId) {
            throw ConsistencyError("unsupported training node id '" + ext.training_node_id + "'");
        }
        training::MastModel rebuilt = [&] {
            try {
                return training::build_model(ext.factors, ext.base_cost);
            } catch (const ArgumentError& e) {
                throw ConsistencyError(std::string("risk-factor extension is invalid: ") + e.what());
            }
        }();
        verify_against_regeneration(loaded.diagram, rebuilt);
        for (const auto& [node, state] : ext.evidence.assignments) {
            if (!training::factor_index(node)) {
                throw ConsistencyError("stored evidence names '" + node + "', which is not a risk factor");
            }
        }
        inference::check_evidence(rebuilt.diagram(), ext.evidence);
        loaded.mast = std::move(rebuilt);
        loaded.evidence = std::move(ext.evidence);
    }
    return loaded;
}

LoadedModel load_model_file(const std::filesystem::path& path) { return load_model(read_file(path)); }

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw IoError("error reading '" + path.string() + "'");
    return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw IoError("error writing '" + path.string() + "'");
}

}  // namespace mast::io
