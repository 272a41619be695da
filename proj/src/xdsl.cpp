#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "mast/error.hpp"
#include "mast/model_io.hpp"
#include "mast/number_format.hpp"

namespace mast::io {

namespace pt = boost::property_tree;

namespace {

constexpr std::string_view kAttributes = "<xmlattr>";
constexpr std::string_view kComment = "<xmlcomment>";

std::string escape(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            case '\n': out += "&#10;"; break;
            case '\r': out += "&#13;"; break;
            case '\t': out += "&#9;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string join_reals(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i != 0) out += ' ';
        out += format_real(values[i]);
    }
    return out;
}

std::vector<std::string> tokens(const std::string& text) {
    std::istringstream in(text);
    std::vector<std::string> out;
    for (std::string token; in >> token;) out.push_back(token);
    return out;
}

// Assigns unique sanitized names in first-come order.
class NameTable {
public:
    std::string assign(const std::string& original) {
        std::string base = sanitize_identifier(original);
        std::string candidate = base;
        for (int suffix = 2; !used_.insert(candidate).second; ++suffix) {
            candidate = base + "_" + std::to_string(suffix);
        }
        return candidate;
    }

private:
    std::set<std::string> used_;
};

// Declared order if it already lists every chance node after its parents,
// otherwise the deterministic topological order.
std::vector<const ChanceNode*> emission_order(const InfluenceDiagram& diagram) {
    std::vector<const ChanceNode*> declared;
    std::set<std::string> seen;
    bool parents_first = true;
    for (const auto& node : diagram.chance_nodes) {
        for (const auto& parent : node.parents) {
            if (seen.count(parent) == 0) parents_first = false;
        }
        seen.insert(node.id);
        declared.push_back(&node);
    }
    if (parents_first) return declared;
    std::vector<const ChanceNode*> ordered;
    for (const auto& id : topological_order(diagram)) ordered.push_back(diagram.find_chance(id));
    return ordered;
}

}  // namespace

std::string sanitize_identifier(std::string_view id) {
    std::string out;
    out.reserve(id.size() + 2);
    for (char c : id) {
        const auto uc = static_cast<unsigned char>(c);
        out += (std::isalnum(uc) != 0 && uc < 0x80) || c == '_' ? c : '_';
    }
    if (out.empty() || std::isalpha(static_cast<unsigned char>(out.front())) == 0) out = "n_" + out;
    return out;
}

std::string export_xdsl(const InfluenceDiagram& diagram, std::string_view network_id) {
    require_valid(diagram);

    NameTable node_names;
    std::map<std::string, std::string> node_xml_id;
    std::map<std::string, std::vector<std::string>> state_xml_ids;
    const auto chance = emission_order(diagram);
    for (const ChanceNode* node : chance) {
        node_xml_id[node->id] = node_names.assign(node->id);
        NameTable state_names;
        auto& states = state_xml_ids[node->id];
        for (const auto& s : node->scale.states) states.push_back(state_names.assign(s));
    }
    for (const auto& node : diagram.utility_nodes) node_xml_id[node.id] = node_names.assign(node.id);

    auto parents_text = [&](const std::vector<std::string>& parents) {
        std::string out;
        for (const auto& p : parents) out += (out.empty() ? "" : " ") + node_xml_id.at(p);
        return out;
    };

    const std::string net = sanitize_identifier(network_id);
    std::ostringstream x;
    x << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    x << "<smile version=\"1.0\" id=\"" << net << "\" numsamples=\"10000\" discsamples=\"10000\">\n";
    x << "\t<nodes>\n";
    for (const ChanceNode* node : chance) {
        x << "\t\t<cpt id=\"" << node_xml_id.at(node->id) << "\">\n";
        for (const auto& s : state_xml_ids.at(node->id)) x << "\t\t\t<state id=\"" << s << "\" />\n";
        std::vector<double> probabilities;
        if (node->parents.empty()) {
            probabilities = *node->prior;
        } else {
            x << "\t\t\t<parents>" << parents_text(node->parents) << "</parents>\n";
            // Own states vary fastest inside each parent combination.
            for (const auto& column : node->cpt->columns) {
                probabilities.insert(probabilities.end(), column.begin(), column.end());
            }
        }
        x << "\t\t\t<probabilities>" << join_reals(probabilities) << "</probabilities>\n";
        x << "\t\t</cpt>\n";
    }
    for (const auto& node : diagram.utility_nodes) {
        x << "\t\t<utility id=\"" << node_xml_id.at(node.id) << "\">\n";
        if (!node.parents.empty()) x << "\t\t\t<parents>" << parents_text(node.parents) << "</parents>\n";
        x << "\t\t\t<utilities>" << join_reals(node.utilities) << "</utilities>\n";
        x << "\t\t</utility>\n";
    }
    x << "\t</nodes>\n";

    x << "\t<extensions>\n";
    x << "\t\t<genie version=\"1.0\" app=\"mast\" name=\"" << escape(network_id) << "\">\n";
    auto genie_node = [&](const std::string& id, const std::string& label) {
        x << "\t\t\t<node id=\"" << node_xml_id.at(id) << "\">\n";
        x << "\t\t\t\t<name>" << escape(label) << "</name>\n";
        x << "\t\t\t</node>\n";
    };
    for (const ChanceNode* node : chance) genie_node(node->id, node->label);
    for (const auto& node : diagram.utility_nodes) genie_node(node.id, node.label);
    x << "\t\t</genie>\n";

    std::ostringstream mapping;
    auto map_node = [&](const std::string& id) {
        if (node_xml_id.at(id) != id) {
            mapping << "\t\t\t<node id=\"" << node_xml_id.at(id) << "\" original=\"" << escape(id) << "\" />\n";
        }
    };
    for (const ChanceNode* node : chance) {
        map_node(node->id);
        const auto& xml_states = state_xml_ids.at(node->id);
        for (std::size_t s = 0; s < xml_states.size(); ++s) {
            if (xml_states[s] != node->scale.states[s]) {
                mapping << "\t\t\t<state node=\"" << node_xml_id.at(node->id) << "\" id=\"" << xml_states[s]
                        << "\" original=\"" << escape(node->scale.states[s]) << "\" />\n";
            }
        }
        if (node->scale.numeric_values) {
            mapping << "\t\t\t<numeric_values node=\"" << node_xml_id.at(node->id) << "\">"
                    << join_reals(*node->scale.numeric_values) << "</numeric_values>\n";
        }
    }
    for (const auto& node : diagram.utility_nodes) map_node(node.id);
    const std::string mapping_text = mapping.str();
    if (!mapping_text.empty()) {
        x << "\t\t<mast version=\"1.0\">\n" << mapping_text << "\t\t</mast>\n";
    }
    x << "\t</extensions>\n";
    x << "</smile>\n";
    return x.str();
}

namespace {

struct RawChance {
    std::string id;
    std::vector<std::string> states;
    std::vector<std::string> parents;
    std::vector<double> probabilities;
};

struct RawUtility {
    std::string id;
    std::vector<std::string> parents;
    std::vector<double> utilities;
};

class XdslReader {
public:
    XdslImport read(std::string_view text) {
        pt::ptree root;
        try {
            std::istringstream in{std::string(text)};
            pt::read_xml(in, root);
        } catch (const pt::xml_parser_error& e) {
            throw ParseError("XDSL: malformed XML at line " + std::to_string(e.line()) + ": " + e.message(),
                             e.line());
        }

        const pt::ptree* smile = nullptr;
        for (const auto& [name, child] : root) {
            if (name == "smile") smile = &child;
            else if (name != kComment) warn("ignored top-level element <" + name + ">");
        }
        if (smile == nullptr) throw ParseError("XDSL: root element <smile> not found", 0);
        check_attributes(*smile, "smile", {"version", "id", "numsamples", "discsamples"});

        bool saw_nodes = false;
        for (const auto& [name, child] : *smile) {
            if (name == kAttributes || name == kComment) continue;
            if (name == "nodes") {
                saw_nodes = true;
                read_nodes(child);
            } else if (name == "extensions") {
                read_extensions(child);
            } else {
                warn("ignored element <" + name + "> in <smile>");
            }
        }
        if (!saw_nodes) throw ParseError("XDSL: <smile> has no <nodes> element", 0);
        return {build(), std::move(warnings_)};
    }

private:
    void warn(std::string message) { warnings_.push_back(std::move(message)); }

    static std::string attribute(const pt::ptree& node, const std::string& name) {
        return node.get<std::string>(pt::ptree::path_type(std::string(kAttributes) + "/" + name, '/'), "");
    }

    void check_attributes(const pt::ptree& node, const std::string& where, std::set<std::string> known) {
        if (auto attrs = node.get_child_optional(pt::ptree::path_type(std::string(kAttributes), '/'))) {
            for (const auto& [name, value] : *attrs) {
                if (known.count(name) == 0) warn("ignored attribute '" + name + "' on <" + where + ">");
            }
        }
    }

    std::vector<double> reals(const std::string& text, const std::string& where) {
        std::vector<double> out;
        for (const auto& token : tokens(text)) {
            auto value = parse_real(token);
            if (!value) throw StructuralError("XDSL: " + where + ": '" + token + "' is not a number");
            out.push_back(*value);
        }
        return out;
    }

    void read_nodes(const pt::ptree& nodes) {
        for (const auto& [name, child] : nodes) {
            if (name == kAttributes || name == kComment) continue;
            const std::string id = attribute(child, "id");
            if (name == "cpt") {
                if (id.empty()) throw StructuralError("XDSL: <cpt> without id");
                check_attributes(child, "cpt", {"id"});
                RawChance raw;
                raw.id = id;
                for (const auto& [field, value] : child) {
                    if (field == kAttributes || field == kComment) continue;
                    if (field == "state") {
                        check_attributes(value, "state", {"id"});
                        raw.states.push_back(attribute(value, "id"));
                    } else if (field == "parents") {
                        raw.parents = tokens(value.data());
                    } else if (field == "probabilities") {
                        raw.probabilities = reals(value.data(), "node '" + id + "' probabilities");
                    } else {
                        warn("ignored element <" + field + "> in node '" + id + "'");
                    }
                }
                chance_.push_back(std::move(raw));
            } else if (name == "utility") {
                if (id.empty()) throw StructuralError("XDSL: <utility> without id");
                check_attributes(child, "utility", {"id"});
                RawUtility raw;
                raw.id = id;
                for (const auto& [field, value] : child) {
                    if (field == kAttributes || field == kComment) continue;
                    if (field == "parents") {
                        raw.parents = tokens(value.data());
                    } else if (field == "utilities") {
                        raw.utilities = reals(value.data(), "node '" + id + "' utilities");
                    } else {
                        warn("ignored element <" + field + "> in node '" + id + "'");
                    }
                }
                utility_.push_back(std::move(raw));
            } else {
                warn("ignored unsupported node element <" + name + ">" + (id.empty() ? "" : " '" + id + "'"));
            }
        }
    }

    void read_extensions(const pt::ptree& extensions) {
        for (const auto& [name, child] : extensions) {
            if (name == kAttributes || name == kComment) continue;
            if (name == "genie") {
                read_genie(child);
            } else if (name == "mast") {
                read_mapping(child);
            } else {
                warn("ignored extension <" + name + ">");
            }
        }
    }

    void read_genie(const pt::ptree& genie) {
        for (const auto& [name, child] : genie) {
            if (name == kAttributes || name == kComment) continue;
            if (name != "node") {
                warn("ignored element <" + name + "> in genie extension");
                continue;
            }
            const std::string id = attribute(child, "id");
            for (const auto& [field, value] : child) {
                if (field == kAttributes || field == kComment) continue;
                if (field == "name") labels_[id] = value.data();
                else warn("ignored element <" + field + "> in genie node '" + id + "'");
            }
        }
    }

    void read_mapping(const pt::ptree& mapping) {
        for (const auto& [name, child] : mapping) {
            if (name == kAttributes || name == kComment) continue;
            if (name == "node") {
                original_node_[attribute(child, "id")] = attribute(child, "original");
            } else if (name == "state") {
                original_state_[{attribute(child, "node"), attribute(child, "id")}] = attribute(child, "original");
            } else if (name == "numeric_values") {
                const std::string node = attribute(child, "node");
                numeric_values_[node] = reals(child.data(), "numeric values of '" + node + "'");
            } else {
                warn("ignored element <" + name + "> in mast extension");
            }
        }
    }

    std::string original_id(const std::string& xml_id) const {
        auto it = original_node_.find(xml_id);
        return it == original_node_.end() ? xml_id : it->second;
    }

    std::string label_of(const std::string& xml_id) const {
        auto it = labels_.find(xml_id);
        return it == labels_.end() ? original_id(xml_id) : it->second;
    }

    std::size_t combinations(const std::string& node, const std::vector<std::string>& parents,
                             const std::map<std::string, std::size_t>& state_count) const {
        std::vector<std::size_t> radices;
        for (const auto& p : parents) {
            auto it = state_count.find(p);
            if (it == state_count.end()) {
                throw StructuralError("XDSL: node '" + node + "' has unknown parent '" + p + "'");
            }
            radices.push_back(it->second);
        }
        return combination_count(radices);
    }

    InfluenceDiagram build() const {
        std::map<std::string, std::size_t> state_count;
        for (const auto& raw : chance_) state_count[raw.id] = raw.states.size();

        InfluenceDiagram diagram;
        for (const auto& raw : chance_) {
            if (raw.states.empty()) throw StructuralError("XDSL: node '" + raw.id + "' has no states");
            const std::size_t n_states = raw.states.size();
            const std::size_t n_columns = combinations(raw.id, raw.parents, state_count);
            if (raw.probabilities.size() != n_states * n_columns) {
                throw StructuralError("XDSL: node '" + raw.id + "' has " +
                                      std::to_string(raw.probabilities.size()) + " probabilities, expected " +
                                      std::to_string(n_states * n_columns));
            }

            ChanceNode node;
            node.id = original_id(raw.id);
            node.label = label_of(raw.id);
            for (const auto& s : raw.states) {
                auto it = original_state_.find({raw.id, s});
                node.scale.states.push_back(it == original_state_.end() ? s : it->second);
            }
            if (auto it = numeric_values_.find(raw.id); it != numeric_values_.end()) {
                node.scale.numeric_values = it->second;
            }
            for (const auto& p : raw.parents) node.parents.push_back(original_id(p));
            if (raw.parents.empty()) {
                node.prior = raw.probabilities;
            } else {
                CptTable cpt;
                cpt.child_states = node.scale.states;
                cpt.parent_ids = node.parents;
                for (std::size_t c = 0; c < n_columns; ++c) {
                    auto first = raw.probabilities.begin() + static_cast<std::ptrdiff_t>(c * n_states);
                    cpt.columns.emplace_back(first, first + static_cast<std::ptrdiff_t>(n_states));
                }
                node.cpt = std::move(cpt);
            }
            diagram.chance_nodes.push_back(std::move(node));
        }
        for (const auto& raw : utility_) {
            const std::size_t n_columns = combinations(raw.id, raw.parents, state_count);
            if (raw.utilities.size() != n_columns) {
                throw StructuralError("XDSL: utility node '" + raw.id + "' has " +
                                      std::to_string(raw.utilities.size()) + " utilities, expected " +
                                      std::to_string(n_columns));
            }
            UtilityNode node;
            node.id = original_id(raw.id);
            node.label = label_of(raw.id);
            for (const auto& p : raw.parents) node.parents.push_back(original_id(p));
            node.utilities = raw.utilities;
            diagram.utility_nodes.push_back(std::move(node));
        }
        require_valid(diagram);
        return diagram;
    }

    std::vector<RawChance> chance_;
    std::vector<RawUtility> utility_;
    std::map<std::string, std::string> labels_;
    std::map<std::string, std::string> original_node_;
    std::map<std::pair<std::string, std::string>, std::string> original_state_;
    std::map<std::string, std::vector<double>> numeric_values_;
    std::vector<std::string> warnings_;
};

}  // namespace

XdslImport import_xdsl(std::string_view text) { return XdslReader{}.read(text); }

}  // namespace mast::io
