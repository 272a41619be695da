#include "mast/diagram.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <sstream>

#include "mast/error.hpp"

namespace mast {

std::optional<std::size_t> OutcomeScale::index_of(std::string_view state) const {
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (states[i] == state) return i;
    }
    return std::nullopt;
}

const ChanceNode* InfluenceDiagram::find_chance(std::string_view id) const {
    for (const auto& node : chance_nodes) {
        if (node.id == id) return &node;
    }
    return nullptr;
}

const UtilityNode* InfluenceDiagram::find_utility(std::string_view id) const {
    for (const auto& node : utility_nodes) {
        if (node.id == id) return &node;
    }
    return nullptr;
}

std::size_t combination_count(std::span<const std::size_t> radices) {
    std::size_t count = 1;
    for (std::size_t radix : radices) {
        if (radix != 0 && count > std::numeric_limits<std::size_t>::max() / radix) {
            throw ArgumentError("parent combination count overflows");
        }
        count *= radix;
    }
    return count;
}

std::vector<std::size_t> combination_at(std::span<const std::size_t> radices, std::size_t index) {
    if (index >= combination_count(radices)) {
        throw ArgumentError("combination index " + std::to_string(index) + " out of range");
    }
    std::vector<std::size_t> combination(radices.size());
    for (std::size_t pos = radices.size(); pos-- > 0;) {
        combination[pos] = index % radices[pos];
        index /= radices[pos];
    }
    return combination;
}

std::size_t combination_index(std::span<const std::size_t> radices,
                              std::span<const std::size_t> combination) {
    if (combination.size() != radices.size()) {
        throw ArgumentError("combination length does not match radix count");
    }
    std::size_t index = 0;
    for (std::size_t pos = 0; pos < radices.size(); ++pos) {
        if (combination[pos] >= radices[pos]) {
            throw ArgumentError("combination digit out of range at position " + std::to_string(pos));
        }
        index = index * radices[pos] + combination[pos];
    }
    return index;
}

std::vector<std::size_t> state_counts(const InfluenceDiagram& diagram,
                                      std::span<const std::string> node_ids) {
    std::vector<std::size_t> counts;
    counts.reserve(node_ids.size());
    for (const auto& id : node_ids) {
        const ChanceNode* node = diagram.find_chance(id);
        if (node == nullptr) throw ArgumentError("unknown chance node '" + id + "'");
        counts.push_back(node->scale.size());
    }
    return counts;
}

std::string_view to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::DuplicateId: return "duplicate_id";
        case ViolationKind::InvalidScale: return "invalid_scale";
        case ViolationKind::UnknownParent: return "unknown_parent";
        case ViolationKind::DuplicateParent: return "duplicate_parent";
        case ViolationKind::Cycle: return "cycle";
        case ViolationKind::MissingPrior: return "missing_prior";
        case ViolationKind::UnexpectedPrior: return "unexpected_prior";
        case ViolationKind::PriorShape: return "prior_shape";
        case ViolationKind::PriorRange: return "prior_range";
        case ViolationKind::PriorNormalization: return "prior_normalization";
        case ViolationKind::MissingCpt: return "missing_cpt";
        case ViolationKind::CptMismatch: return "cpt_mismatch";
        case ViolationKind::CptShape: return "cpt_shape";
        case ViolationKind::CptRange: return "cpt_range";
        case ViolationKind::CptNormalization: return "cpt_normalization";
        case ViolationKind::UtilityShape: return "utility_shape";
        case ViolationKind::UtilityNonFinite: return "utility_non_finite";
    }
    return "unknown";
}

namespace {

using Adjacency = std::map<std::string, std::vector<std::string>>;

// parent -> children over chance nodes, restricted to resolvable parents.
Adjacency child_lists(const InfluenceDiagram& diagram) {
    Adjacency children;
    for (const auto& node : diagram.chance_nodes) children[node.id];
    for (const auto& node : diagram.chance_nodes) {
        for (const auto& parent : node.parents) {
            if (children.count(parent) != 0) children[parent].push_back(node.id);
        }
    }
    for (auto& [id, list] : children) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    return children;
}

// Strongly connected components that form cycles (size > 1, or a self-loop).
// Each component is sorted; components are ordered by their smallest member.
std::vector<std::vector<std::string>> find_cycles(const Adjacency& children) {
    std::map<std::string, int> index;
    std::map<std::string, int> lowlink;
    std::set<std::string> on_stack;
    std::vector<std::string> stack;
    std::vector<std::vector<std::string>> cycles;
    int counter = 0;

    std::function<void(const std::string&)> connect = [&](const std::string& v) {
        index[v] = lowlink[v] = counter++;
        stack.push_back(v);
        on_stack.insert(v);
        for (const auto& w : children.at(v)) {
            if (index.count(w) == 0) {
                connect(w);
                lowlink[v] = std::min(lowlink[v], lowlink[w]);
            } else if (on_stack.count(w) != 0) {
                lowlink[v] = std::min(lowlink[v], index[w]);
            }
        }
        if (lowlink[v] != index[v]) return;
        std::vector<std::string> component;
        std::string w;
        do {
            w = stack.back();
            stack.pop_back();
            on_stack.erase(w);
            component.push_back(w);
        } while (w != v);
        const auto& self = children.at(v);
        bool self_loop = std::find(self.begin(), self.end(), v) != self.end();
        if (component.size() > 1 || self_loop) {
            std::sort(component.begin(), component.end());
            cycles.push_back(std::move(component));
        }
    };

    for (const auto& [id, list] : children) {
        if (index.count(id) == 0) connect(id);
    }
    std::sort(cycles.begin(), cycles.end());
    return cycles;
}

std::string join(const std::vector<std::string>& items, std::string_view separator) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i != 0) out += separator;
        out += items[i];
    }
    return out;
}

std::string describe(double value) {
    std::ostringstream os;
    os.precision(17);
    os << value;
    return os.str();
}

void check_distribution(const std::string& node_id, std::span<const double> values,
                        ViolationKind range_kind, ViolationKind norm_kind,
                        const std::string& where, std::vector<Violation>& out) {
    double sum = 0.0;
    bool in_range = true;
    for (double v : values) {
        if (!(v >= 0.0 && v <= 1.0)) in_range = false;
        sum += v;
    }
    if (!in_range) {
        out.push_back({node_id, range_kind, where + " has entries outside [0,1]", {}, 0.0});
        return;
    }
    if (std::fabs(sum - 1.0) > kNormalizationTolerance) {
        out.push_back({node_id, norm_kind,
                       where + " sums to " + describe(sum) + " instead of 1", {}, 1.0 - sum});
    }
}

void check_scale(const ChanceNode& node, std::vector<Violation>& out) {
    const auto& states = node.scale.states;
    if (states.size() < 2) {
        out.push_back({node.id, ViolationKind::InvalidScale, "needs at least 2 states", {}, 0.0});
    }
    std::set<std::string> seen;
    for (const auto& s : states) {
        if (s.empty()) {
            out.push_back({node.id, ViolationKind::InvalidScale, "empty state name", {}, 0.0});
        } else if (!seen.insert(s).second) {
            out.push_back({node.id, ViolationKind::InvalidScale, "duplicate state '" + s + "'", {}, 0.0});
        }
    }
    if (node.scale.numeric_values) {
        const auto& values = *node.scale.numeric_values;
        if (values.size() != states.size()) {
            out.push_back({node.id, ViolationKind::InvalidScale,
                           "numeric values do not cover every state", {}, 0.0});
        }
        for (double v : values) {
            if (!(v >= 0.0 && v <= 1.0)) {
                out.push_back({node.id, ViolationKind::InvalidScale,
                               "numeric value " + describe(v) + " outside [0,1]", {}, 0.0});
            }
        }
    }
}

}  // namespace

std::vector<Violation> validate(const InfluenceDiagram& diagram) {
    std::vector<Violation> out;

    std::map<std::string, int> id_count;
    for (const auto& node : diagram.chance_nodes) ++id_count[node.id];
    for (const auto& node : diagram.utility_nodes) ++id_count[node.id];
    for (const auto& [id, count] : id_count) {
        if (count > 1) {
            out.push_back({id, ViolationKind::DuplicateId,
                           "id used by " + std::to_string(count) + " nodes", {}, 0.0});
        }
    }

    // Returns false when a parent list cannot be resolved to state counts.
    auto check_parents = [&](const std::string& id, const std::vector<std::string>& parents) {
        bool resolvable = true;
        std::set<std::string> seen;
        for (const auto& parent : parents) {
            if (!seen.insert(parent).second) {
                out.push_back({id, ViolationKind::DuplicateParent,
                               "parent '" + parent + "' listed twice", {}, 0.0});
            }
            if (diagram.find_chance(parent) == nullptr) {
                resolvable = false;
                out.push_back({id, ViolationKind::UnknownParent,
                               "parent '" + parent + "' is not a chance node", {}, 0.0});
            }
        }
        return resolvable;
    };

    for (const auto& node : diagram.chance_nodes) {
        check_scale(node, out);
        const bool resolvable = check_parents(node.id, node.parents);
        const std::size_t n_states = node.scale.size();

        if (node.parents.empty()) {
            if (!node.prior) {
                out.push_back({node.id, ViolationKind::MissingPrior, "root node has no prior", {}, 0.0});
            } else if (node.prior->size() != n_states) {
                out.push_back({node.id, ViolationKind::PriorShape,
                               "prior has " + std::to_string(node.prior->size()) + " entries, expected " +
                                   std::to_string(n_states),
                               {}, 0.0});
            } else {
                check_distribution(node.id, *node.prior, ViolationKind::PriorRange,
                                   ViolationKind::PriorNormalization, "prior", out);
            }
            if (node.cpt && !node.cpt->parent_ids.empty()) {
                out.push_back({node.id, ViolationKind::CptMismatch,
                               "root node carries a conditional table", {}, 0.0});
            }
            continue;
        }

        if (node.prior) {
            out.push_back({node.id, ViolationKind::UnexpectedPrior,
                           "node with parents must not store a prior", {}, 0.0});
        }
        if (!node.cpt) {
            out.push_back({node.id, ViolationKind::MissingCpt, "node with parents has no CPT", {}, 0.0});
            continue;
        }
        const CptTable& cpt = *node.cpt;
        if (cpt.parent_ids != node.parents) {
            out.push_back({node.id, ViolationKind::CptMismatch,
                           "CPT parents [" + join(cpt.parent_ids, ",") + "] differ from node parents [" +
                               join(node.parents, ",") + "]",
                           {}, 0.0});
        }
        if (cpt.child_states != node.scale.states) {
            out.push_back({node.id, ViolationKind::CptMismatch,
                           "CPT child states differ from the node's scale", {}, 0.0});
        }
        if (!resolvable) continue;

        const auto radices = state_counts(diagram, node.parents);
        const std::size_t expected_columns = combination_count(radices);
        if (cpt.columns.size() != expected_columns) {
            out.push_back({node.id, ViolationKind::CptShape,
                           "CPT has " + std::to_string(cpt.columns.size()) + " columns, expected " +
                               std::to_string(expected_columns),
                           {}, 0.0});
            continue;
        }
        for (std::size_t c = 0; c < cpt.columns.size(); ++c) {
            const auto& column = cpt.columns[c];
            const std::string where = "CPT column " + std::to_string(c);
            if (column.size() != n_states) {
                out.push_back({node.id, ViolationKind::CptShape,
                               where + " has " + std::to_string(column.size()) + " entries, expected " +
                                   std::to_string(n_states),
                               {}, 0.0});
                continue;
            }
            check_distribution(node.id, column, ViolationKind::CptRange, ViolationKind::CptNormalization,
                               where, out);
        }
    }

    for (const auto& node : diagram.utility_nodes) {
        if (!check_parents(node.id, node.parents)) continue;
        const auto radices = state_counts(diagram, node.parents);
        const std::size_t expected = combination_count(radices);
        if (node.utilities.size() != expected) {
            out.push_back({node.id, ViolationKind::UtilityShape,
                           "utility table has " + std::to_string(node.utilities.size()) +
                               " values, expected " + std::to_string(expected),
                           {}, 0.0});
        }
        for (double u : node.utilities) {
            if (!std::isfinite(u)) {
                out.push_back({node.id, ViolationKind::UtilityNonFinite, "utility value is not finite", {}, 0.0});
                break;
            }
        }
    }

    for (auto& cycle : find_cycles(child_lists(diagram))) {
        std::string message = "cycle through " + join(cycle, ", ");
        std::string anchor = cycle.front();
        out.push_back({std::move(anchor), ViolationKind::Cycle, std::move(message), std::move(cycle), 0.0});
    }

    std::stable_sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) {
        if (a.node_id != b.node_id) return a.node_id < b.node_id;
        return a.kind < b.kind;
    });
    return out;
}

std::vector<std::string> topological_order(const InfluenceDiagram& diagram) {
    for (const auto& node : diagram.chance_nodes) {
        for (const auto& parent : node.parents) {
            if (diagram.find_chance(parent) == nullptr) {
                throw StructuralError("node '" + node.id + "' has unknown parent '" + parent + "'");
            }
        }
    }
    const Adjacency children = child_lists(diagram);

    std::map<std::string, std::size_t> pending;
    for (const auto& [id, list] : children) pending[id];
    for (const auto& [id, list] : children) {
        for (const auto& child : list) ++pending[child];
    }

    std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
    for (const auto& [id, count] : pending) {
        if (count == 0) ready.push(id);
    }
    std::vector<std::string> order;
    order.reserve(children.size());
    while (!ready.empty()) {
        std::string id = ready.top();
        ready.pop();
        for (const auto& child : children.at(id)) {
            if (--pending[child] == 0) ready.push(child);
        }
        order.push_back(std::move(id));
    }

    if (order.size() != children.size()) {
        const auto cycles = find_cycles(children);
        std::string names = cycles.empty() ? std::string("unknown") : join(cycles.front(), " -> ");
        throw StructuralError("cycle detected among chance nodes: " + names);
    }
    return order;
}

ValidationError::ValidationError(std::vector<Violation> violations)
    : std::runtime_error("invalid influence diagram:\n" + format_violations(violations)),
      violations_(std::move(violations)) {}

void require_valid(const InfluenceDiagram& diagram) {
    auto violations = validate(diagram);
    if (!violations.empty()) throw ValidationError(std::move(violations));
}

std::string format_violations(const std::vector<Violation>& violations) {
    std::string out;
    for (const auto& v : violations) {
        out += "  ";
        out += v.node_id;
        out += ": ";
        out += to_string(v.kind);
        out += ": ";
        out += v.message;
        out += '\n';
    }
    return out;
}

}  // namespace mast
