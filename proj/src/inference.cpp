#include "mast/inference.hpp"

#include <algorithm>
#include <limits>

#include "mast/error.hpp"

namespace mast::inference {

double Posterior::probability_of(const std::string& state) const {
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (states[i] == state) return probabilities[i];
    }
    throw ArgumentError("node '" + node_id + "' has no state '" + state + "'");
}

void check_evidence(const InfluenceDiagram& diagram, const Evidence& evidence) {
    for (const auto& [node_id, state] : evidence.assignments) {
        const ChanceNode* node = diagram.find_chance(node_id);
        if (node == nullptr) {
            throw ArgumentError("evidence refers to unknown chance node '" + node_id + "'");
        }
        if (!node->scale.index_of(state)) {
            std::string valid;
            for (const auto& s : node->scale.states) valid += (valid.empty() ? "" : ", ") + s;
            throw ArgumentError("evidence state '" + state + "' is not a state of '" + node_id +
                                "' (valid: " + valid + ")");
        }
    }
}

namespace {

// A chance node compiled for enumeration. Positions index the id-sorted node
// list, which fixes both the joint enumeration order and the product order.
struct Factor {
    const ChanceNode* node = nullptr;
    std::size_t radix = 0;
    std::vector<std::size_t> parent_positions;
    std::vector<std::size_t> parent_radices;
    std::optional<std::size_t> fixed_state;
};

struct UtilityPlan {
    const UtilityNode* node = nullptr;
    std::vector<std::size_t> parent_positions;
    std::vector<std::size_t> parent_radices;
};

struct Masses {
    std::size_t query_position = 0;
    std::vector<double> query;
    std::vector<std::vector<double>> utility;
    double total = 0.0;
};

double table_entry(const Factor& f, std::size_t column, std::size_t state) {
    if (f.node->parents.empty()) return (*f.node->prior)[state];
    return f.node->cpt->columns[column][state];
}

Masses enumerate(const InfluenceDiagram& diagram, const Evidence& evidence,
                 const std::optional<std::string>& query, const Options& options) {
    require_valid(diagram);
    check_evidence(diagram, evidence);

    std::vector<const ChanceNode*> sorted;
    sorted.reserve(diagram.chance_nodes.size());
    for (const auto& node : diagram.chance_nodes) sorted.push_back(&node);
    std::sort(sorted.begin(), sorted.end(),
              [](const ChanceNode* a, const ChanceNode* b) { return a->id < b->id; });

    auto position_of = [&](const std::string& id) {
        auto it = std::lower_bound(sorted.begin(), sorted.end(), id,
                                   [](const ChanceNode* n, const std::string& key) { return n->id < key; });
        return static_cast<std::size_t>(it - sorted.begin());
    };

    std::size_t joint = 1;
    std::vector<Factor> factors(sorted.size());
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        Factor& f = factors[k];
        f.node = sorted[k];
        f.radix = f.node->scale.size();
        for (const auto& parent : f.node->parents) {
            f.parent_positions.push_back(position_of(parent));
            f.parent_radices.push_back(sorted[f.parent_positions.back()]->scale.size());
        }
        if (auto it = evidence.assignments.find(f.node->id); it != evidence.assignments.end()) {
            f.fixed_state = f.node->scale.index_of(it->second);
        }
        if (joint > options.max_joint_states / f.radix) {
            throw ModelTooLargeError("model too large for exact enumeration: joint state space exceeds " +
                                     std::to_string(options.max_joint_states) + " combinations");
        }
        joint *= f.radix;
    }

    Masses masses;
    if (query) {
        const ChanceNode* q = diagram.find_chance(*query);
        if (q == nullptr) throw ArgumentError("unknown query node '" + *query + "'");
        masses.query_position = position_of(*query);
        masses.query.assign(q->scale.size(), 0.0);
    }

    std::vector<UtilityPlan> utilities;
    for (const auto& u : diagram.utility_nodes) {
        UtilityPlan plan;
        plan.node = &u;
        for (const auto& parent : u.parents) {
            plan.parent_positions.push_back(position_of(parent));
            plan.parent_radices.push_back(sorted[plan.parent_positions.back()]->scale.size());
        }
        masses.utility.emplace_back(u.utilities.size(), 0.0);
        utilities.push_back(std::move(plan));
    }

    const std::size_t n = factors.size();
    std::vector<std::size_t> digits(n, 0);
    std::vector<std::size_t> free_positions;
    for (std::size_t k = 0; k < n; ++k) {
        if (factors[k].fixed_state) digits[k] = *factors[k].fixed_state;
        else free_positions.push_back(k);
    }

    auto column_of = [&](const std::vector<std::size_t>& positions, const std::vector<std::size_t>& radices) {
        std::size_t column = 0;
        for (std::size_t i = 0; i < positions.size(); ++i) column = column * radices[i] + digits[positions[i]];
        return column;
    };

    while (true) {
        double weight = 1.0;
        for (std::size_t k = 0; k < n && weight != 0.0; ++k) {
            const Factor& f = factors[k];
            weight *= table_entry(f, column_of(f.parent_positions, f.parent_radices), digits[k]);
        }
        if (weight != 0.0) {
            masses.total += weight;
            if (query) masses.query[digits[masses.query_position]] += weight;
            for (std::size_t u = 0; u < utilities.size(); ++u) {
                masses.utility[u][column_of(utilities[u].parent_positions, utilities[u].parent_radices)] += weight;
            }
        }

        // Odometer over unobserved nodes, last position fastest.
        bool wrapped = true;
        for (std::size_t i = free_positions.size(); i-- > 0;) {
            const std::size_t k = free_positions[i];
            if (++digits[k] < factors[k].radix) {
                wrapped = false;
                break;
            }
            digits[k] = 0;
        }
        if (wrapped) break;
    }

    if (!(masses.total > 0.0)) {
        throw ImpossibleEvidenceError("impossible evidence: it has probability 0 under the model");
    }
    return masses;
}

Posterior make_posterior(const InfluenceDiagram& diagram, const std::string& query, const Masses& masses) {
    const ChanceNode* q = diagram.find_chance(query);
    Posterior p;
    p.node_id = query;
    p.states = q->scale.states;
    p.probabilities.reserve(masses.query.size());
    for (double m : masses.query) p.probabilities.push_back(m / masses.total);
    return p;
}

double make_expected_utility(const InfluenceDiagram& diagram, const Masses& masses) {
    // Sum in id order so the result is independent of declaration order.
    std::vector<std::size_t> order(diagram.utility_nodes.size());
    for (std::size_t u = 0; u < order.size(); ++u) order[u] = u;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return diagram.utility_nodes[a].id < diagram.utility_nodes[b].id;
    });
    double eu = 0.0;
    for (std::size_t u : order) {
        const auto& values = diagram.utility_nodes[u].utilities;
        for (std::size_t c = 0; c < values.size(); ++c) {
            eu += (masses.utility[u][c] / masses.total) * values[c];
        }
    }
    return eu;
}

}  // namespace

Posterior posterior(const InfluenceDiagram& diagram, const Evidence& evidence, const std::string& query,
                    const Options& options) {
    return make_posterior(diagram, query, enumerate(diagram, evidence, query, options));
}

double expected_utility(const InfluenceDiagram& diagram, const Evidence& evidence, const Options& options) {
    return make_expected_utility(diagram, enumerate(diagram, evidence, std::nullopt, options));
}

InferenceResult infer(const InfluenceDiagram& diagram, const Evidence& evidence, const std::string& query,
                      const Options& options) {
    const Masses masses = enumerate(diagram, evidence, query, options);
    return {make_posterior(diagram, query, masses), make_expected_utility(diagram, masses)};
}

SensitivityResult sensitivity(const InfluenceDiagram& diagram, const Evidence& evidence,
                              const std::string& query, const std::string& vary,
                              const std::optional<std::string>& designated_state, const Options& options) {
    if (vary == query) throw ArgumentError("sensitivity: varied node must differ from the query node");
    const ChanceNode* q = diagram.find_chance(query);
    if (q == nullptr) throw ArgumentError("unknown query node '" + query + "'");
    const ChanceNode* v = diagram.find_chance(vary);
    if (v == nullptr) throw ArgumentError("unknown chance node to vary '" + vary + "'");

    SensitivityResult result;
    result.query = query;
    result.vary = vary;
    result.designated_state = designated_state.value_or(q->scale.states.front());
    if (!q->scale.index_of(result.designated_state)) {
        throw ArgumentError("node '" + query + "' has no state '" + result.designated_state + "'");
    }

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& state : v->scale.states) {
        Evidence overridden = evidence;
        overridden.assignments[vary] = state;
        InferenceResult r = infer(diagram, overridden, query, options);
        const double p = r.posterior.probability_of(result.designated_state);
        lo = std::min(lo, p);
        hi = std::max(hi, p);
        result.rows.push_back({state, std::move(r.posterior), r.expected_utility});
    }
    result.spread = hi - lo;
    return result;
}

}  // namespace mast::inference
