#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "mast/diagram.hpp"
#include "mast/inference.hpp"

namespace mast::testing {

struct DiagramShape {
    int max_nodes = 6;
    int max_states = 3;
    int max_parents = 3;
    int max_utility_nodes = 2;
};

inline std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> weight(0.05, 1.0);
    std::vector<double> values(n);
    double sum = 0.0;
    for (auto& v : values) sum += (v = weight(rng));
    for (auto& v : values) v /= sum;
    return values;
}

/// Nodes are declared parents-first; ids are shuffled letters so declaration
/// order and id order differ.
inline InfluenceDiagram random_diagram(std::mt19937_64& rng, const DiagramShape& shape = {}) {
    std::uniform_int_distribution<int> node_count(1, shape.max_nodes);
    std::uniform_int_distribution<int> state_count(2, shape.max_states);
    std::bernoulli_distribution coin(0.5);

    const int n = node_count(rng);
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) ids.push_back(std::string(1, static_cast<char>('a' + i)) + "_node");
    std::shuffle(ids.begin(), ids.end(), rng);

    InfluenceDiagram d;
    for (int i = 0; i < n; ++i) {
        ChanceNode node;
        node.id = ids[i];
        node.label = "Node " + ids[i];
        const int states = state_count(rng);
        for (int s = 0; s < states; ++s) node.scale.states.push_back("s" + std::to_string(s));
        for (int p = 0; p < i; ++p) {
            if (static_cast<int>(node.parents.size()) < shape.max_parents && coin(rng)) node.parents.push_back(ids[p]);
        }
        std::shuffle(node.parents.begin(), node.parents.end(), rng);
        if (node.parents.empty()) {
            node.prior = random_distribution(rng, node.scale.size());
        } else {
            CptTable cpt;
            cpt.child_states = node.scale.states;
            cpt.parent_ids = node.parents;
            std::size_t columns = 1;
            for (const auto& p : node.parents) columns *= d.find_chance(p)->scale.size();
            for (std::size_t c = 0; c < columns; ++c) cpt.columns.push_back(random_distribution(rng, node.scale.size()));
            node.cpt = std::move(cpt);
        }
        d.chance_nodes.push_back(std::move(node));
    }

    std::uniform_int_distribution<int> utility_count(0, shape.max_utility_nodes);
    std::uniform_real_distribution<double> value(-1000.0, 1000.0);
    const int utilities = std::max(1, utility_count(rng));
    for (int u = 0; u < utilities; ++u) {
        UtilityNode node;
        node.id = "utility_" + std::to_string(u);
        node.label = "Utility " + std::to_string(u);
        for (const auto& c : d.chance_nodes) {
            if (node.parents.size() < 2 && coin(rng)) node.parents.push_back(c.id);
        }
        std::size_t combos = 1;
        for (const auto& p : node.parents) combos *= d.find_chance(p)->scale.size();
        for (std::size_t c = 0; c < combos; ++c) node.utilities.push_back(value(rng));
        d.utility_nodes.push_back(std::move(node));
    }
    return d;
}

/// Each chance node is observed with probability `rate`, at a uniform state.
inline inference::Evidence random_evidence(std::mt19937_64& rng, const InfluenceDiagram& d, double rate = 0.4) {
    std::bernoulli_distribution observe(rate);
    inference::Evidence e;
    for (const auto& node : d.chance_nodes) {
        if (!observe(rng)) continue;
        std::uniform_int_distribution<std::size_t> pick(0, node.scale.size() - 1);
        e.assignments[node.id] = node.scale.states[pick(rng)];
    }
    return e;
}

}  // namespace mast::testing
