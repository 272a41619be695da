#pragma once

#include <array>
#include <string>

#include "mast/diagram.hpp"
#include "mast/inference.hpp"

namespace mast::testing {

/// Reference-scenario weights in canonical factor order (software, new_staff,
/// quality, environment). The scenario lists environment before quality; the
/// mapping here goes by factor name.
inline constexpr std::array<double, 4> kReferenceImpacts{6.0, 9.0, 2.0, 4.0};

inline inference::Evidence reference_evidence() {
    return {{{"software", "Possible"}, {"new_staff", "Remote"}, {"quality", "Possible"}, {"environment", "Probable"}}};
}

inline inference::Evidence uniform_evidence(const std::string& state) {
    return {{{"software", state}, {"new_staff", state}, {"quality", state}, {"environment", state}}};
}

inline ChanceNode root_node(const std::string& id, std::vector<std::string> states, std::vector<double> prior) {
    ChanceNode n;
    n.id = id;
    n.label = id;
    n.scale.states = std::move(states);
    n.prior = std::move(prior);
    return n;
}

inline ChanceNode child_node(const std::string& id, std::vector<std::string> states,
                             std::vector<std::string> parents, std::vector<std::vector<double>> columns) {
    ChanceNode n;
    n.id = id;
    n.label = id;
    n.scale.states = states;
    n.parents = parents;
    n.cpt = CptTable{std::move(states), std::move(parents), std::move(columns)};
    return n;
}

}  // namespace mast::testing
