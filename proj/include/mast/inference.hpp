#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mast/diagram.hpp"

namespace mast::inference {

/// Hard evidence: chance-node id -> observed state. Absent nodes are
/// unobserved and get marginalized over.
struct Evidence {
    std::map<std::string, std::string> assignments;

    bool operator==(const Evidence&) const = default;
};

struct Posterior {
    std::string node_id;
    /// Aligned with the node's scale states.
    std::vector<std::string> states;
    std::vector<double> probabilities;

    double probability_of(const std::string& state) const;
};

struct InferenceResult {
    Posterior posterior;
    double expected_utility = 0.0;
};

struct Options {
    /// Upper bound on the joint state space enumerated for one query.
    std::size_t max_joint_states = 1'000'000;
};

/// Throws ArgumentError if any assignment names an unknown node or state.
void check_evidence(const InfluenceDiagram& diagram, const Evidence& evidence);

/// Exact P(query | evidence) by full enumeration of chance-node states.
///
/// Nodes are enumerated in id order, so the result does not depend on the
/// order in which nodes were declared.
Posterior posterior(const InfluenceDiagram& diagram, const Evidence& evidence,
                    const std::string& query, const Options& options = {});

/// Sum over utility nodes of sum_combo P(combo | evidence) * U(combo).
double expected_utility(const InfluenceDiagram& diagram, const Evidence& evidence,
                        const Options& options = {});

/// Posterior and expected utility from a single enumeration pass.
InferenceResult infer(const InfluenceDiagram& diagram, const Evidence& evidence,
                      const std::string& query, const Options& options = {});

struct SensitivityRow {
    std::string state;
    Posterior posterior;
    double expected_utility = 0.0;
};

struct SensitivityResult {
    std::string query;
    std::string vary;
    std::string designated_state;
    std::vector<SensitivityRow> rows;
    /// max - min of P(query = designated_state) across rows.
    double spread = 0.0;
};

/// One-way sweep: for each state of `vary`, re-run inference with that state
/// forced (replacing any evidence already on `vary`). The designated state
/// defaults to the query's first state.
SensitivityResult sensitivity(const InfluenceDiagram& diagram, const Evidence& evidence,
                              const std::string& query, const std::string& vary,
                              const std::optional<std::string>& designated_state = std::nullopt,
                              const Options& options = {});

}  // namespace mast::inference
