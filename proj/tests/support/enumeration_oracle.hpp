#pragma once

// Brute-force reference for posterior and expected utility. Walks the joint
// space recursively in declaration order with its own table indexing and
// long double accumulation; shares nothing with the library's enumerator.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mast/diagram.hpp"
#include "mast/inference.hpp"

namespace mast::testing {

struct OracleResult {
    std::vector<long double> posterior;
    long double expected_utility = 0.0L;
    long double evidence_probability = 0.0L;
};

class EnumerationOracle {
public:
    EnumerationOracle(const InfluenceDiagram& d, const inference::Evidence& e, const std::string& query)
        : d_(d), e_(e), query_(query) {}

    OracleResult run() {
        const ChanceNode* q = d_.find_chance(query_);
        if (q == nullptr) throw std::invalid_argument("oracle: unknown query");
        mass_.assign(q->scale.size(), 0.0L);
        utility_mass_.assign(d_.utility_nodes.size(), {});
        for (std::size_t u = 0; u < d_.utility_nodes.size(); ++u) {
            utility_mass_[u].assign(d_.utility_nodes[u].utilities.size(), 0.0L);
        }
        recurse(0);

        OracleResult r;
        r.evidence_probability = total_;
        for (auto m : mass_) r.posterior.push_back(m / total_);
        for (std::size_t u = 0; u < d_.utility_nodes.size(); ++u) {
            for (std::size_t c = 0; c < utility_mass_[u].size(); ++c) {
                r.expected_utility += utility_mass_[u][c] / total_ * d_.utility_nodes[u].utilities[c];
            }
        }
        return r;
    }

private:
    // Mixed-radix index with the last parent fastest.
    std::size_t column(const std::vector<std::string>& parents) const {
        std::size_t index = 0;
        std::size_t stride = 1;
        for (std::size_t i = parents.size(); i-- > 0;) {
            index += assignment_.at(parents[i]) * stride;
            stride *= d_.find_chance(parents[i])->scale.size();
        }
        return index;
    }

    long double probability(const ChanceNode& node, std::size_t state) const {
        if (node.parents.empty()) return (*node.prior)[state];
        return node.cpt->columns[column(node.parents)][state];
    }

    void recurse(std::size_t k) {
        if (k == d_.chance_nodes.size()) {
            long double joint = 1.0L;
            for (const auto& node : d_.chance_nodes) joint *= probability(node, assignment_.at(node.id));
            total_ += joint;
            mass_[assignment_.at(query_)] += joint;
            for (std::size_t u = 0; u < d_.utility_nodes.size(); ++u) {
                utility_mass_[u][column(d_.utility_nodes[u].parents)] += joint;
            }
            return;
        }
        const ChanceNode& node = d_.chance_nodes[k];
        auto observed = e_.assignments.find(node.id);
        for (std::size_t s = 0; s < node.scale.size(); ++s) {
            if (observed != e_.assignments.end() && node.scale.states[s] != observed->second) continue;
            assignment_[node.id] = s;
            recurse(k + 1);
        }
    }

    const InfluenceDiagram& d_;
    const inference::Evidence& e_;
    std::string query_;
    std::map<std::string, std::size_t> assignment_;
    std::vector<long double> mass_;
    std::vector<std::vector<long double>> utility_mass_;
    long double total_ = 0.0L;
};

inline OracleResult enumerate_oracle(const InfluenceDiagram& d, const inference::Evidence& e,
                                     const std::string& query) {
    return EnumerationOracle(d, e, query).run();
}

}  // namespace mast::testing
