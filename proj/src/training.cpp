#include "mast/training.hpp"

#include <cmath>
#include <sstream>

#include "mast/error.hpp"

namespace mast::training {

namespace {

std::string number(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

bool in_unit_interval(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

std::optional<std::size_t> factor_index(std::string_view id) {
    for (std::size_t i = 0; i < kFactors.size(); ++i) {
        if (kFactors[i].id == id) return i;
    }
    return std::nullopt;
}

void check_factor(const RiskFactor& factor) {
    if (!(factor.impact >= 0.0 && factor.impact <= kMaxImpact)) {
        throw ArgumentError("factor '" + factor.id + "': impact " + number(factor.impact) +
                            " outside [0,10]");
    }
    for (double v : factor.outcome_values) {
        if (!in_unit_interval(v)) {
            throw ArgumentError("factor '" + factor.id + "': outcome value " + number(v) + " outside [0,1]");
        }
    }
    const auto& ov = factor.outcome_values;
    if (!(ov[0] > ov[1] && ov[1] > ov[2])) {
        throw ArgumentError("factor '" + factor.id +
                            "': outcome values must be strictly decreasing Probable > Possible > Remote");
    }
    double sum = 0.0;
    for (double p : factor.prior) {
        if (!in_unit_interval(p)) {
            throw ArgumentError("factor '" + factor.id + "': prior entry " + number(p) + " outside [0,1]");
        }
        sum += p;
    }
    if (std::fabs(sum - 1.0) > kNormalizationTolerance) {
        throw ArgumentError("factor '" + factor.id + "': prior sums to " + number(sum));
    }
}

double risk_exposure(double outcome_value, double impact) {
    if (!in_unit_interval(outcome_value)) {
        throw ArgumentError("risk_exposure: outcome value " + number(outcome_value) + " outside [0,1]");
    }
    if (!(impact >= 0.0 && impact <= kMaxImpact)) {
        throw ArgumentError("risk_exposure: impact " + number(impact) + " outside [0,10]");
    }
    return outcome_value * impact;
}

double contribution(double re) {
    if (!(re >= 0.0 && re <= 10.0)) {
        throw ArgumentError("contribution: exposure " + number(re) + " outside [0,10]");
    }
    if (re < 1.0) return 0.0;
    if (re <= 2.0) return 0.5;
    if (re <= 3.0) return 1.0;
    if (re <= 4.0) return 1.5;
    if (re <= 5.0) return 2.0;
    if (re <= 6.0) return 2.5;
    if (re <= 7.0) return 3.0;
    if (re <= 8.0) return 3.5;
    if (re <= 9.0) return 4.0;
    return 4.5;
}

double training_probability(const std::array<RiskFactor, kFactorCount>& factors,
                            const std::array<std::size_t, kFactorCount>& outcomes) {
    double overall = 0.0;
    for (std::size_t i = 0; i < kFactorCount; ++i) {
        const RiskFactor& f = factors[i];
        overall += contribution(risk_exposure(f.outcome_values.at(outcomes[i]), f.impact));
    }
    overall /= 10.0;
    // Saturate: a probability cannot exceed 1.
    if (overall > 1.0) overall = 1.0;
    return overall;
}

CptTable generate_cpt(const std::array<RiskFactor, kFactorCount>& factors) {
    for (const auto& f : factors) check_factor(f);

    CptTable cpt;
    cpt.child_states.assign(kTrainingStates.begin(), kTrainingStates.end());
    for (const auto& f : factors) cpt.parent_ids.push_back(f.id);

    const std::array<std::size_t, kFactorCount> radices{kOutcomeCount, kOutcomeCount, kOutcomeCount,
                                                        kOutcomeCount};
    const std::size_t columns = combination_count(radices);
    cpt.columns.reserve(columns);
    for (std::size_t index = 0; index < columns; ++index) {
        const auto combo = combination_at(radices, index);
        std::array<std::size_t, kFactorCount> outcomes{};
        std::copy(combo.begin(), combo.end(), outcomes.begin());
        const double yes = training_probability(factors, outcomes);
        cpt.columns.push_back({yes, 1.0 - yes});
    }
    return cpt;
}

const RiskFactor& MastModel::factor(std::string_view id) const {
    if (auto i = factor_index(id)) return factors_[*i];
    throw ArgumentError("unknown risk factor '" + std::string(id) + "'");
}

std::array<double, kFactorCount> MastModel::impacts() const {
    std::array<double, kFactorCount> out{};
    for (std::size_t i = 0; i < kFactorCount; ++i) out[i] = factors_[i].impact;
    return out;
}

MastModel build_model(const std::array<double, kFactorCount>& impacts, double base_cost,
                      const ModelOverrides& overrides) {
    std::array<RiskFactor, kFactorCount> factors;
    for (std::size_t i = 0; i < kFactorCount; ++i) {
        if (!(impacts[i] >= 0.0 && impacts[i] <= kMaxImpact)) {
            throw ArgumentError("impact[" + std::to_string(i) + "] (" + std::string(kFactors[i].id) +
                                ") = " + number(impacts[i]) + " outside [0,10]");
        }
        RiskFactor& f = factors[i];
        f.id = kFactors[i].id;
        f.label = kFactors[i].label;
        f.impact = impacts[i];
        if (overrides[i].outcome_values) f.outcome_values = *overrides[i].outcome_values;
        if (overrides[i].prior) f.prior = *overrides[i].prior;
    }
    return build_model(factors, base_cost);
}

MastModel build_model(const std::array<RiskFactor, kFactorCount>& factors, double base_cost) {
    if (!(base_cost >= 0.0) || !std::isfinite(base_cost)) {
        throw ArgumentError("base cost " + number(base_cost) + " must be finite and >= 0");
    }
    for (std::size_t i = 0; i < kFactorCount; ++i) {
        if (factors[i].id != kFactors[i].id) {
            throw ArgumentError("factor " + std::to_string(i) + " must have id '" + std::string(kFactors[i].id) +
                                "', got '" + factors[i].id + "'");
        }
    }

    MastModel model;
    model.factors_ = factors;
    model.training_node_id_ = std::string(kTrainingNodeId);
    model.base_cost_ = base_cost;

    InfluenceDiagram& d = model.diagram_;
    for (const auto& f : factors) {
        ChanceNode node;
        node.id = f.id;
        node.label = f.label;
        node.scale.states.assign(kOutcomeStates.begin(), kOutcomeStates.end());
        node.scale.numeric_values = std::vector<double>(f.outcome_values.begin(), f.outcome_values.end());
        node.prior = std::vector<double>(f.prior.begin(), f.prior.end());
        d.chance_nodes.push_back(std::move(node));
    }

    ChanceNode training;
    training.id = model.training_node_id_;
    training.label = std::string(kTrainingLabel);
    training.scale.states.assign(kTrainingStates.begin(), kTrainingStates.end());
    training.cpt = generate_cpt(factors);
    training.parents = training.cpt->parent_ids;
    d.chance_nodes.push_back(std::move(training));

    UtilityNode cost;
    cost.id = std::string(kCostNodeId);
    cost.label = std::string(kCostLabel);
    cost.parents = {model.training_node_id_};
    cost.utilities = {base_cost, 0.0};
    d.utility_nodes.push_back(std::move(cost));

    require_valid(d);
    return model;
}

TrainingEstimate infer_training(const MastModel& model, const inference::Evidence& evidence) {
    for (const auto& [node_id, state] : evidence.assignments) {
        if (!factor_index(node_id)) {
            throw ArgumentError("evidence may only be set on risk factors, not '" + node_id + "'");
        }
    }
    const auto result = inference::infer(model.diagram(), evidence, model.training_node_id());

    TrainingEstimate estimate;
    estimate.probability = result.posterior.probability_of(std::string(kTrainingStates[0]));
    estimate.percentage = estimate.probability * 100.0;
    estimate.cost = result.expected_utility;
    estimate.posterior = result.posterior;
    return estimate;
}

inference::SensitivityResult training_sensitivity(const MastModel& model, const inference::Evidence& evidence,
                                                  const std::string& factor_id) {
    if (!factor_index(factor_id)) throw ArgumentError("unknown risk factor '" + factor_id + "'");
    for (const auto& [node_id, state] : evidence.assignments) {
        if (!factor_index(node_id)) {
            throw ArgumentError("evidence may only be set on risk factors, not '" + node_id + "'");
        }
    }
    return inference::sensitivity(model.diagram(), evidence, model.training_node_id(), factor_id,
                                  std::string(kTrainingStates[0]));
}

}  // namespace mast::training
