#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "mast/diagram.hpp"
#include "mast/inference.hpp"

namespace mast::training {

inline constexpr std::size_t kFactorCount = 4;
inline constexpr std::size_t kOutcomeCount = 3;
inline constexpr double kMaxImpact = 10.0;
inline constexpr double kDefaultBaseCost = 100000.0;

/// Outcome order used everywhere: most to least likely.
inline constexpr std::array<std::string_view, kOutcomeCount> kOutcomeStates{"Probable", "Possible", "Remote"};
inline constexpr std::array<double, kOutcomeCount> kDefaultOutcomeValues{0.99999, 0.5, 0.00001};

inline constexpr std::string_view kTrainingNodeId = "staff_training";
inline constexpr std::string_view kTrainingLabel = "Staff Training";
inline constexpr std::string_view kCostNodeId = "cost";
inline constexpr std::string_view kCostLabel = "Cost";
inline constexpr std::array<std::string_view, 2> kTrainingStates{"Yes", "No"};

struct FactorInfo {
    std::string_view id;
    std::string_view label;
};

/// The four staff-training risk factors in canonical (parent) order.
inline constexpr std::array<FactorInfo, kFactorCount> kFactors{{
    {"software", "Lack of experience with project software"},
    {"new_staff", "Newly Appointed Staff"},
    {"quality", "Staff not well versed with the required quality standards"},
    {"environment", "Lack of experience with project environment"},
}};

/// Index of a factor id in canonical order, if it is one of the four.
std::optional<std::size_t> factor_index(std::string_view id);

struct RiskFactor {
    std::string id;
    std::string label;
    /// Severity weight on the 0-10 scale.
    double impact = 0.0;
    /// Numeric value of Probable, Possible, Remote; strictly decreasing.
    std::array<double, kOutcomeCount> outcome_values = kDefaultOutcomeValues;
    std::array<double, kOutcomeCount> prior{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};

    bool operator==(const RiskFactor&) const = default;
};

/// Throws ArgumentError describing the first broken invariant.
void check_factor(const RiskFactor& factor);

/// re = r * e, the plain product.
double risk_exposure(double outcome_value, double impact);

/// Maps an exposure in [0,10] to its half-step contribution, first matching
/// branch wins, so integer boundaries fall in the lower bucket.
double contribution(double exposure);

/// P(training = Yes) for one combination of outcome indices (0 = Probable).
double training_probability(const std::array<RiskFactor, kFactorCount>& factors,
                            const std::array<std::size_t, kFactorCount>& outcomes);

/// 2 x 81 table: states {Yes, No}, parents in factor order.
CptTable generate_cpt(const std::array<RiskFactor, kFactorCount>& factors);

struct FactorOverride {
    std::optional<std::array<double, kOutcomeCount>> outcome_values;
    std::optional<std::array<double, kOutcomeCount>> prior;
};

using ModelOverrides = std::array<FactorOverride, kFactorCount>;

/// Immutable four-factor staff-training model. Rebuild to change impacts.
class MastModel {
public:
    const std::array<RiskFactor, kFactorCount>& factors() const noexcept { return factors_; }
    const RiskFactor& factor(std::string_view id) const;
    const std::string& training_node_id() const noexcept { return training_node_id_; }
    double base_cost() const noexcept { return base_cost_; }
    const InfluenceDiagram& diagram() const noexcept { return diagram_; }
    std::array<double, kFactorCount> impacts() const;

    bool operator==(const MastModel&) const = default;

private:
    friend MastModel build_model(const std::array<RiskFactor, kFactorCount>& factors, double base_cost);

    std::array<RiskFactor, kFactorCount> factors_;
    std::string training_node_id_;
    double base_cost_ = kDefaultBaseCost;
    InfluenceDiagram diagram_;
};

/// Default labels, outcome values and uniform priors, with optional per-factor
/// overrides.
MastModel build_model(const std::array<double, kFactorCount>& impacts, double base_cost = kDefaultBaseCost,
                      const ModelOverrides& overrides = {});

/// Build from fully specified factors (ids must be the canonical four, in order).
MastModel build_model(const std::array<RiskFactor, kFactorCount>& factors, double base_cost);

struct TrainingEstimate {
    double probability = 0.0;
    /// probability * 100
    double percentage = 0.0;
    /// Expected utility of the cost node.
    double cost = 0.0;
    inference::Posterior posterior;
};

/// Evidence may only name the four factor nodes; absent factors are
/// marginalized over their priors.
TrainingEstimate infer_training(const MastModel& model, const inference::Evidence& evidence);

/// Sweep one factor's three outcomes with everything else held.
inference::SensitivityResult training_sensitivity(const MastModel& model, const inference::Evidence& evidence,
                                                  const std::string& factor_id);

}  // namespace mast::training
