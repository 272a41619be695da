#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mast {

/// Input tables must sum to one within this tolerance. Nothing is ever
/// renormalized; a violation is reported instead.
inline constexpr double kNormalizationTolerance = 1e-9;

/// Ordered categorical states of a chance node, optionally mapped to numbers
/// in [0,1] (e.g. Probable/Possible/Remote -> 0.99999/0.5/0.00001).
struct OutcomeScale {
    std::vector<std::string> states;
    /// Aligned with `states` when present.
    std::optional<std::vector<double>> numeric_values;

    std::size_t size() const noexcept { return states.size(); }
    std::optional<std::size_t> index_of(std::string_view state) const;

    bool operator==(const OutcomeScale&) const = default;
};

/// Conditional distribution of a child for every parent-state combination.
///
/// Columns follow the canonical odometer order: parents in declared order,
/// the last declared parent varying fastest. Each column holds one
/// probability per child state.
struct CptTable {
    std::vector<std::string> child_states;
    std::vector<std::string> parent_ids;
    std::vector<std::vector<double>> columns;

    bool operator==(const CptTable&) const = default;
};

/// Random variable. Root nodes carry a prior; nodes with parents carry a CPT
/// and no prior.
struct ChanceNode {
    std::string id;
    std::string label;
    OutcomeScale scale;
    std::vector<std::string> parents;
    std::optional<CptTable> cpt;
    std::optional<std::vector<double>> prior;

    bool operator==(const ChanceNode&) const = default;
};

/// One utility value per parent combination, canonical order.
struct UtilityNode {
    std::string id;
    std::string label;
    std::vector<std::string> parents;
    std::vector<double> utilities;

    bool operator==(const UtilityNode&) const = default;
};

struct InfluenceDiagram {
    std::vector<ChanceNode> chance_nodes;
    std::vector<UtilityNode> utility_nodes;

    const ChanceNode* find_chance(std::string_view id) const;
    const UtilityNode* find_utility(std::string_view id) const;

    bool operator==(const InfluenceDiagram&) const = default;
};

// Canonical parent-combination enumeration (odometer, last position fastest).
// The product of an empty radix list is 1: a parentless table has one column.

std::size_t combination_count(std::span<const std::size_t> radices);
std::vector<std::size_t> combination_at(std::span<const std::size_t> radices, std::size_t index);
std::size_t combination_index(std::span<const std::size_t> radices,
                              std::span<const std::size_t> combination);

/// State counts of the named chance nodes, in the given order. Throws
/// ArgumentError for ids that are not chance nodes.
std::vector<std::size_t> state_counts(const InfluenceDiagram& diagram,
                                      std::span<const std::string> node_ids);

enum class ViolationKind {
    DuplicateId,
    InvalidScale,
    UnknownParent,
    DuplicateParent,
    Cycle,
    MissingPrior,
    UnexpectedPrior,
    PriorShape,
    PriorRange,
    PriorNormalization,
    MissingCpt,
    CptMismatch,
    CptShape,
    CptRange,
    CptNormalization,
    UtilityShape,
    UtilityNonFinite,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
    std::string node_id;
    ViolationKind kind;
    std::string message;
    /// Cycle members (sorted) for Cycle violations.
    std::vector<std::string> nodes;
    /// 1 - sum for normalization violations, otherwise 0.
    double deficit = 0.0;
};

/// Every invariant violation in the diagram, ordered by node id then kind.
/// An empty result means the diagram is valid.
std::vector<Violation> validate(const InfluenceDiagram& diagram);

/// Chance-node ids with every node after its parents; ties broken by id.
/// Throws StructuralError naming the cycle when the graph is cyclic.
std::vector<std::string> topological_order(const InfluenceDiagram& diagram);

/// Carries a full validation report.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<Violation> violations);

    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    std::vector<Violation> violations_;
};

/// Throws ValidationError if validate() reports anything.
void require_valid(const InfluenceDiagram& diagram);

std::string format_violations(const std::vector<Violation>& violations);

}  // namespace mast
