#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mast/diagram.hpp"
#include "mast/inference.hpp"
#include "mast/training.hpp"

namespace mast::io {

inline constexpr std::string_view kFormatVersion = "1.0";

/// Risk-factor parameters stored next to a generated diagram so the CPT can
/// be regenerated and checked on load.
struct MastExtension {
    std::array<training::RiskFactor, training::kFactorCount> factors;
    double base_cost = training::kDefaultBaseCost;
    std::string training_node_id;
    inference::Evidence evidence;
};

/// Result of load_model. `mast` is set when the document carried a risk-factor
/// extension; `evidence` is its stored evidence snapshot (empty otherwise).
struct LoadedModel {
    InfluenceDiagram diagram;
    std::optional<training::MastModel> mast;
    inference::Evidence evidence;
};

// Native format: JSON, sorted keys, extension .mast.json.

/// Throws ValidationError when the diagram is invalid.
std::string save_model(const InfluenceDiagram& diagram);
std::string save_model(const training::MastModel& model, const inference::Evidence& evidence = {});

/// Throws ParseError (with line/column), VersionError, ValidationError or
/// ConsistencyError (stored CPT disagrees with stored impacts).
LoadedModel load_model(std::string_view text);
LoadedModel load_model_file(const std::filesystem::path& path);

// XDSL: the SMILE/GeNIe XML layout.

struct XdslImport {
    InfluenceDiagram diagram;
    /// One entry per ignored element or attribute.
    std::vector<std::string> warnings;
};

/// Deterministic. Node ids and state ids are sanitized to XML-friendly
/// identifiers; originals, labels and numeric outcome values are kept in the
/// extensions block so import restores them.
std::string export_xdsl(const InfluenceDiagram& diagram, std::string_view network_id = "mast_network");

/// Throws ParseError (with line) for malformed XML, StructuralError for
/// table-shape problems, ValidationError for an invalid resulting diagram.
XdslImport import_xdsl(std::string_view text);

/// Alphanumerics and underscores only, starting with a letter ("n_" prefix
/// otherwise).
std::string sanitize_identifier(std::string_view id);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace mast::io
