#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "mast/inference.hpp"
#include "mast/training.hpp"

namespace httplib {
class Server;
}

namespace mast::service {

/// Unknown model id or factor (HTTP 404).
class NotFoundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FieldError {
    std::string field;
    std::string message;
};

/// Request content that fails validation (HTTP 422).
class UnprocessableError : public std::runtime_error {
public:
    UnprocessableError(const std::string& what, std::vector<FieldError> fields)
        : std::runtime_error(what), fields_(std::move(fields)) {}

    const std::vector<FieldError>& fields() const noexcept { return fields_; }

private:
    std::vector<FieldError> fields_;
};

struct SessionSnapshot {
    std::string model_id;
    training::MastModel model;
    inference::Evidence evidence;
    std::string created;
    std::string updated;
    std::uint64_t revision = 0;
};

struct InferenceSnapshot {
    training::TrainingEstimate estimate;
    inference::Evidence evidence;
    std::uint64_t revision = 0;
};

struct SensitivitySnapshot {
    inference::SensitivityResult result;
    inference::Evidence evidence;
    std::uint64_t revision = 0;
};

/// In-memory model sessions keyed by random tokens.
///
/// Mutations on one session are serialized and bump its revision by exactly
/// one; reads (infer, sensitivity, export) take a consistent copy and never
/// see a half-applied mutation. With a snapshot directory, every mutation is
/// written to `<id>.session.json` and existing snapshots are loaded on
/// construction.
class SessionStore {
public:
    explicit SessionStore(std::optional<std::filesystem::path> snapshot_dir = std::nullopt);

    SessionStore(const SessionStore&) = delete;
    SessionStore& operator=(const SessionStore&) = delete;

    SessionSnapshot create(const std::array<double, training::kFactorCount>& impacts,
                           double base_cost = training::kDefaultBaseCost);
    SessionSnapshot get(const std::string& model_id) const;

    SessionSnapshot set_evidence(const std::string& model_id, const std::string& factor_id,
                                 const std::string& state);
    SessionSnapshot clear_evidence(const std::string& model_id, const std::string& factor_id);
    /// Regenerates the CPT; evidence is kept.
    SessionSnapshot update_impacts(const std::string& model_id,
                                   const std::array<double, training::kFactorCount>& impacts,
                                   std::optional<double> base_cost = std::nullopt);

    InferenceSnapshot infer(const std::string& model_id) const;
    SensitivitySnapshot sensitivity(const std::string& model_id, const std::string& factor_id) const;

    std::size_t size() const;

private:
    struct Session {
        mutable std::shared_mutex mutex;
        SessionSnapshot state;
    };

    std::shared_ptr<Session> find(const std::string& model_id) const;
    template <typename Mutation>
    SessionSnapshot mutate(const std::string& model_id, Mutation&& mutation);
    void persist(const SessionSnapshot& snapshot) const;
    void load_snapshots();

    mutable std::shared_mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::optional<std::filesystem::path> snapshot_dir_;
};

/// 32 hex characters from the system entropy source.
std::string random_token();

struct ServerConfig {
    std::string host = "0.0.0.0";
    int port = 8080;
    std::optional<std::filesystem::path> snapshot_dir;
    std::string cors_origin = "*";
};

/// Registers every /api route on `server`, backed by `store`.
void install_routes(httplib::Server& server, SessionStore& store, const std::string& cors_origin = "*");

/// Blocks serving requests until the process is stopped. Returns non-zero
/// if the port could not be bound.
int run_server(const ServerConfig& config);

}  // namespace mast::service
