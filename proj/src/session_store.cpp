#include <chrono>
#include <ctime>
#include <random>

#include <json.hpp>

#include "mast/error.hpp"
#include "mast/model_io.hpp"
#include "mast/service.hpp"

namespace mast::service {

using nlohmann::json;

namespace {

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t seconds = std::chrono::system_clock::to_time_t(now);
    const auto millis =
        std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&seconds, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%S", &tm);
    char out[40];
    std::snprintf(out, sizeof out, "%s.%03dZ", buffer, static_cast<int>(millis));
    return out;
}

std::string valid_states() {
    std::string out;
    for (auto s : training::kOutcomeStates) out += (out.empty() ? "" : ", ") + std::string(s);
    return out;
}

std::size_t require_factor(const std::string& factor_id) {
    auto index = training::factor_index(factor_id);
    if (!index) {
        std::string valid;
        for (const auto& f : training::kFactors) valid += (valid.empty() ? "" : ", ") + std::string(f.id);
        throw NotFoundError("unknown factor '" + factor_id + "' (valid: " + valid + ")");
    }
    return *index;
}

}  // namespace

std::string random_token() {
    std::random_device device;
    std::uniform_int_distribution<unsigned> nibble(0, 15);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string token(32, '0');
    for (auto& c : token) c = kHex[nibble(device)];
    return token;
}

SessionStore::SessionStore(std::optional<std::filesystem::path> snapshot_dir)
    : snapshot_dir_(std::move(snapshot_dir)) {
    if (snapshot_dir_) {
        std::error_code ec;
        std::filesystem::create_directories(*snapshot_dir_, ec);
        if (ec) throw IoError("cannot create snapshot directory '" + snapshot_dir_->string() + "'");
        load_snapshots();
    }
}

std::shared_ptr<SessionStore::Session> SessionStore::find(const std::string& model_id) const {
    std::shared_lock lock(sessions_mutex_);
    auto it = sessions_.find(model_id);
    if (it == sessions_.end()) throw NotFoundError("unknown model '" + model_id + "'");
    return it->second;
}

SessionSnapshot SessionStore::create(const std::array<double, training::kFactorCount>& impacts, double base_cost) {
    auto session = std::make_shared<Session>();
    session->state.model = training::build_model(impacts, base_cost);
    session->state.created = session->state.updated = utc_now();
    session->state.revision = 1;

    std::unique_lock lock(sessions_mutex_);
    std::string id;
    do {
        id = random_token();
    } while (sessions_.count(id) != 0);
    session->state.model_id = id;
    sessions_.emplace(id, session);
    lock.unlock();

    std::unique_lock session_lock(session->mutex);
    persist(session->state);
    return session->state;
}

SessionSnapshot SessionStore::get(const std::string& model_id) const {
    auto session = find(model_id);
    std::shared_lock lock(session->mutex);
    return session->state;
}

template <typename Mutation>
SessionSnapshot SessionStore::mutate(const std::string& model_id, Mutation&& mutation) {
    auto session = find(model_id);
    std::unique_lock lock(session->mutex);
    SessionSnapshot next = session->state;
    mutation(next);
    next.revision = session->state.revision + 1;
    next.updated = utc_now();
    persist(next);
    session->state = next;
    return next;
}

SessionSnapshot SessionStore::set_evidence(const std::string& model_id, const std::string& factor_id,
                                           const std::string& state) {
    find(model_id);
    require_factor(factor_id);
    bool known = false;
    for (auto s : training::kOutcomeStates) known = known || s == state;
    if (!known) {
        throw UnprocessableError("unknown state '" + state + "' (valid: " + valid_states() + ")",
                                 {{"state", "must be one of " + valid_states()}});
    }
    return mutate(model_id, [&](SessionSnapshot& s) { s.evidence.assignments[factor_id] = state; });
}

SessionSnapshot SessionStore::clear_evidence(const std::string& model_id, const std::string& factor_id) {
    find(model_id);
    require_factor(factor_id);
    return mutate(model_id, [&](SessionSnapshot& s) { s.evidence.assignments.erase(factor_id); });
}

SessionSnapshot SessionStore::update_impacts(const std::string& model_id,
                                             const std::array<double, training::kFactorCount>& impacts,
                                             std::optional<double> base_cost) {
    return mutate(model_id, [&](SessionSnapshot& s) {
        auto factors = s.model.factors();
        for (std::size_t i = 0; i < training::kFactorCount; ++i) factors[i].impact = impacts[i];
        s.model = training::build_model(factors, base_cost.value_or(s.model.base_cost()));
    });
}

InferenceSnapshot SessionStore::infer(const std::string& model_id) const {
    const SessionSnapshot state = get(model_id);
    return {training::infer_training(state.model, state.evidence), state.evidence, state.revision};
}

SensitivitySnapshot SessionStore::sensitivity(const std::string& model_id, const std::string& factor_id) const {
    const SessionSnapshot state = get(model_id);
    if (!training::factor_index(factor_id)) {
        std::string valid;
        for (const auto& f : training::kFactors) valid += (valid.empty() ? "" : ", ") + std::string(f.id);
        throw UnprocessableError("unknown factor '" + factor_id + "' (valid: " + valid + ")",
                                 {{"vary", "must be one of " + valid}});
    }
    return {training::training_sensitivity(state.model, state.evidence, factor_id), state.evidence,
            state.revision};
}

std::size_t SessionStore::size() const {
    std::shared_lock lock(sessions_mutex_);
    return sessions_.size();
}

void SessionStore::persist(const SessionSnapshot& snapshot) const {
    if (!snapshot_dir_) return;
    json record{{"model_id", snapshot.model_id},
                {"revision", snapshot.revision},
                {"created", snapshot.created},
                {"updated", snapshot.updated},
                {"document", json::parse(io::save_model(snapshot.model, snapshot.evidence))}};
    const auto target = *snapshot_dir_ / (snapshot.model_id + ".session.json");
    const auto temporary = *snapshot_dir_ / (snapshot.model_id + ".session.json.tmp");
    io::write_file(temporary, record.dump(2) + "\n");
    std::error_code ec;
    std::filesystem::rename(temporary, target, ec);
    if (ec) throw IoError("cannot replace snapshot '" + target.string() + "': " + ec.message());
}

void SessionStore::load_snapshots() {
    for (const auto& entry : std::filesystem::directory_iterator(*snapshot_dir_)) {
        const std::string name = entry.path().filename().string();
        const std::string suffix = ".session.json";
        if (name.size() <= suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) {
            continue;
        }
        const json record = json::parse(io::read_file(entry.path()));
        auto loaded = io::load_model(record.at("document").dump());
        if (!loaded.mast) throw ConsistencyError("snapshot '" + name + "' has no risk-factor extension");

        auto session = std::make_shared<Session>();
        session->state.model_id = record.at("model_id").get<std::string>();
        session->state.model = std::move(*loaded.mast);
        session->state.evidence = std::move(loaded.evidence);
        session->state.created = record.at("created").get<std::string>();
        session->state.updated = record.at("updated").get<std::string>();
        session->state.revision = record.at("revision").get<std::uint64_t>();
        sessions_.emplace(session->state.model_id, std::move(session));
    }
}

}  // namespace mast::service
