#include <cmath>
#include <iostream>

#include <httplib.h>
#include <json.hpp>

#include "mast/error.hpp"
#include "mast/model_io.hpp"
#include "mast/service.hpp"

namespace mast::service {

using nlohmann::json;

namespace {

constexpr const char* kJson = "application/json";

json factors_json(const training::MastModel& model) {
    json out = json::array();
    for (const auto& f : model.factors()) {
        out.push_back({{"id", f.id}, {"label", f.label}, {"impact", f.impact}});
    }
    return out;
}

json snapshot_json(const SessionSnapshot& s) {
    return {{"model_id", s.model_id},
            {"revision", s.revision},
            {"created", s.created},
            {"updated", s.updated},
            {"base_cost", s.model.base_cost()},
            {"training_node_id", s.model.training_node_id()},
            {"factors", factors_json(s.model)},
            {"evidence", s.evidence.assignments}};
}

json posterior_json(const inference::Posterior& p) {
    json out = json::object();
    for (std::size_t i = 0; i < p.states.size(); ++i) out[p.states[i]] = p.probabilities[i];
    return out;
}

void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), kJson);
}

void reply_error(httplib::Response& res, int status, const std::string& message,
                 const std::vector<FieldError>& fields = {}) {
    json body{{"error", message}};
    if (!fields.empty()) {
        json errors = json::array();
        for (const auto& f : fields) errors.push_back({{"field", f.field}, {"message", f.message}});
        body["errors"] = std::move(errors);
    }
    reply(res, status, body);
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
        return json::parse(req.body);
    } catch (const json::parse_error& e) {
        throw UnprocessableError(std::string("malformed JSON body: ") + e.what(), {{"body", "malformed JSON"}});
    }
}

std::array<double, training::kFactorCount> parse_impacts(const json& body) {
    std::vector<FieldError> errors;
    std::array<double, training::kFactorCount> impacts{};
    auto it = body.find("impacts");
    if (!body.is_object() || it == body.end()) {
        errors.push_back({"impacts", "required: array of 4 numbers in [0,10]"});
    } else if (!it->is_array() || it->size() != training::kFactorCount) {
        errors.push_back({"impacts", "expected 4 impacts (software, new_staff, quality, environment), got " +
                                         (it->is_array() ? std::to_string(it->size()) : std::string("non-array"))});
    } else {
        for (std::size_t i = 0; i < training::kFactorCount; ++i) {
            const json& v = (*it)[i];
            const std::string field = "impacts[" + std::to_string(i) + "]";
            if (!v.is_number()) {
                errors.push_back({field, "must be a number"});
                continue;
            }
            impacts[i] = v.get<double>();
            if (!(impacts[i] >= 0.0 && impacts[i] <= training::kMaxImpact)) {
                errors.push_back({field, "impact of '" + std::string(training::kFactors[i].id) +
                                             "' must be within [0,10]"});
            }
        }
    }
    if (!errors.empty()) throw UnprocessableError("invalid impacts", std::move(errors));
    return impacts;
}

std::optional<double> parse_base_cost(const json& body) {
    auto it = body.find("base_cost");
    if (it == body.end() || it->is_null()) return std::nullopt;
    if (!it->is_number() || !(it->get<double>() >= 0.0) || !std::isfinite(it->get<double>())) {
        throw UnprocessableError("invalid base_cost", {{"base_cost", "must be a finite number >= 0"}});
    }
    return it->get<double>();
}

std::string required_string(const json& body, const char* key) {
    auto it = body.find(key);
    if (!body.is_object() || it == body.end() || !it->is_string()) {
        throw UnprocessableError(std::string("missing '") + key + "'", {{key, "required string"}});
    }
    return it->get<std::string>();
}

// Runs a handler, mapping domain exceptions onto status codes.
template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
        try {
            handler(req, res);
        } catch (const NotFoundError& e) {
            reply_error(res, 404, e.what());
        } catch (const UnprocessableError& e) {
            reply_error(res, 422, e.what(), e.fields());
        } catch (const ArgumentError& e) {
            reply_error(res, 422, e.what());
        } catch (const ImpossibleEvidenceError& e) {
            reply_error(res, 422, e.what());
        } catch (const std::exception& e) {
            reply_error(res, 500, e.what());
        }
    };
}

}  // namespace

void install_routes(httplib::Server& server, SessionStore& store, const std::string& cors_origin) {
    server.set_default_headers({{"Access-Control-Allow-Origin", cors_origin},
                                {"Access-Control-Allow-Methods", "GET, POST, PUT, PATCH, DELETE, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});

    server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
        reply(res, 200, {{"status", "ok"}});
    });

    server.Post("/api/models", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        const json body = parse_body(req);
        const auto impacts = parse_impacts(body);
        const double base_cost = parse_base_cost(body).value_or(training::kDefaultBaseCost);
        reply(res, 201, snapshot_json(store.create(impacts, base_cost)));
    }));

    server.Get(R"(/api/models/([^/]+))", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        reply(res, 200, snapshot_json(store.get(req.matches[1])));
    }));

    server.Patch(R"(/api/models/([^/]+)/impacts)",
                 guarded([&store](const httplib::Request& req, httplib::Response& res) {
                     const std::string id = req.matches[1];
                     store.get(id);
                     const json body = parse_body(req);
                     const auto impacts = parse_impacts(body);
                     reply(res, 200, snapshot_json(store.update_impacts(id, impacts, parse_base_cost(body))));
                 }));

    server.Put(R"(/api/models/([^/]+)/evidence/([^/]+))",
               guarded([&store](const httplib::Request& req, httplib::Response& res) {
                   const std::string id = req.matches[1];
                   const std::string factor = req.matches[2];
                   store.get(id);
                   const std::string state = required_string(parse_body(req), "state");
                   const auto s = store.set_evidence(id, factor, state);
                   reply(res, 200, {{"model_id", s.model_id}, {"revision", s.revision}, {"evidence", s.evidence.assignments}});
               }));

    server.Delete(R"(/api/models/([^/]+)/evidence/([^/]+))",
                  guarded([&store](const httplib::Request& req, httplib::Response& res) {
                      const auto s = store.clear_evidence(req.matches[1], req.matches[2]);
                      reply(res, 200, {{"model_id", s.model_id}, {"revision", s.revision}, {"evidence", s.evidence.assignments}});
                  }));

    server.Post(R"(/api/models/([^/]+)/infer)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        const auto r = store.infer(id);
        reply(res, 200,
              {{"model_id", id},
               {"probability", r.estimate.probability},
               {"percentage", r.estimate.percentage},
               {"cost", r.estimate.cost},
               {"posterior", posterior_json(r.estimate.posterior)},
               {"evidence", r.evidence.assignments},
               {"revision", r.revision}});
    }));

    server.Post(R"(/api/models/([^/]+)/sensitivity)",
                guarded([&store](const httplib::Request& req, httplib::Response& res) {
                    const std::string id = req.matches[1];
                    store.get(id);
                    const std::string vary = required_string(parse_body(req), "vary");
                    const auto s = store.sensitivity(id, vary);
                    json rows = json::array();
                    for (const auto& row : s.result.rows) {
                        const double p = row.posterior.probability_of(s.result.designated_state);
                        rows.push_back({{"state", row.state},
                                        {"probability", p},
                                        {"percentage", p * 100.0},
                                        {"cost", row.expected_utility},
                                        {"posterior", posterior_json(row.posterior)}});
                    }
                    reply(res, 200,
                          {{"model_id", id},
                           {"vary", s.result.vary},
                           {"query", s.result.query},
                           {"designated_state", s.result.designated_state},
                           {"rows", std::move(rows)},
                           {"spread", s.result.spread},
                           {"evidence", s.evidence.assignments},
                           {"revision", s.revision}});
                }));

    server.Get(R"(/api/models/([^/]+)/export)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        const auto s = store.get(req.matches[1]);
        const std::string format = req.has_param("format") ? req.get_param_value("format") : "native";
        if (format == "xdsl") {
            res.set_header("Content-Disposition", "attachment; filename=\"" + s.model_id + ".xdsl\"");
            res.set_content(io::export_xdsl(s.model.diagram()), "application/xml");
        } else if (format == "native") {
            res.set_header("Content-Disposition", "attachment; filename=\"" + s.model_id + ".mast.json\"");
            res.set_content(io::save_model(s.model, s.evidence), kJson);
        } else {
            throw UnprocessableError("unknown export format '" + format + "'",
                                     {{"format", "must be 'xdsl' or 'native'"}});
        }
        res.status = 200;
    }));
}

int run_server(const ServerConfig& config) {
    SessionStore store(config.snapshot_dir);
    httplib::Server server;
    install_routes(server, store, config.cors_origin);
    std::cerr << "mast service listening on " << config.host << ":" << config.port;
    if (config.snapshot_dir) std::cerr << " (snapshots in " << config.snapshot_dir->string() << ", " << store.size() << " restored)";
    std::cerr << std::endl;
    if (!server.listen(config.host, config.port)) {
        std::cerr << "error: cannot listen on " << config.host << ":" << config.port << std::endl;
        return 1;
    }
    return 0;
}

}  // namespace mast::service
