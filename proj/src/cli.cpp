#include "mast/cli.hpp"

#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mast/error.hpp"
#include "mast/model_io.hpp"
#include "mast/number_format.hpp"
#include "mast/service.hpp"
#include "mast/training.hpp"

namespace mast::cli {

using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& text, char separator) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, separator)) out.push_back(item);
    if (!text.empty() && text.back() == separator) out.emplace_back();
    return out;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

std::string factor_ids() {
    std::string out;
    for (const auto& f : training::kFactors) out += (out.empty() ? "" : ",") + std::string(f.id);
    return out;
}

std::array<double, training::kFactorCount> parse_impacts(const std::string& text) {
    const auto items = split(text, ',');
    if (items.size() != training::kFactorCount) {
        throw UsageError("--impacts expects 4 comma-separated values (" + factor_ids() + "), got " +
                         std::to_string(items.size()));
    }
    std::array<double, training::kFactorCount> impacts{};
    for (std::size_t i = 0; i < items.size(); ++i) {
        auto value = parse_real(trim(items[i]));
        if (!value) throw UsageError("--impacts: '" + items[i] + "' is not a number");
        if (!(*value >= 0.0 && *value <= training::kMaxImpact)) {
            throw UsageError("--impacts: " + std::string(training::kFactors[i].id) + " = " + items[i] +
                             " is outside [0,10]");
        }
        impacts[i] = *value;
    }
    return impacts;
}

inference::Evidence parse_evidence(const std::string& text) {
    inference::Evidence evidence;
    if (trim(text).empty()) return evidence;
    for (const auto& item : split(text, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw UsageError("--evidence: expected node=State, got '" + item + "'");
        evidence.assignments[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
    }
    return evidence;
}

// Unknown factors or states are domain errors that name the valid options.
void check_training_evidence(const training::MastModel& model, const inference::Evidence& evidence) {
    for (const auto& [node, state] : evidence.assignments) {
        if (!training::factor_index(node)) {
            throw ArgumentError("unknown factor '" + node + "' (valid: " + factor_ids() + ")");
        }
    }
    inference::check_evidence(model.diagram(), evidence);
}

std::string fixed(double value, int decimals) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(decimals) << value;
    return os.str();
}

json posterior_json(const inference::Posterior& p) {
    json out = json::object();
    for (std::size_t i = 0; i < p.states.size(); ++i) out[p.states[i]] = p.probabilities[i];
    return out;
}

struct Options {
    std::string impacts;
    double base_cost = training::kDefaultBaseCost;
    std::string out_path;
    std::string model_path;
    std::string evidence;
    std::string query;
    std::string vary;
    std::string format = "native";
    bool json_output = false;
    std::string host = "0.0.0.0";
    int port = 0;
    std::string snapshot_dir;
};

int cmd_init(const Options& o, std::ostream& out) {
    const auto model = training::build_model(parse_impacts(o.impacts), o.base_cost);
    io::write_file(o.out_path, io::save_model(model));
    out << std::left << std::setw(13) << "factor" << std::setw(8) << "impact" << "label\n";
    for (const auto& f : model.factors()) {
        out << std::left << std::setw(13) << f.id << std::setw(8) << format_real(f.impact) << f.label << "\n";
    }
    out << "base cost " << fixed(model.base_cost(), 2) << "\n";
    out << "wrote " << o.out_path << "\n";
    return kExitOk;
}

int cmd_infer(const Options& o, std::ostream& out) {
    const auto loaded = io::load_model_file(o.model_path);
    const auto evidence = parse_evidence(o.evidence);

    if (loaded.mast && o.query.empty()) {
        check_training_evidence(*loaded.mast, evidence);
        const auto estimate = training::infer_training(*loaded.mast, evidence);
        if (o.json_output) {
            json j{{"probability", estimate.probability},
                   {"percentage", estimate.percentage},
                   {"cost", estimate.cost},
                   {"posterior", posterior_json(estimate.posterior)},
                   {"evidence", evidence.assignments}};
            out << j.dump(2) << "\n";
        } else {
            out << "P(" << loaded.mast->training_node_id() << " = Yes) = " << format_real(estimate.probability)
                << "\n";
            out << "Staff training required: " << fixed(estimate.percentage, 1) << "%  cost "
                << fixed(estimate.cost, 2) << "\n";
        }
        return kExitOk;
    }

    if (o.query.empty()) throw UsageError("--query is required for models without risk factors");
    const auto result = inference::infer(loaded.diagram, evidence, o.query);
    if (o.json_output) {
        json j{{"query", o.query},
               {"posterior", posterior_json(result.posterior)},
               {"expected_utility", result.expected_utility},
               {"evidence", evidence.assignments}};
        out << j.dump(2) << "\n";
    } else {
        for (std::size_t i = 0; i < result.posterior.states.size(); ++i) {
            out << "P(" << o.query << " = " << result.posterior.states[i]
                << ") = " << format_real(result.posterior.probabilities[i]) << "\n";
        }
        out << "expected utility " << fixed(result.expected_utility, 2) << "\n";
    }
    return kExitOk;
}

int cmd_sensitivity(const Options& o, std::ostream& out) {
    const auto loaded = io::load_model_file(o.model_path);
    const auto evidence = parse_evidence(o.evidence);

    inference::SensitivityResult result;
    if (loaded.mast && o.query.empty()) {
        check_training_evidence(*loaded.mast, evidence);
        if (!training::factor_index(o.vary)) {
            throw ArgumentError("unknown factor '" + o.vary + "' (valid: " + factor_ids() + ")");
        }
        result = training::training_sensitivity(*loaded.mast, evidence, o.vary);
    } else {
        if (o.query.empty()) throw UsageError("--query is required for models without risk factors");
        result = inference::sensitivity(loaded.diagram, evidence, o.query, o.vary);
    }

    if (o.json_output) {
        json rows = json::array();
        for (const auto& row : result.rows) {
            const double p = row.posterior.probability_of(result.designated_state);
            rows.push_back({{"state", row.state},
                            {"probability", p},
                            {"percentage", p * 100.0},
                            {"cost", row.expected_utility},
                            {"posterior", posterior_json(row.posterior)}});
        }
        json j{{"vary", result.vary},
               {"query", result.query},
               {"designated_state", result.designated_state},
               {"rows", std::move(rows)},
               {"spread", result.spread},
               {"evidence", evidence.assignments}};
        out << j.dump(2) << "\n";
        return kExitOk;
    }

    out << "vary " << result.vary << ", query " << result.query << " = " << result.designated_state << "\n";
    out << std::left << std::setw(12) << "state" << std::setw(20) << "probability" << std::setw(10) << "percent"
        << "cost\n";
    for (const auto& row : result.rows) {
        const double p = row.posterior.probability_of(result.designated_state);
        out << std::left << std::setw(12) << row.state << std::setw(20) << format_real(p) << std::setw(10)
            << (fixed(p * 100.0, 1) + "%") << fixed(row.expected_utility, 2) << "\n";
    }
    out << "spread " << fixed(result.spread, 3) << "\n";
    return kExitOk;
}

int cmd_export(const Options& o, std::ostream& out) {
    const auto loaded = io::load_model_file(o.model_path);
    if (o.format == "xdsl") {
        io::write_file(o.out_path, io::export_xdsl(loaded.diagram));
    } else if (loaded.mast) {
        io::write_file(o.out_path, io::save_model(*loaded.mast, loaded.evidence));
    } else {
        io::write_file(o.out_path, io::save_model(loaded.diagram));
    }
    out << "wrote " << o.out_path << " (" << o.format << ")\n";
    return kExitOk;
}

int cmd_import(const Options& o, std::ostream& out, std::ostream& err) {
    const std::string text = io::read_file(o.model_path);
    if (o.format == "xdsl") {
        const auto imported = io::import_xdsl(text);
        for (const auto& w : imported.warnings) err << "warning: " << w << "\n";
        io::write_file(o.out_path, io::save_model(imported.diagram));
    } else {
        const auto loaded = io::load_model(text);
        io::write_file(o.out_path, loaded.mast ? io::save_model(*loaded.mast, loaded.evidence)
                                               : io::save_model(loaded.diagram));
    }
    out << "wrote " << o.out_path << " (native)\n";
    return kExitOk;
}

int cmd_serve(const Options& o) {
    service::ServerConfig config;
    config.host = o.host;
    config.port = o.port;
    if (config.port == 0) {
        const char* env = std::getenv("PORT");
        config.port = env != nullptr ? std::atoi(env) : 8080;
    }
    std::string dir = o.snapshot_dir;
    if (dir.empty()) {
        if (const char* env = std::getenv("SNAPSHOT_DIR")) dir = env;
    }
    if (!dir.empty()) config.snapshot_dir = dir;
    return service::run_server(config);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Staff-training risk model: build, infer, sweep and convert influence diagrams", "mastctl"};
    app.require_subcommand(1);
    app.footer("Risk factors (canonical order): software, new_staff, quality, environment\n"
               "  software     Lack of experience with project software\n"
               "  new_staff    Newly Appointed Staff\n"
               "  quality      Staff not well versed with the required quality standards\n"
               "  environment  Lack of experience with project environment\n"
               "States: Probable, Possible, Remote. Omitting a factor from --evidence clears it.");

    Options o;
    auto* init = app.add_subcommand("init", "Build a four-factor model and write it in native format");
    init->add_option("--impacts", o.impacts, "Four impacts in [0,10]: software,new_staff,quality,environment")
        ->required();
    init->add_option("--base-cost", o.base_cost, "Cost of training when it is certainly required")
        ->capture_default_str();
    init->add_option("--out", o.out_path, "Output .mast.json file")->required();

    auto* infer = app.add_subcommand("infer", "Estimate training percentage and expected cost");
    infer->add_option("--model", o.model_path, "Native model file")->required();
    infer->add_option("--evidence", o.evidence, "factor=State,... (omitted factors are unobserved)");
    infer->add_option("--query", o.query, "Query node for generic diagrams");
    infer->add_flag("--json", o.json_output, "Machine-readable, unrounded output");

    auto* sens = app.add_subcommand("sensitivity", "Sweep one factor over its states");
    sens->add_option("--model", o.model_path, "Native model file")->required();
    sens->add_option("--vary", o.vary, "Factor (or node) to vary")->required();
    sens->add_option("--evidence", o.evidence, "factor=State,...");
    sens->add_option("--query", o.query, "Query node for generic diagrams");
    sens->add_flag("--json", o.json_output, "Machine-readable, unrounded output");

    auto* exp = app.add_subcommand("export", "Convert a native model to xdsl or native");
    exp->add_option("--model", o.model_path, "Native model file")->required();
    exp->add_option("--format", o.format, "xdsl|native")
        ->check(CLI::IsMember({"xdsl", "native"}))
        ->capture_default_str();
    exp->add_option("--out", o.out_path, "Output file")->required();

    auto* imp = app.add_subcommand("import", "Read an xdsl or native file and write native");
    imp->add_option("--model", o.model_path, "Input file")->required();
    imp->add_option("--format", o.format, "Input format: xdsl|native")
        ->check(CLI::IsMember({"xdsl", "native"}))
        ->capture_default_str();
    imp->add_option("--out", o.out_path, "Output .mast.json file")->required();

    auto* serve = app.add_subcommand("serve", "Run the HTTP API (PORT, SNAPSHOT_DIR env vars)");
    serve->add_option("--host", o.host, "Bind address")->capture_default_str();
    serve->add_option("--port", o.port, "Port (default $PORT or 8080)");
    serve->add_option("--snapshot-dir", o.snapshot_dir, "Persist sessions here (default $SNAPSHOT_DIR)");

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsageError;
    }

    try {
        if (init->parsed()) return cmd_init(o, out);
        if (infer->parsed()) return cmd_infer(o, out);
        if (sens->parsed()) return cmd_sensitivity(o, out);
        if (exp->parsed()) return cmd_export(o, out);
        if (imp->parsed()) return cmd_import(o, out, err);
        if (serve->parsed()) return cmd_serve(o);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitDomainError;
    }
    return kExitUsageError;
}

}  // namespace mast::cli
