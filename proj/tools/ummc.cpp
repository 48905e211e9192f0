// Command-line front end: simulate traces, fit activity patterns, build
// user metamodels, evaluate queries and sweeps, export PRISM files.
//
// Exit codes: 0 success, 1 usage/configuration, 2 input parse error,
// 3 model or evaluation error, 4 I/O error.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ummc/checker.hpp"
#include "ummc/document.hpp"
#include "ummc/errors.hpp"
#include "ummc/fixtures.hpp"
#include "ummc/inference.hpp"
#include "ummc/numeric.hpp"
#include "ummc/prism.hpp"
#include "ummc/questions.hpp"
#include "ummc/umm.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitParse = 2;
constexpr int kExitModel = 3;
constexpr int kExitIo = 4;

struct CliError {
    int code;
    std::string message;
};

[[noreturn]] void fail(int code, const std::string& message) {
    throw CliError{code, message};
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(kExitIo, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(kExitIo, "cannot write '" + path + "'");
    return out;
}

std::string document_kind(const std::string& text) {
    try {
        auto doc = nlohmann::json::parse(text);
        return doc.value("kind", "");
    } catch (const nlohmann::json::exception& e) {
        throw ummc::ParseError(std::string("document is not valid JSON: ") +
                               e.what());
    }
}

ummc::ModelDocument load_mixture(const std::string& path) {
    std::istringstream in(read_file(path));
    return ummc::load_model_document(in);
}

std::vector<double> parse_theta(const std::string& text) {
    std::vector<double> theta;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            theta.push_back(std::stod(item));
        } catch (const std::exception&) {
            fail(kExitUsage, "malformed strategy entry '" + item + "'");
        }
    }
    if (theta.empty()) fail(kExitUsage, "empty strategy vector");
    return theta;
}

std::vector<double> resolve_theta(const ummc::ModelDocument& doc,
                                  const std::string& theta_text,
                                  const std::string& user) {
    if (!theta_text.empty() && !user.empty())
        fail(kExitUsage, "give either --theta or --user, not both");
    if (!theta_text.empty()) return parse_theta(theta_text);
    if (!user.empty()) return doc.strategy_for(user).theta;
    fail(kExitUsage, "a strategy is required: --theta p1,p2,... or --user ID");
}

// Primary display name of a state: its alphabetically first label, which
// is the state name for name-labelled spaces.
std::string state_name(const ummc::StateSpace& space, ummc::State s) {
    const auto& labels = space.labels_of(s);
    if (labels.empty()) fail(kExitModel, "state " + std::to_string(s) + " has no label");
    return *labels.begin();
}

std::map<ummc::State, std::string> state_names(const ummc::StateSpace& space) {
    std::map<ummc::State, std::string> names;
    for (ummc::State s = 1; s <= space.n_states(); ++s)
        names[s] = state_name(space, s);
    return names;
}

ummc::Umm build_umm_for(const std::string& model_path,
                        const std::string& theta_text, const std::string& user) {
    std::string text = read_file(model_path);
    if (document_kind(text) == "umm") {
        if (!theta_text.empty() || !user.empty())
            fail(kExitUsage, "--theta/--user are not applicable to a umm document");
        std::istringstream in(text);
        return ummc::load_umm_document(in);
    }
    std::istringstream in(text);
    ummc::ModelDocument doc = ummc::load_model_document(in);
    return ummc::build_umm(doc.mixture, resolve_theta(doc, theta_text, user));
}

// -------------------------------------------------------------------------

struct SimulateOpts {
    std::string model, theta, user, out;
    int traces = 1;
    int length = 10;
    std::uint64_t seed = 0;
};

int cmd_simulate(const SimulateOpts& opt) {
    ummc::ModelDocument doc = load_mixture(opt.model);
    std::vector<double> theta = resolve_theta(doc, opt.theta, opt.user);
    if (opt.traces < 0) fail(kExitUsage, "--traces must be non-negative");
    if (opt.length < 1) fail(kExitUsage, "--length must be at least 1");

    std::ofstream out = open_output(opt.out);
    out << "# user_id\tevent_name\n";
    std::mt19937_64 rng(opt.seed);
    for (int m = 1; m <= opt.traces; ++m) {
        char user_id[32];
        std::snprintf(user_id, sizeof(user_id), "u%04d", m);
        ummc::Trace trace =
            ummc::simulate(doc.mixture, theta, opt.length, rng, user_id);
        for (ummc::State s : trace.events)
            out << trace.user_id << "\t" << state_name(doc.mixture.space(), s)
                << "\n";
    }
    return kExitOk;
}

struct FitOpts {
    std::string traces, states, out, diagnostics;
    ummc::EmConfig config;
    bool skip_unmapped = false;
};

int cmd_fit(const FitOpts& opt) {
    std::vector<std::string> names;
    std::istringstream states(opt.states);
    std::string name;
    while (std::getline(states, name, ','))
        if (!name.empty()) names.push_back(name);
    if (names.empty())
        fail(kExitUsage, "--states needs a comma-separated list of event names");

    ummc::StateSpace space = ummc::StateSpace::with_state_names(names, false);
    std::map<std::string, ummc::State> mapping;
    for (std::size_t i = 0; i < names.size(); ++i)
        mapping[names[i]] = static_cast<ummc::State>(i) + 1;

    std::ifstream in(opt.traces);
    if (!in) fail(kExitIo, "cannot open '" + opt.traces + "'");
    ummc::IngestOptions ingest_options;
    ingest_options.unmapped = opt.skip_unmapped ? ummc::UnmappedPolicy::Skip
                                                : ummc::UnmappedPolicy::Strict;
    std::vector<ummc::Trace> traces =
        ummc::ingest_traces(in, mapping, ingest_options);

    ummc::FitResult fit = ummc::em_fit(space, traces, opt.config);

    std::ofstream out = open_output(opt.out);
    ummc::save_model_document(out, ummc::document_from_fit(fit));
    if (!opt.diagnostics.empty()) {
        std::ofstream diag = open_output(opt.diagnostics);
        ummc::write_diagnostics(diag, fit);
    }
    std::cerr << "fitted K=" << opt.config.K << " on " << traces.size()
              << " users; loglik " << fit.loglik << " (restart "
              << fit.chosen_restart << ")\n";
    return kExitOk;
}

struct BuildOpts {
    std::string model, theta, user, out;
};

int cmd_build_umm(const BuildOpts& opt) {
    ummc::Umm umm = build_umm_for(opt.model, opt.theta, opt.user);
    std::ofstream out = open_output(opt.out);
    ummc::save_umm_document(out, umm);
    return kExitOk;
}

struct CheckOpts {
    std::string model, theta, user, question, formula;
    int i = 1;
    long long N = 0;
    std::string N2;
};

ummc::Horizon parse_horizon(const std::string& text) {
    if (text.empty() || text == "inf") return std::nullopt;
    try {
        return std::stoll(text);
    } catch (const std::exception&) {
        fail(kExitUsage, "malformed step bound '" + text + "'");
    }
}

int cmd_check(const CheckOpts& opt) {
    if (opt.question.empty() == opt.formula.empty())
        fail(kExitUsage, "give exactly one of --question or --formula");
    ummc::Umm umm = build_umm_for(opt.model, opt.theta, opt.user);

    if (!opt.question.empty()) {
        double p;
        if (opt.question == "q1")
            p = ummc::q1(umm, opt.i, opt.N);
        else if (opt.question == "q2")
            p = ummc::q2(umm, opt.i, opt.N);
        else if (opt.question == "q3")
            p = ummc::q3(umm, opt.i, opt.N);
        else if (opt.question == "q4")
            p = ummc::q4(umm, opt.i, opt.N, parse_horizon(opt.N2));
        else
            fail(kExitUsage, "unknown question '" + opt.question + "'");
        std::cout << ummc::format_probability(p) << "\n";
        return kExitOk;
    }

    ummc::Query query = ummc::parse_query(opt.formula);
    auto result = ummc::evaluate_query(umm.dtmc(), query);
    if (std::holds_alternative<double>(result))
        std::cout << ummc::format_probability(std::get<double>(result)) << "\n";
    else
        std::cout << (std::get<bool>(result) ? "true" : "false") << "\n";
    return kExitOk;
}

struct SweepOpts {
    std::string model, spec, theta, user, out;
};

int cmd_sweep(const SweepOpts& opt) {
    std::istringstream spec_in(read_file(opt.spec));
    ummc::SweepSpec spec = ummc::parse_sweep_spec(spec_in);

    // CLI flags override the strategy named in the spec file.
    std::string theta_text = opt.theta;
    std::string user = opt.user;
    if (theta_text.empty() && user.empty()) {
        user = spec.user;
        if (!spec.theta.empty()) {
            std::ostringstream join;
            for (std::size_t i = 0; i < spec.theta.size(); ++i) {
                if (i > 0) join << ",";
                join << ummc::format_probability(spec.theta[i]);
            }
            theta_text = join.str();
            user.clear();
        }
    }

    ummc::Umm umm = build_umm_for(opt.model, theta_text, user);
    ummc::SweepTable table = ummc::sweep(umm, spec);

    std::ofstream out = open_output(opt.out);
    ummc::write_sweep_table(out, table);

    bool any_ok = false;
    for (const auto& row : table.rows) any_ok = any_ok || row.ok;
    if (!any_ok && !table.rows.empty()) {
        std::cerr << "all sweep cells failed; first error: "
                  << table.rows.front().error << "\n";
        return kExitModel;
    }
    return kExitOk;
}

struct ExportOpts {
    std::string model, theta, user, out, labels_out, props_out, question;
    int i = 1;
    long long N = 0;
    std::string N2;
};

int cmd_export_prism(const ExportOpts& opt) {
    ummc::ModelDocument doc = load_mixture(opt.model);
    std::vector<double> theta = resolve_theta(doc, opt.theta, opt.user);
    ummc::PrismDocument prism =
        ummc::export_prism(doc.mixture, theta, state_names(doc.mixture.space()));

    std::ofstream out = open_output(opt.out);
    out << prism.full_text();
    if (!opt.labels_out.empty()) {
        std::ofstream labels = open_output(opt.labels_out);
        labels << prism.label_text;
    }

    if (!opt.question.empty()) {
        ummc::QuestionId id;
        if (opt.question == "q1") id = ummc::QuestionId::Q1;
        else if (opt.question == "q2") id = ummc::QuestionId::Q2;
        else if (opt.question == "q3") id = ummc::QuestionId::Q3;
        else if (opt.question == "q4") id = ummc::QuestionId::Q4;
        else fail(kExitUsage, "unknown question '" + opt.question + "'");

        ummc::QuestionParams params{opt.i, opt.N, parse_horizon(opt.N2)};
        ummc::Umm umm = ummc::build_umm(doc.mixture, theta);
        std::string props =
            ummc::export_properties(id, params, ummc::entry_labels(umm));
        if (opt.props_out.empty())
            fail(kExitUsage, "--props-out is required with --question");
        std::ofstream props_file = open_output(opt.props_out);
        props_file << props << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"activity-pattern mixtures and user-metamodel queries"};
    app.require_subcommand(1);

    SimulateOpts sim;
    auto* c_sim = app.add_subcommand("simulate", "draw traces from a model");
    c_sim->add_option("--model", sim.model, "model document")->required();
    c_sim->add_option("--theta", sim.theta, "strategy, e.g. 0.7,0.3");
    c_sim->add_option("--user", sim.user, "user id from the document");
    c_sim->add_option("--traces", sim.traces, "number of traces")->required();
    c_sim->add_option("--length", sim.length, "events per trace")->required();
    c_sim->add_option("--seed", sim.seed, "RNG seed");
    c_sim->add_option("--out", sim.out, "trace file to write")->required();

    FitOpts fit;
    auto* c_fit = app.add_subcommand("fit", "fit patterns and strategies by EM");
    c_fit->add_option("--traces", fit.traces, "trace log file")->required();
    c_fit->add_option("--states", fit.states, "comma-separated event names")
        ->required();
    c_fit->add_option("--k", fit.config.K, "number of patterns")->required();
    c_fit->add_option("--restarts", fit.config.restarts, "EM restarts");
    c_fit->add_option("--max-iters", fit.config.max_iters, "iteration cap");
    c_fit->add_option("--tol", fit.config.tol, "convergence threshold");
    c_fit->add_option("--seed", fit.config.seed, "RNG seed");
    c_fit->add_option("--smoothing", fit.config.smoothing, "pseudo-count");
    c_fit->add_flag("--skip-unmapped", fit.skip_unmapped,
                    "drop events missing from --states");
    c_fit->add_option("--out", fit.out, "model document to write")->required();
    c_fit->add_option("--diagnostics", fit.diagnostics,
                      "per-restart loglik trajectory TSV");

    BuildOpts build;
    auto* c_build = app.add_subcommand("build-umm", "build a user metamodel");
    c_build->add_option("--model", build.model, "model document")->required();
    c_build->add_option("--theta", build.theta, "strategy");
    c_build->add_option("--user", build.user, "user id");
    c_build->add_option("--out", build.out, "umm document to write")->required();

    CheckOpts check;
    auto* c_check = app.add_subcommand("check", "evaluate a query");
    c_check->add_option("--model", check.model, "model or umm document")
        ->required();
    c_check->add_option("--theta", check.theta, "strategy");
    c_check->add_option("--user", check.user, "user id");
    c_check->add_option("--question", check.question, "q1|q2|q3|q4");
    c_check->add_option("--i", check.i, "pattern index");
    c_check->add_option("--N", check.N, "step bound");
    c_check->add_option("--N2", check.N2, "second step bound or 'inf'");
    c_check->add_option("--formula", check.formula, "property text");

    SweepOpts sweep;
    auto* c_sweep = app.add_subcommand("sweep", "evaluate a parameter grid");
    c_sweep->add_option("--model", sweep.model, "model or umm document")
        ->required();
    c_sweep->add_option("--spec", sweep.spec, "sweep spec JSON")->required();
    c_sweep->add_option("--theta", sweep.theta, "strategy override");
    c_sweep->add_option("--user", sweep.user, "user id override");
    c_sweep->add_option("--out", sweep.out, "table file to write")->required();

    ExportOpts exp;
    auto* c_exp = app.add_subcommand("export-prism", "emit PRISM model text");
    c_exp->add_option("--model", exp.model, "model document")->required();
    c_exp->add_option("--theta", exp.theta, "strategy");
    c_exp->add_option("--user", exp.user, "user id");
    c_exp->add_option("--out", exp.out, "PRISM model file")->required();
    c_exp->add_option("--labels-out", exp.labels_out, "separate label file");
    c_exp->add_option("--question", exp.question, "also emit a property file");
    c_exp->add_option("--i", exp.i, "pattern index");
    c_exp->add_option("--N", exp.N, "step bound");
    c_exp->add_option("--N2", exp.N2, "second step bound or 'inf'");
    c_exp->add_option("--props-out", exp.props_out, "property file to write");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (c_sim->parsed()) return cmd_simulate(sim);
        if (c_fit->parsed()) return cmd_fit(fit);
        if (c_build->parsed()) return cmd_build_umm(build);
        if (c_check->parsed()) return cmd_check(check);
        if (c_sweep->parsed()) return cmd_sweep(sweep);
        if (c_exp->parsed()) return cmd_export_prism(exp);
        std::cerr << "no subcommand\n";
        return kExitUsage;
    } catch (const CliError& e) {
        std::cerr << "error: " << e.message << "\n";
        return e.code;
    } catch (const ummc::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const ummc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitModel;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitModel;
    }
}
