#include "ummc/document.hpp"

#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ummc/errors.hpp"
#include "ummc/numeric.hpp"

namespace ummc {

namespace {

using nlohmann::json;

std::string escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

// Emits the probabilities of a state-indexed vector (entries 1..n).
void write_prob_array(std::ostream& out, const std::vector<double>& v, int n) {
    out << "[";
    for (int i = 1; i <= n; ++i) {
        if (i > 1) out << ", ";
        out << format_probability(v[static_cast<std::size_t>(i)]);
    }
    out << "]";
}

void write_matrix_row_major(std::ostream& out, const std::string& indent,
                            const std::vector<std::vector<double>>& mat,
                            int first, int last) {
    out << "[\n";
    for (int r = first; r <= last; ++r) {
        out << indent << "  ";
        out << "[";
        for (int c = first; c <= last; ++c) {
            if (c > first) out << ", ";
            out << format_probability(mat[static_cast<std::size_t>(r)]
                                         [static_cast<std::size_t>(c)]);
        }
        out << "]";
        if (r < last) out << ",";
        out << "\n";
    }
    out << indent << "]";
}

void write_labels(std::ostream& out, const StateSpace& space) {
    out << "[\n";
    for (State s = 1; s <= space.n_states(); ++s) {
        out << "    {\"state\": " << s << ", \"props\": [";
        bool first = true;
        for (const auto& p : space.labels_of(s)) {
            if (!first) out << ", ";
            first = false;
            out << '"' << escape(p) << '"';
        }
        out << "]}";
        if (s < space.n_states()) out << ",";
        out << "\n";
    }
    out << "  ]";
}

StateSpace labels_to_space(const json& labels, int n, bool has_dummy) {
    std::map<State, std::set<std::string>> map;
    for (const auto& entry : labels) {
        State s = entry.at("state").get<State>();
        std::set<std::string> props;
        for (const auto& p : entry.at("props")) props.insert(p.get<std::string>());
        map[s] = std::move(props);
    }
    return StateSpace(n, std::move(map), has_dummy);
}

json parse_stream(std::istream& in) {
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(std::string("document is not valid JSON: ") + e.what());
    }
}

void require_format(const json& doc, const char* kind) {
    if (doc.value("format", "") != "ummc-model")
        throw ParseError("not a ummc-model document");
    if (doc.value("kind", "") != kind)
        throw ParseError(std::string("expected a '") + kind + "' document, got '" +
                         doc.value("kind", "?") + "'");
}

}  // namespace

const UserStrategy& ModelDocument::strategy_for(const std::string& user_id) const {
    for (const auto& st : strategies)
        if (st.user_id == user_id) return st;
    throw Error("no strategy for user '" + user_id + "' in the document");
}

void save_model_document(std::ostream& out, const ModelDocument& doc) {
    const StateSpace& space = doc.mixture.space();
    const int n = space.n_states();
    const int K = doc.mixture.K();

    out << "{\n";
    out << "  \"format\": \"ummc-model\",\n";
    out << "  \"version\": 1,\n";
    out << "  \"kind\": \"mixture\",\n";
    out << "  \"n\": " << n << ",\n";
    out << "  \"K\": " << K << ",\n";
    out << "  \"labels\": ";
    write_labels(out, space);
    out << ",\n";
    out << "  \"iota_init\": ";
    write_prob_array(out, doc.mixture.iota_init(), n);
    out << ",\n";
    out << "  \"patterns\": [\n";
    for (int k = 1; k <= K; ++k) {
        out << "    ";
        write_matrix_row_major(out, "    ", doc.mixture.pattern(k), 1, n);
        if (k < K) out << ",";
        out << "\n";
    }
    out << "  ],\n";
    out << "  \"strategies\": [";
    for (std::size_t i = 0; i < doc.strategies.size(); ++i) {
        if (i > 0) out << ",";
        out << "\n    {\"user\": \"" << escape(doc.strategies[i].user_id)
            << "\", \"theta\": [";
        for (std::size_t k = 0; k < doc.strategies[i].theta.size(); ++k) {
            if (k > 0) out << ", ";
            out << format_probability(doc.strategies[i].theta[k]);
        }
        out << "]}";
    }
    if (!doc.strategies.empty()) out << "\n  ";
    out << "]";
    if (doc.fit) {
        out << ",\n  \"fit\": {\"loglik\": " << format_probability(doc.fit->loglik)
            << ", \"chosen_restart\": " << doc.fit->chosen_restart
            << ", \"iters_per_restart\": [";
        for (std::size_t i = 0; i < doc.fit->iters_per_restart.size(); ++i) {
            if (i > 0) out << ", ";
            out << doc.fit->iters_per_restart[i];
        }
        out << "]}";
    }
    if (!doc.notes.empty())
        out << ",\n  \"notes\": \"" << escape(doc.notes) << "\"";
    out << "\n}\n";
}

ModelDocument load_model_document(std::istream& in) {
    json doc = parse_stream(in);
    try {
        require_format(doc, "mixture");
        int n = doc.at("n").get<int>();
        int K = doc.at("K").get<int>();
        StateSpace space = labels_to_space(doc.at("labels"), n, false);

        std::vector<double> iota(static_cast<std::size_t>(n) + 1, 0.0);
        const auto& iota_json = doc.at("iota_init");
        if (static_cast<int>(iota_json.size()) != n)
            throw ParseError("iota_init length does not match n");
        for (int i = 0; i < n; ++i)
            iota[static_cast<std::size_t>(i) + 1] = iota_json[static_cast<std::size_t>(i)].get<double>();

        const auto& patterns_json = doc.at("patterns");
        if (static_cast<int>(patterns_json.size()) != K)
            throw ParseError("pattern count does not match K");
        std::vector<std::vector<std::vector<double>>> patterns;
        patterns.reserve(static_cast<std::size_t>(K));
        for (const auto& mat_json : patterns_json) {
            if (static_cast<int>(mat_json.size()) != n)
                throw ParseError("pattern matrix row count does not match n");
            std::vector<std::vector<double>> mat(
                static_cast<std::size_t>(n) + 1,
                std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0));
            for (int r = 0; r < n; ++r) {
                const auto& row = mat_json[static_cast<std::size_t>(r)];
                if (static_cast<int>(row.size()) != n)
                    throw ParseError("pattern matrix row length does not match n");
                for (int c = 0; c < n; ++c)
                    mat[static_cast<std::size_t>(r) + 1][static_cast<std::size_t>(c) + 1] =
                        row[static_cast<std::size_t>(c)].get<double>();
            }
            patterns.push_back(std::move(mat));
        }

        ModelDocument out{
            PatternMixture(std::move(space), std::move(patterns), std::move(iota)),
            {},
            std::nullopt,
            doc.value("notes", "")};

        if (doc.contains("strategies")) {
            for (const auto& st : doc.at("strategies")) {
                UserStrategy strategy;
                strategy.user_id = st.at("user").get<std::string>();
                for (const auto& v : st.at("theta"))
                    strategy.theta.push_back(v.get<double>());
                if (static_cast<int>(strategy.theta.size()) != K)
                    throw ParseError("strategy for user '" + strategy.user_id +
                                     "' has wrong length");
                out.strategies.push_back(std::move(strategy));
            }
        }
        if (doc.contains("fit")) {
            FitInfo info;
            info.loglik = doc.at("fit").at("loglik").get<double>();
            info.chosen_restart = doc.at("fit").at("chosen_restart").get<int>();
            for (const auto& v : doc.at("fit").at("iters_per_restart"))
                info.iters_per_restart.push_back(v.get<int>());
            out.fit = std::move(info);
        }
        return out;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed model document: ") + e.what());
    }
}

ModelDocument document_from_fit(const FitResult& fit, std::string notes) {
    FitInfo info{fit.loglik, fit.chosen_restart, fit.iters_per_restart};
    return ModelDocument{fit.mixture, fit.strategies, info, std::move(notes)};
}

void save_umm_document(std::ostream& out, const Umm& umm) {
    const int n = umm.base_n();
    const int K = umm.K();
    const int total = n * K;

    out << "{\n";
    out << "  \"format\": \"ummc-model\",\n";
    out << "  \"version\": 1,\n";
    out << "  \"kind\": \"umm\",\n";
    out << "  \"n\": " << n << ",\n";
    out << "  \"K\": " << K << ",\n";
    out << "  \"theta\": [";
    for (int k = 0; k < K; ++k) {
        if (k > 0) out << ", ";
        out << format_probability(umm.theta()[static_cast<std::size_t>(k)]);
    }
    out << "],\n";
    out << "  \"base_labels\": [\n";
    // Base-state labels reconstructed from the product space, without
    // the alpha propositions.
    for (State s = 1; s <= n; ++s) {
        std::set<std::string> props = umm.dtmc().space().labels_of(s);
        props.erase("alpha=1");
        out << "    {\"state\": " << s << ", \"props\": [";
        bool first = true;
        for (const auto& p : props) {
            if (!first) out << ", ";
            first = false;
            out << '"' << escape(p) << '"';
        }
        out << "]}";
        if (s < n) out << ",";
        out << "\n";
    }
    out << "  ],\n";
    out << "  \"back_map\": [";
    for (State flat = 0; flat <= total; ++flat) {
        if (flat > 0) out << ", ";
        auto [s, k] = umm.state_of(flat);
        out << "[" << s << ", " << k << "]";
    }
    out << "],\n";
    out << "  \"matrix\": ";
    write_matrix_row_major(out, "  ", umm.dtmc().trans(), 0, total);
    out << "\n}\n";
}

Umm load_umm_document(std::istream& in) {
    json doc = parse_stream(in);
    try {
        require_format(doc, "umm");
        int n = doc.at("n").get<int>();
        int K = doc.at("K").get<int>();
        std::vector<double> theta;
        for (const auto& v : doc.at("theta")) theta.push_back(v.get<double>());
        if (static_cast<int>(theta.size()) != K)
            throw ParseError("theta length does not match K");

        StateSpace base = labels_to_space(doc.at("base_labels"), n, false);
        std::map<State, std::set<std::string>> labels;
        for (int k = 1; k <= K; ++k)
            for (State s = 1; s <= n; ++s) {
                std::set<std::string> props = base.labels_of(s);
                props.insert("alpha=" + std::to_string(k));
                labels[(k - 1) * n + s] = std::move(props);
            }
        StateSpace space(n * K, std::move(labels), true);

        const int total = n * K;
        const auto& mat_json = doc.at("matrix");
        if (static_cast<int>(mat_json.size()) != total + 1)
            throw ParseError("matrix row count does not match n*K+1");
        std::vector<std::vector<double>> trans(
            static_cast<std::size_t>(total) + 1,
            std::vector<double>(static_cast<std::size_t>(total) + 1, 0.0));
        for (int r = 0; r <= total; ++r) {
            const auto& row = mat_json[static_cast<std::size_t>(r)];
            if (static_cast<int>(row.size()) != total + 1)
                throw ParseError("matrix row length does not match n*K+1");
            for (int c = 0; c <= total; ++c)
                trans[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] =
                    row[static_cast<std::size_t>(c)].get<double>();
        }

        std::vector<double> init(static_cast<std::size_t>(total) + 1, 0.0);
        init[0] = 1.0;
        return Umm(Dtmc(std::move(space), std::move(init), std::move(trans)),
                   n, K, std::move(theta));
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed umm document: ") + e.what());
    }
}

void write_diagnostics(std::ostream& out, const FitResult& fit) {
    out << "# restart\titer\tloglik\n";
    for (std::size_t r = 0; r < fit.trajectories.size(); ++r)
        for (std::size_t i = 0; i < fit.trajectories[r].size(); ++i)
            out << r << "\t" << (i + 1) << "\t"
                << format_probability(fit.trajectories[r][i]) << "\n";
}

}  // namespace ummc
