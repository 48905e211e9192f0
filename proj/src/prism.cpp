#include "ummc/prism.hpp"

#include <cstdlib>
#include <sstream>

#include "ummc/errors.hpp"
#include "ummc/numeric.hpp"

namespace ummc {

PrismDocument export_prism(const PatternMixture& mixture,
                           const std::vector<double>& theta,
                           const std::map<State, std::string>& names) {
    const int n = mixture.space().n_states();
    const int K = mixture.K();
    if (static_cast<int>(theta.size()) != K)
        throw Error("strategy length does not match K");
    validate_strategy(theta);
    for (State s = 1; s <= n; ++s)
        if (names.find(s) == names.end())
            throw Error("no label name for state " + std::to_string(s));

    std::ostringstream model;
    model << "dtmc\n\n";
    model << "formula alpha = k;\n\n";
    model << "module UserMetamodel_m\n";
    model << "  s:[0.." << n << "] init 0;\n";
    model << "  k:[0.." << K << "] init 0;\n\n";

    auto emit_command = [&](State s, auto&& prob_of) {
        model << "  [] (s=" << s << ") -> ";
        bool first = true;
        for (int kp = 1; kp <= K; ++kp) {
            for (State sp = 1; sp <= n; ++sp) {
                double p = prob_of(kp, sp);
                if (p == 0.0) continue;  // null updates are omitted
                if (!first) model << " + ";
                first = false;
                model << format_probability(p) << ":(s'=" << sp << ")&(k'=" << kp
                      << ")";
            }
        }
        model << ";\n";
    };

    emit_command(0, [&](int kp, State sp) {
        return theta[static_cast<std::size_t>(kp) - 1] *
               mixture.iota_init()[static_cast<std::size_t>(sp)];
    });
    for (State s = 1; s <= n; ++s)
        emit_command(s, [&](int kp, State sp) {
            return theta[static_cast<std::size_t>(kp) - 1] *
                   mixture.pattern(kp)[static_cast<std::size_t>(s)]
                                      [static_cast<std::size_t>(sp)];
        });
    model << "endmodule\n";

    std::ostringstream labels;
    labels << "\n";
    for (State s = 1; s <= n; ++s)
        labels << "label \"" << names.at(s) << "\" = s=" << s << ";\n";
    labels << "label \"init\" = s=0;\n";
    for (int k = 1; k <= K; ++k)
        labels << "label \"alpha" << k << "\" = k=" << k << ";\n";

    return PrismDocument{model.str(), labels.str(), ""};
}

namespace {

struct LineReader {
    std::istringstream in;
    std::size_t line_no = 0;
    std::string line;

    explicit LineReader(const std::string& text) : in(text) {}

    // Next non-empty line; false at end of text.
    bool next() {
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            std::size_t start = line.find_first_not_of(" \t");
            if (start == std::string::npos) continue;
            std::size_t end = line.find_last_not_of(" \t");
            line = line.substr(start, end - start + 1);
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("line " + std::to_string(line_no) + ": " + msg, line_no);
    }
};

int parse_var_bound(LineReader& r, char var) {
    // Expected shape: <var>:[0..N] init 0;
    std::string prefix = std::string(1, var) + ":[0..";
    if (r.line.rfind(prefix, 0) != 0)
        r.fail("expected declaration of variable '" + std::string(1, var) + "'");
    std::size_t end = r.line.find(']', prefix.size());
    if (end == std::string::npos) r.fail("missing ']' in variable declaration");
    std::string num = r.line.substr(prefix.size(), end - prefix.size());
    char* endp = nullptr;
    long value = std::strtol(num.c_str(), &endp, 10);
    if (endp == nullptr || *endp != '\0' || value < 1)
        r.fail("malformed bound '" + num + "'");
    if (r.line.find("init 0;", end) == std::string::npos)
        r.fail("variable must be initialised to 0");
    return static_cast<int>(value);
}

}  // namespace

ReparsedUmm reparse(const std::string& text) {
    LineReader r(text);
    if (!r.next()) throw ParseError("empty input", 0);
    if (r.line != "dtmc") r.fail("expected 'dtmc' header");

    // Skip formula definitions up to the module header.
    while (true) {
        if (!r.next()) r.fail("missing module block");
        if (r.line.rfind("formula ", 0) == 0) continue;
        break;
    }
    if (r.line.rfind("module ", 0) != 0) r.fail("expected 'module'");

    if (!r.next()) r.fail("missing variable declarations");
    int n = parse_var_bound(r, 's');
    if (!r.next()) r.fail("missing variable declarations");
    int K = parse_var_bound(r, 'k');

    const int total = n * K;
    std::vector<std::vector<double>> matrix(
        static_cast<std::size_t>(total) + 1,
        std::vector<double>(static_cast<std::size_t>(total) + 1, 0.0));
    std::vector<bool> seen(static_cast<std::size_t>(n) + 1, false);

    while (true) {
        if (!r.next()) r.fail("missing 'endmodule'");
        if (r.line == "endmodule") break;
        if (r.line.rfind("[]", 0) != 0) r.fail("expected a command or 'endmodule'");

        std::size_t pos = r.line.find("(s=");
        if (pos == std::string::npos) r.fail("missing source-state guard");
        char* endp = nullptr;
        long src = std::strtol(r.line.c_str() + pos + 3, &endp, 10);
        if (endp == nullptr || *endp != ')' || src < 0 || src > n)
            r.fail("malformed source-state guard");
        if (seen[static_cast<std::size_t>(src)]) r.fail("duplicate command for state");
        seen[static_cast<std::size_t>(src)] = true;

        std::size_t arrow = r.line.find("->");
        if (arrow == std::string::npos) r.fail("missing '->'");
        std::size_t semi = r.line.rfind(';');
        if (semi == std::string::npos) r.fail("missing ';'");
        std::string updates = r.line.substr(arrow + 2, semi - arrow - 2);

        std::size_t start = 0;
        while (start < updates.size()) {
            std::size_t plus = updates.find(" + ", start);
            std::string update = updates.substr(
                start, plus == std::string::npos ? std::string::npos : plus - start);
            start = plus == std::string::npos ? updates.size() : plus + 3;

            std::size_t colon = update.find(':');
            if (colon == std::string::npos) r.fail("update missing ':'");
            std::string prob_text = update.substr(0, colon);
            char* pend = nullptr;
            double p = std::strtod(prob_text.c_str(), &pend);
            while (pend != nullptr && *pend == ' ') ++pend;
            if (pend == nullptr || *pend != '\0' || pend == prob_text.c_str())
                r.fail("malformed probability '" + prob_text + "'");

            std::size_t sp_pos = update.find("(s'=", colon);
            std::size_t kp_pos = update.find("(k'=", colon);
            if (sp_pos == std::string::npos || kp_pos == std::string::npos)
                r.fail("update missing target assignment");
            long sp = std::strtol(update.c_str() + sp_pos + 4, &pend, 10);
            if (pend == nullptr || *pend != ')') r.fail("malformed s' target");
            long kp = std::strtol(update.c_str() + kp_pos + 4, &pend, 10);
            if (pend == nullptr || *pend != ')') r.fail("malformed k' target");
            if (sp < 1 || sp > n || kp < 1 || kp > K)
                r.fail("update target out of range");

            auto col = static_cast<std::size_t>((kp - 1) * n + sp);
            if (src == 0) {
                matrix[0][col] = p;
            } else {
                // The command for state s covers every (s,k) source row.
                for (int k = 1; k <= K; ++k) {
                    auto row = static_cast<std::size_t>((k - 1) * n + src);
                    matrix[row][col] = p;
                }
            }
        }
    }

    for (State s = 0; s <= n; ++s)
        if (!seen[static_cast<std::size_t>(s)])
            throw ParseError("no command for state " + std::to_string(s), 0);

    return ReparsedUmm{n, K, std::move(matrix)};
}

namespace {

std::string alpha_term(int i) { return "(alpha=" + std::to_string(i) + ")"; }

std::string bound_text(Horizon h) {
    return h ? "<=" + std::to_string(*h) : std::string();
}

// filter(min, P=?[ X ((alpha=i)&(!"a")&(!"b")) U ((alpha=i)&"goal") ], states)
std::string repeat_factor(int i, const std::string& avoid,
                          const std::string& goal) {
    std::string a = alpha_term(i);
    std::ostringstream out;
    out << "filter(min,P=?[X((" << a << "&(!\"" << avoid << "\")&(!\"" << goal
        << "\"))U(" << a << "&\"" << goal << "\"))],(" << a << "&\"" << goal
        << "\"))";
    return out.str();
}

}  // namespace

std::string export_properties(QuestionId question, const QuestionParams& params,
                              const std::vector<std::string>& entry_labels) {
    if (params.i < 1) throw Error("pattern index must be at least 1");
    const std::string a = alpha_term(params.i);
    const std::string N = std::to_string(params.N);
    std::ostringstream out;

    switch (question) {
        case QuestionId::Q1:
            out << "P=?[(!\"feed\") U<=" << N << " (" << a << "&\"feed\")]";
            return out.str();
        case QuestionId::Q2:
            out << "P=?[F<=" << N << "(" << a << "&\"feed\")]*pow("
                << repeat_factor(params.i, "pick", "feed") << ",4)";
            return out.str();
        case QuestionId::Q3:
            out << "P=?[(!\"pick\") U<=" << N << " (" << a << "&\"pick\")]*pow("
                << repeat_factor(params.i, "feed", "pick") << ",4)*"
                << "filter(min,P=?[(" << a << "&(!\"feed\")) U (" << a
                << "&\"feed\")],(" << a << "&\"pick\"))*pow("
                << repeat_factor(params.i, "pick", "feed") << ",4)";
            return out.str();
        case QuestionId::Q4: {
            if (entry_labels.empty())
                throw Error("q4 property export needs the entry labels");
            bool first = true;
            for (const auto& label : entry_labels) {
                if (!first) out << " + ";
                first = false;
                out << "P=?[((!" << a << ")&(!\"feed\")) U<=" << N << " (" << a
                    << "&\"" << label << "\")]*filter(min,P=?[(" << a
                    << "&(!\"feed\")) U" << bound_text(params.N2) << " (" << a
                    << "&\"feed\")],(" << a << "&\"" << label << "\"))";
            }
            return out.str();
        }
    }
    throw Error("unknown question id");
}

}  // namespace ummc
