#include "ummc/questions.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "ummc/checker.hpp"
#include "ummc/errors.hpp"
#include "ummc/numeric.hpp"

namespace ummc {

namespace {

void check_pattern_index(const Umm& umm, int i) {
    if (i < 1 || i > umm.K())
        throw Error("pattern index " + std::to_string(i) + " out of range 1.." +
                    std::to_string(umm.K()));
}

double evaluate_term(const Umm& umm, const QueryTerm& term) {
    if (term.power < 1) throw Error("term power must be at least 1");
    const Dtmc* model = &umm.dtmc();
    Dtmc restricted;
    if (term.restrict_phi) {
        restricted = restrict_states(umm.dtmc(), *term.restrict_phi);
        model = &restricted;
    }
    if (term.start)
        return filtered_prob(*model, term.start->first, *term.start->second,
                             *term.path);
    return prob_from_init(*model, *term.path);
}

}  // namespace

double compose(const Umm& umm, const ComposedQuery& query) {
    if (query.terms.empty()) throw Error("composed query has no terms");
    double result = 1.0;
    for (std::size_t t = 0; t < query.terms.size(); ++t) {
        double p;
        try {
            p = evaluate_term(umm, query.terms[t]);
        } catch (const Error& e) {
            throw Error("term " + std::to_string(t + 1) + ": " + e.what());
        }
        for (int j = 0; j < query.terms[t].power; ++j) result *= p;
    }
    return result;
}

double q1(const Umm& umm, int i, long long N) {
    check_pattern_index(umm, i);
    auto feed = f::atom("feed");
    return prob_from_init(
        umm.dtmc(), *f::until(f::not_(feed), f::and_(f::alpha(i), feed), N));
}

double q2(const Umm& umm, int i, long long N) {
    check_pattern_index(umm, i);
    auto feed = f::atom("feed");
    auto pick = f::atom("pick");

    double reach = prob_from_init(
        umm.dtmc(), *f::eventually(f::and_(f::alpha(i), feed), N));

    Dtmc restricted = restrict_states(umm.dtmc(), *f::alpha(i));
    double repeat_feed = filtered_prob(
        restricted, FilterOp::Min, *feed,
        *f::next(f::until(f::and_(f::not_(pick), f::not_(feed)), feed)));

    double result = reach;
    for (int j = 0; j < 4; ++j) result *= repeat_feed;
    return result;
}

double q3(const Umm& umm, int i, long long N) {
    check_pattern_index(umm, i);
    auto feed = f::atom("feed");
    auto pick = f::atom("pick");

    double reach_pick = prob_from_init(
        umm.dtmc(), *f::until(f::not_(pick), f::and_(f::alpha(i), pick), N));

    Dtmc restricted = restrict_states(umm.dtmc(), *f::alpha(i));
    double repeat_pick = filtered_prob(
        restricted, FilterOp::Min, *pick,
        *f::next(f::until(f::and_(f::not_(feed), f::not_(pick)), pick)));
    double pick_to_feed = filtered_prob(restricted, FilterOp::Min, *pick,
                                        *f::until(f::not_(feed), feed));
    double repeat_feed = filtered_prob(
        restricted, FilterOp::Min, *feed,
        *f::next(f::until(f::and_(f::not_(pick), f::not_(feed)), feed)));

    double result = reach_pick;
    for (int j = 0; j < 4; ++j) result *= repeat_pick;
    result *= pick_to_feed;
    for (int j = 0; j < 4; ++j) result *= repeat_feed;
    return result;
}

std::vector<std::string> entry_labels(const Umm& umm) {
    std::vector<std::string> labels;
    const StateSpace& space = umm.dtmc().space();
    for (State s = 1; s <= umm.base_n(); ++s) {
        for (const auto& prop : space.labels_of(s)) {
            if (prop.rfind("alpha=", 0) == 0) continue;
            if (std::find(labels.begin(), labels.end(), prop) == labels.end())
                labels.push_back(prop);
        }
    }
    return labels;
}

double q4(const Umm& umm, int i, long long N, Horizon N2) {
    check_pattern_index(umm, i);
    auto feed = f::atom("feed");
    std::vector<std::string> labels = entry_labels(umm);

    Dtmc restricted = restrict_states(umm.dtmc(), *f::alpha(i));
    double sum = 0.0;
    for (const auto& label : labels) {
        auto entry = f::atom(label);
        double switch_term = prob_from_init(
            umm.dtmc(),
            *f::until(f::and_(f::not_(f::alpha(i)), f::not_(feed)),
                      f::and_(f::alpha(i), entry), N));
        double feed_term = filtered_prob(restricted, FilterOp::Min, *entry,
                                         *f::until(f::not_(feed), feed, N2));
        sum += switch_term * feed_term;
    }
    if (sum > static_cast<double>(labels.size()) + 1e-9)
        throw Error("switch-query addends exceed the term count");
    if (sum > 1.0)
        std::fprintf(stderr,
                     "warning: switch-query addends sum to %.6g (> 1); the "
                     "entry events may overlap\n",
                     sum);
    return sum;
}

ComposedQuery q1_composed(int i, long long N) {
    auto feed = f::atom("feed");
    ComposedQuery q;
    q.terms.push_back(QueryTerm{
        nullptr, std::nullopt,
        f::until(f::not_(feed), f::and_(f::alpha(i), feed), N), 1});
    return q;
}

ComposedQuery q2_composed(int i, long long N) {
    auto feed = f::atom("feed");
    auto pick = f::atom("pick");
    ComposedQuery q;
    q.terms.push_back(QueryTerm{
        nullptr, std::nullopt, f::eventually(f::and_(f::alpha(i), feed), N), 1});
    q.terms.push_back(QueryTerm{
        f::alpha(i), std::make_pair(FilterOp::Min, feed),
        f::next(f::until(f::and_(f::not_(pick), f::not_(feed)), feed)), 4});
    return q;
}

ComposedQuery q3_composed(int i, long long N) {
    auto feed = f::atom("feed");
    auto pick = f::atom("pick");
    ComposedQuery q;
    q.terms.push_back(QueryTerm{
        nullptr, std::nullopt,
        f::until(f::not_(pick), f::and_(f::alpha(i), pick), N), 1});
    q.terms.push_back(QueryTerm{
        f::alpha(i), std::make_pair(FilterOp::Min, pick),
        f::next(f::until(f::and_(f::not_(feed), f::not_(pick)), pick)), 4});
    q.terms.push_back(QueryTerm{f::alpha(i), std::make_pair(FilterOp::Min, pick),
                                f::until(f::not_(feed), feed), 1});
    q.terms.push_back(QueryTerm{
        f::alpha(i), std::make_pair(FilterOp::Min, feed),
        f::next(f::until(f::and_(f::not_(pick), f::not_(feed)), feed)), 4});
    return q;
}

std::vector<ComposedQuery> q4_composed(const Umm& umm, int i, long long N,
                                       Horizon N2) {
    auto feed = f::atom("feed");
    std::vector<ComposedQuery> out;
    for (const auto& label : entry_labels(umm)) {
        auto entry = f::atom(label);
        ComposedQuery q;
        q.terms.push_back(QueryTerm{
            nullptr, std::nullopt,
            f::until(f::and_(f::not_(f::alpha(i)), f::not_(feed)),
                     f::and_(f::alpha(i), entry), N),
            1});
        q.terms.push_back(QueryTerm{f::alpha(i),
                                    std::make_pair(FilterOp::Min, entry),
                                    f::until(f::not_(feed), feed, N2), 1});
        out.push_back(std::move(q));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Whole-word textual substitution of a parameter name by its value.
// An unbounded value may only appear as the bound of U<= / F<=, in
// which case the bound is removed.
std::string substitute_param(std::string text, const std::string& name,
                             SweepValue value) {
    if (!value) {
        for (const char* op : {"U", "F"}) {
            std::string bounded = std::string(op) + "<=" + name;
            std::size_t pos = 0;
            while ((pos = text.find(bounded, pos)) != std::string::npos) {
                bool left_ok = pos == 0 || !is_word_char(text[pos - 1]);
                std::size_t end = pos + bounded.size();
                bool right_ok = end >= text.size() || !is_word_char(text[end]);
                if (left_ok && right_ok)
                    text.replace(pos, bounded.size(), op);
                else
                    ++pos;
            }
        }
    }
    std::string replacement = value ? std::to_string(*value) : "";
    std::size_t pos = 0;
    while ((pos = text.find(name, pos)) != std::string::npos) {
        bool left_ok = pos == 0 || !is_word_char(text[pos - 1]);
        std::size_t end = pos + name.size();
        bool right_ok = end >= text.size() || !is_word_char(text[end]);
        if (left_ok && right_ok) {
            if (!value)
                throw Error("parameter '" + name +
                            "' is unbounded but used outside a step bound");
            text.replace(pos, name.size(), replacement);
            pos += replacement.size();
        } else {
            ++pos;
        }
    }
    return text;
}

long long require_finite(const std::string& name, SweepValue v) {
    if (!v) throw Error("parameter '" + name + "' cannot be unbounded here");
    return *v;
}

std::vector<SweepValue> parse_values(const json& j) {
    std::vector<SweepValue> out;
    if (j.is_object()) {
        long long from = j.at("from").get<long long>();
        long long to = j.at("to").get<long long>();
        long long step = j.value("step", 1LL);
        if (step < 1) throw ParseError("sweep range step must be positive");
        for (long long v = from; v <= to; v += step) out.emplace_back(v);
        return out;
    }
    if (!j.is_array()) throw ParseError("sweep values must be a list or a range");
    for (const auto& v : j) {
        if (v.is_null() || (v.is_string() && v.get<std::string>() == "inf"))
            out.emplace_back(std::nullopt);
        else
            out.emplace_back(v.get<long long>());
    }
    return out;
}

}  // namespace

SweepSpec parse_sweep_spec(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(std::string("sweep spec is not valid JSON: ") + e.what());
    }
    try {
        SweepSpec spec;
        spec.question = doc.at("question").get<std::string>();
        for (const auto& p : doc.at("params")) {
            SweepParam param;
            param.name = p.at("name").get<std::string>();
            param.values = parse_values(p.at("values"));
            if (param.values.empty())
                throw ParseError("parameter '" + param.name + "' has no values");
            spec.params.push_back(std::move(param));
        }
        if (spec.params.empty()) throw ParseError("sweep grid is empty");
        if (doc.contains("theta"))
            for (const auto& v : doc.at("theta"))
                spec.theta.push_back(v.get<double>());
        spec.user = doc.value("user", "");
        if (doc.contains("terms")) {
            for (const auto& t : doc.at("terms")) {
                ComposedTermSpec term;
                term.restrict_phi = t.value("restrict", "");
                term.filter_op = t.value("filter", "");
                term.filter_phi = t.value("states", "");
                term.path = t.at("path").get<std::string>();
                term.power = t.value("power", 1);
                spec.terms.push_back(std::move(term));
            }
        }
        if (spec.question == "composed" && spec.terms.empty())
            throw ParseError("composed sweep needs a 'terms' list");
        return spec;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed sweep spec: ") + e.what());
    }
}

namespace {

FilterOp filter_op_from_name(const std::string& name) {
    if (name == "min") return FilterOp::Min;
    if (name == "max") return FilterOp::Max;
    if (name == "avg") return FilterOp::Avg;
    throw Error("unknown filter operator '" + name + "'");
}

double evaluate_cell(const Umm& umm, const SweepSpec& spec,
                     const std::vector<SweepValue>& values) {
    auto binding = [&](const std::string& name) -> SweepValue {
        for (std::size_t p = 0; p < spec.params.size(); ++p)
            if (spec.params[p].name == name) return values[p];
        throw Error("sweep grid does not bind parameter '" + name + "'");
    };

    if (spec.question == "q1" || spec.question == "q2" || spec.question == "q3") {
        int i = static_cast<int>(require_finite("i", binding("i")));
        long long N = require_finite("N", binding("N"));
        if (spec.question == "q1") return q1(umm, i, N);
        if (spec.question == "q2") return q2(umm, i, N);
        return q3(umm, i, N);
    }
    if (spec.question == "q4") {
        int i = static_cast<int>(require_finite("i", binding("i")));
        long long N = require_finite("N", binding("N"));
        return q4(umm, i, N, binding("N2"));
    }
    if (spec.question == "composed") {
        ComposedQuery query;
        for (const auto& t : spec.terms) {
            QueryTerm term;
            auto substitute_all = [&](std::string text) {
                for (std::size_t p = 0; p < spec.params.size(); ++p)
                    text = substitute_param(std::move(text), spec.params[p].name,
                                            values[p]);
                return text;
            };
            if (!t.restrict_phi.empty())
                term.restrict_phi = parse_state_formula(substitute_all(t.restrict_phi));
            if (!t.filter_op.empty())
                term.start = std::make_pair(
                    filter_op_from_name(t.filter_op),
                    parse_state_formula(substitute_all(
                        t.filter_phi.empty() ? "true" : t.filter_phi)));
            Query parsed = parse_query("P=? [ " + substitute_all(t.path) + " ]");
            term.path = parsed.path;
            term.power = t.power;
            query.terms.push_back(std::move(term));
        }
        return compose(umm, query);
    }
    throw Error("unknown question '" + spec.question + "'");
}

}  // namespace

SweepTable sweep(const Umm& umm, const SweepSpec& spec) {
    if (spec.params.empty()) throw Error("sweep grid is empty");

    SweepTable table;
    for (const auto& p : spec.params) table.columns.push_back(p.name);
    table.columns.push_back("probability");

    std::vector<std::size_t> index(spec.params.size(), 0);
    while (true) {
        SweepRow row;
        for (std::size_t p = 0; p < spec.params.size(); ++p)
            row.values.push_back(spec.params[p].values[index[p]]);
        try {
            row.probability = evaluate_cell(umm, spec, row.values);
            row.ok = true;
        } catch (const Error& e) {
            row.ok = false;
            row.error = e.what();
        }
        table.rows.push_back(std::move(row));

        // Advance the grid, last parameter fastest.
        std::size_t p = spec.params.size();
        while (p > 0) {
            --p;
            if (++index[p] < spec.params[p].values.size()) break;
            index[p] = 0;
            if (p == 0) return table;
        }
    }
}

void write_sweep_table(std::ostream& out, const SweepTable& table) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c > 0) out << "\t";
        out << table.columns[c];
    }
    out << "\n";
    for (const auto& row : table.rows) {
        for (const auto& v : row.values) {
            if (v)
                out << *v << "\t";
            else
                out << "inf\t";
        }
        if (row.ok)
            out << format_table_value(row.probability);
        else
            out << "error:" << row.error;
        out << "\n";
    }
}

}  // namespace ummc
