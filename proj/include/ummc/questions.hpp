/*
 * The composed product-of-filtered-probabilities queries over a user
 * metamodel: feed-within-N (q1), repeat-feeding (q2), fill-then-empty
 * the basket (q3), and switch-pattern-then-feed (q4), plus a generic
 * product-composition facility and parameter sweeps.
 */
#ifndef UMMC_QUESTIONS_HPP
#define UMMC_QUESTIONS_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ummc/formula.hpp"
#include "ummc/umm.hpp"

namespace ummc {

// One factor of a product query: a path formula evaluated either from
// the dummy init state of the full metamodel or through a min/max/avg
// filter, optionally on the sub-model restricted to `restrict_phi`.
// `power` repeats the factor (computed by repeated multiplication).
struct QueryTerm {
    StateFormulaPtr restrict_phi;  // null for the full model
    std::optional<std::pair<FilterOp, StateFormulaPtr>> start;  // nullopt: init
    PathFormulaPtr path;
    int power = 1;
};

struct ComposedQuery {
    std::vector<QueryTerm> terms;
};

// Product of the term probabilities, evaluated left to right.
// Errors in a term are reported with its index.
double compose(const Umm& umm, const ComposedQuery& query);

// p1(i): probability of feeding for the first time within N taps in
// pattern i, from init.
double q1(const Umm& umm, int i, long long N);

// p2(i): reach (alpha=i, feed) within N taps, then feed four more times
// in pattern i without picking.
double q2(const Umm& umm, int i, long long N);

// p3(i): pick five times without feeding, then feed five times without
// picking, all in pattern i; first pick reached within N taps.
double q3(const Umm& umm, int i, long long N);

// p4(i): avoid pattern i and feeding for up to N taps, enter pattern i
// at some event label, then feed within N2 taps (N2 absent: unbounded).
// Sums over the entry labels; a sum above 1 is reported as a warning.
double q4(const Umm& umm, int i, long long N, Horizon N2);

ComposedQuery q1_composed(int i, long long N);
ComposedQuery q2_composed(int i, long long N);
ComposedQuery q3_composed(int i, long long N);
// One product per entry label; q4 equals the sum of the compositions.
std::vector<ComposedQuery> q4_composed(const Umm& umm, int i, long long N,
                                       Horizon N2);

// Entry labels of the metamodel's base space (state-name propositions
// in state order, deduplicated, alpha=* excluded).
std::vector<std::string> entry_labels(const Umm& umm);

// ---------------------------------------------------------------------------
// Parameter sweeps
// ---------------------------------------------------------------------------

using SweepValue = std::optional<long long>;  // nullopt renders as "inf"

struct SweepParam {
    std::string name;
    std::vector<SweepValue> values;
};

// Textual term template for "composed" sweeps; parameter names are
// substituted before parsing with the formula grammar.
struct ComposedTermSpec {
    std::string restrict_phi;  // empty: full model
    std::string filter_op;     // empty: start from init
    std::string filter_phi;
    std::string path;
    int power = 1;
};

struct SweepSpec {
    std::string question;  // q1 | q2 | q3 | q4 | composed
    std::vector<SweepParam> params;
    std::vector<double> theta;  // empty when `user` is used
    std::string user;
    std::vector<ComposedTermSpec> terms;
};

SweepSpec parse_sweep_spec(std::istream& in);

struct SweepRow {
    std::vector<SweepValue> values;
    bool ok = false;
    double probability = 0.0;
    std::string error;
};

struct SweepTable {
    std::vector<std::string> columns;  // parameter names + "probability"
    std::vector<SweepRow> rows;
};

// Evaluates the spec over the cartesian parameter grid in declaration
// order (first parameter outermost). Per-cell failures are recorded in
// the row; grid-level problems throw.
SweepTable sweep(const Umm& umm, const SweepSpec& spec);

void write_sweep_table(std::ostream& out, const SweepTable& table);

}  // namespace ummc

#endif
