/*
 * PCTL-style formula ASTs and the text grammar used by the CLI and
 * property files:
 *
 *   P=? [ (!"feed") U<=5 ((alpha=1) & "feed") ]
 *   filter(min, P=? [ X ((!"pick" & !"feed") U "feed") ], "feed")
 *   P>=0.5 [ F<=3 "pick" ]
 *
 * Atoms are quoted proposition names; alpha=k abbreviates the pattern
 * proposition "alpha=k". `F phi` is stored as `true U phi`. `|` and
 * `false` are desugared. The next operator also accepts a path-formula
 * argument (X (phi U psi)), which the composed product queries need.
 */
#ifndef UMMC_FORMULA_HPP
#define UMMC_FORMULA_HPP

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>

namespace ummc {

class StateFormula;
class PathFormula;
using StateFormulaPtr = std::shared_ptr<const StateFormula>;
using PathFormulaPtr = std::shared_ptr<const PathFormula>;

enum class CmpOp { Le, Lt, Ge, Gt };
enum class FilterOp { Min, Max, Avg };

// Step bound of an until; nullopt means unbounded.
using Horizon = std::optional<long long>;

struct TrueNode {};
struct AtomicNode {
    std::string name;
};
struct NotNode {
    StateFormulaPtr arg;
};
struct AndNode {
    StateFormulaPtr lhs, rhs;
};
struct ProbNode {
    CmpOp op;
    double bound;
    PathFormulaPtr path;
};

class StateFormula {
public:
    using Node = std::variant<TrueNode, AtomicNode, NotNode, AndNode, ProbNode>;
    explicit StateFormula(Node node) : node_(std::move(node)) {}
    const Node& node() const { return node_; }
    // True when the formula is from the propositional fragment
    // (no probability operator anywhere).
    bool is_propositional() const;

private:
    Node node_;
};

struct NextNode {
    StateFormulaPtr arg;
};
struct NextPathNode {
    PathFormulaPtr arg;
};
struct UntilNode {
    StateFormulaPtr lhs, rhs;
    Horizon bound;
};

class PathFormula {
public:
    using Node = std::variant<NextNode, NextPathNode, UntilNode>;
    explicit PathFormula(Node node) : node_(std::move(node)) {}
    const Node& node() const { return node_; }
    // Number of transitions needed to decide the formula; nullopt when
    // it contains an unbounded until.
    Horizon horizon() const;

private:
    Node node_;
};

namespace f {

StateFormulaPtr ftrue();
StateFormulaPtr ffalse();  // !true
StateFormulaPtr atom(std::string name);
StateFormulaPtr alpha(int k);  // atom "alpha=<k>"
StateFormulaPtr not_(StateFormulaPtr arg);
StateFormulaPtr and_(StateFormulaPtr lhs, StateFormulaPtr rhs);
StateFormulaPtr or_(StateFormulaPtr lhs, StateFormulaPtr rhs);
StateFormulaPtr prob(CmpOp op, double bound, PathFormulaPtr path);

PathFormulaPtr next(StateFormulaPtr arg);
PathFormulaPtr next(PathFormulaPtr arg);
PathFormulaPtr until(StateFormulaPtr lhs, StateFormulaPtr rhs,
                     Horizon bound = std::nullopt);
PathFormulaPtr eventually(StateFormulaPtr arg, Horizon bound = std::nullopt);

}  // namespace f

std::string to_string(const StateFormula& phi);
std::string to_string(const PathFormula& psi);

// A top-level query as written in property files: a probability query,
// optionally wrapped in a filter, or a probability-bound check.
struct Query {
    std::optional<FilterOp> filter_op;
    StateFormulaPtr filter_states;  // only set together with filter_op
    std::optional<std::pair<CmpOp, double>> bound;  // nullopt for P=?
    PathFormulaPtr path;
};

// Throw ParseError (with character position) on malformed input.
Query parse_query(const std::string& text);
StateFormulaPtr parse_state_formula(const std::string& text);

std::string to_string(const Query& q);
std::string to_string(FilterOp op);
std::string to_string(CmpOp op);

}  // namespace ummc

#endif
