/*
 * Formula evaluation over DTMCs: satisfaction sets, path-formula
 * probabilities by backward recursion / value iteration, filtered
 * probabilities, and a brute-force path-enumeration oracle for testing.
 */
#ifndef UMMC_CHECKER_HPP
#define UMMC_CHECKER_HPP

#include <variant>
#include <vector>

#include "ummc/formula.hpp"
#include "ummc/model.hpp"

namespace ummc {

// Satisfaction of a state formula at every state. Indexed by state id;
// entries for invalid indices are false. Unknown atomic propositions
// raise an error naming the proposition.
std::vector<bool> sat(const Dtmc& d, const StateFormula& phi);

// Pr_s(psi) for every state s. Bounded untils use the N-step backward
// recursion; unbounded untils use value iteration (max-norm threshold
// 1e-12, iteration cap 1e6). On restricted models the dropped row mass
// contributes 0.
std::vector<double> prob_vector(const Dtmc& d, const PathFormula& psi);

double prob_path(const Dtmc& d, State s, const PathFormula& psi);

// Pr at the dummy initial state; requires the model to have one.
double prob_from_init(const Dtmc& d, const PathFormula& psi);

// Applies `op` to { Pr_s(psi) | s satisfies phi }. phi must be
// propositional and satisfied by at least one state.
double filtered_prob(const Dtmc& d, FilterOp op, const StateFormula& phi,
                     const PathFormula& psi);

// Exact-by-expansion probability of a bounded path formula: sums the
// probabilities of all horizon-length prefixes that satisfy psi.
// Guarded: |S|^horizon must not exceed 10^7.
double enumerate_oracle(const Dtmc& d, State s, const PathFormula& psi);

// Top-level query evaluation as used by the CLI: quantitative queries
// evaluate from the dummy init state (or through the filter); bound
// queries return the truth value at the dummy init state.
std::variant<double, bool> evaluate_query(const Dtmc& d, const Query& q);

bool compare(CmpOp op, double value, double bound);

}  // namespace ummc

#endif
