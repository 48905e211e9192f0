/*
 * User metamodel: the DTMC over (state, pattern) pairs obtained by
 * composing the K activity patterns with one user strategy, plus state
 * restriction for filtered sub-model queries.
 */
#ifndef UMMC_UMM_HPP
#define UMMC_UMM_HPP

#include <utility>
#include <vector>

#include "ummc/formula.hpp"
#include "ummc/model.hpp"

namespace ummc {

// Product-space DTMC: flat state (k-1)*n + s represents (s,k); flat
// state 0 is the dummy init. State (s,k) is labelled L(s) plus
// "alpha=k"; the dummy carries only "init".
class Umm {
public:
    Umm() = default;
    Umm(Dtmc dtmc, int base_n, int K, std::vector<double> theta);

    const Dtmc& dtmc() const { return dtmc_; }
    int base_n() const { return base_n_; }
    int K() const { return K_; }
    const std::vector<double>& theta() const { return theta_; }

    State flat_index(State s, int k) const;
    // (s,k) for a flat index; (0,0) for the dummy.
    std::pair<State, int> state_of(State flat) const;

private:
    Dtmc dtmc_;
    int base_n_ = 0;
    int K_ = 0;
    std::vector<double> theta_;
};

// P_M((s,k),(s',k')) = theta(k') * P_{k'}(s,s'); dummy row encodes
// theta(k) * iota_init(s). Throws on theta/K mismatch or invalid theta.
Umm build_umm(const PatternMixture& mixture, const std::vector<double>& theta);

// Sub-model over the states satisfying `phi` (propositional fragment
// only), renumbered consecutively; transitions into removed states are
// dropped, leaving substochastic rows and the `restricted` flag set.
// If every state satisfies phi the model is returned unchanged.
// Throws when no state satisfies phi.
Dtmc restrict_states(const Dtmc& d, const StateFormula& phi);

inline Dtmc restrict_states(const Umm& m, const StateFormula& phi) {
    return restrict_states(m.dtmc(), phi);
}

}  // namespace ummc

#endif
