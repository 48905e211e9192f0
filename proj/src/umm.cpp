#include "ummc/umm.hpp"

#include <map>
#include <set>
#include <string>

#include "ummc/checker.hpp"
#include "ummc/errors.hpp"

namespace ummc {

Umm::Umm(Dtmc dtmc, int base_n, int K, std::vector<double> theta)
    : dtmc_(std::move(dtmc)), base_n_(base_n), K_(K), theta_(std::move(theta)) {
    if (dtmc_.space().n_states() != base_n_ * K_ || !dtmc_.space().has_dummy_init())
        throw Error("metamodel space does not match n*K plus dummy init");
}

State Umm::flat_index(State s, int k) const {
    if (s < 1 || s > base_n_ || k < 1 || k > K_)
        throw Error("flat_index: (" + std::to_string(s) + "," + std::to_string(k) +
                    ") out of range");
    return (k - 1) * base_n_ + s;
}

std::pair<State, int> Umm::state_of(State flat) const {
    if (flat == 0) return {0, 0};
    if (flat < 0 || flat > base_n_ * K_)
        throw Error("state_of: flat index out of range");
    return {(flat - 1) % base_n_ + 1, (flat - 1) / base_n_ + 1};
}

Umm build_umm(const PatternMixture& mixture, const std::vector<double>& theta) {
    const int K = mixture.K();
    if (static_cast<int>(theta.size()) != K)
        throw Error("strategy length " + std::to_string(theta.size()) +
                    " does not match K=" + std::to_string(K));
    validate_strategy(theta);

    const StateSpace& base = mixture.space();
    const int n = base.n_states();
    const int product_n = n * K;

    std::map<State, std::set<std::string>> labels;
    for (int k = 1; k <= K; ++k) {
        for (State s = 1; s <= n; ++s) {
            std::set<std::string> props = base.labels_of(s);
            props.insert("alpha=" + std::to_string(k));
            labels[(k - 1) * n + s] = std::move(props);
        }
    }
    StateSpace space(product_n, std::move(labels), /*has_dummy_init=*/true);

    const auto size = static_cast<std::size_t>(product_n) + 1;
    std::vector<std::vector<double>> trans(size, std::vector<double>(size, 0.0));
    for (int kp = 1; kp <= K; ++kp) {
        double w = theta[static_cast<std::size_t>(kp) - 1];
        for (State sp = 1; sp <= n; ++sp) {
            auto col = static_cast<std::size_t>((kp - 1) * n + sp);
            trans[0][col] = w * mixture.iota_init()[static_cast<std::size_t>(sp)];
            // Rows for (s,k) do not depend on the source pattern k.
            for (int k = 1; k <= K; ++k) {
                for (State s = 1; s <= n; ++s) {
                    auto row = static_cast<std::size_t>((k - 1) * n + s);
                    trans[row][col] =
                        w * mixture.pattern(kp)[static_cast<std::size_t>(s)]
                                               [static_cast<std::size_t>(sp)];
                }
            }
        }
    }

    std::vector<double> init(size, 0.0);
    init[0] = 1.0;

    return Umm(Dtmc(std::move(space), std::move(init), std::move(trans)),
               n, K, theta);
}

Dtmc restrict_states(const Dtmc& d, const StateFormula& phi) {
    if (!phi.is_propositional())
        throw Error("restriction requires a propositional formula");

    const StateSpace& sp = d.space();
    std::vector<bool> keep = sat(d, phi);

    int kept = 0;
    for (State s = sp.first_state(); s <= sp.last_state(); ++s)
        if (keep[static_cast<std::size_t>(s)]) ++kept;
    if (kept == 0) throw Error("restriction removes every state");
    int total = sp.last_state() - sp.first_state() + 1;
    if (kept == total) return d;

    // Renumber survivors in index order; the dummy keeps slot 0 if it
    // survives the restriction.
    bool dummy_kept = sp.has_dummy_init() && keep[0];
    std::vector<State> old_of_new;  // new action states 1..m
    std::map<State, std::set<std::string>> labels;
    for (State s = 1; s <= sp.last_state(); ++s) {
        if (!keep[static_cast<std::size_t>(s)]) continue;
        old_of_new.push_back(s);
        labels[static_cast<State>(old_of_new.size())] = sp.labels_of(s);
    }
    const int m = static_cast<int>(old_of_new.size());
    if (m == 0) throw Error("restriction keeps only the dummy init state");
    // D|phi restricts the states, not the proposition alphabet.
    StateSpace space(m, std::move(labels), dummy_kept, sp.propositions());

    auto new_index = [&](State old_state) -> State {
        for (State ns = 1; ns <= m; ++ns)
            if (old_of_new[static_cast<std::size_t>(ns) - 1] == old_state) return ns;
        return -1;
    };

    const auto size = static_cast<std::size_t>(m) + 1;
    std::vector<std::vector<double>> trans(size, std::vector<double>(size, 0.0));
    std::vector<double> init(size, 0.0);

    auto copy_row = [&](State old_from, std::size_t new_from) {
        for (State nt = 1; nt <= m; ++nt) {
            State old_to = old_of_new[static_cast<std::size_t>(nt) - 1];
            trans[new_from][static_cast<std::size_t>(nt)] = d.trans(old_from, old_to);
        }
    };
    if (dummy_kept) copy_row(0, 0);
    for (State ns = 1; ns <= m; ++ns)
        copy_row(old_of_new[static_cast<std::size_t>(ns) - 1],
                 static_cast<std::size_t>(ns));

    if (dummy_kept) {
        init[0] = d.init()[0];
    } else {
        for (State s = sp.first_state(); s <= sp.last_state(); ++s) {
            if (!keep[static_cast<std::size_t>(s)] || s == 0) continue;
            State ns = new_index(s);
            init[static_cast<std::size_t>(ns)] = d.init()[static_cast<std::size_t>(s)];
        }
    }

    return Dtmc(std::move(space), std::move(init), std::move(trans),
                /*restricted=*/true);
}

}  // namespace ummc
