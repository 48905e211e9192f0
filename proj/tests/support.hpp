// Shared test helpers: random model/formula generators and independent
// oracles (direct linear solve for unbounded untils, finite-path
// satisfaction for Monte-Carlo estimates).
#ifndef UMMC_TESTS_SUPPORT_HPP
#define UMMC_TESTS_SUPPORT_HPP

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ummc/checker.hpp"
#include "ummc/formula.hpp"
#include "ummc/inference.hpp"
#include "ummc/model.hpp"

namespace ummc::testsupport {

inline std::vector<double> dirichlet_row(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> row(static_cast<std::size_t>(n) + 1, 0.0);
    double total = 0.0;
    for (int i = 1; i <= n; ++i) {
        row[static_cast<std::size_t>(i)] = -std::log(1.0 - unit(rng));
        total += row[static_cast<std::size_t>(i)];
    }
    for (int i = 1; i <= n; ++i) row[static_cast<std::size_t>(i)] /= total;
    return row;
}

inline const std::vector<std::string>& label_pool() {
    static const std::vector<std::string> pool = {"a", "b", "c"};
    return pool;
}

inline StateSpace random_space(int n, bool dummy, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> coin(0, 1);
    std::map<State, std::set<std::string>> labels;
    for (State s = 1; s <= n; ++s) {
        std::set<std::string> props;
        for (const auto& p : label_pool())
            if (coin(rng)) props.insert(p);
        labels[s] = std::move(props);
    }
    // Keep the full pool in the universe so random formulas can always
    // mention any pool proposition.
    return StateSpace(n, std::move(labels), dummy,
                      {label_pool().begin(), label_pool().end()});
}

inline Dtmc random_dtmc(int n, bool dummy, std::mt19937_64& rng) {
    StateSpace space = random_space(n, dummy, rng);
    const auto size = static_cast<std::size_t>(n) + 1;
    std::vector<std::vector<double>> trans(size, std::vector<double>(size, 0.0));
    std::vector<double> init(size, 0.0);
    if (dummy) {
        // The dummy row plays the role of the initial distribution.
        trans.assign(size, std::vector<double>(size, 0.0));
        std::vector<double> d0 = dirichlet_row(n, rng);
        for (int i = 1; i <= n; ++i) trans[0][static_cast<std::size_t>(i)] = d0[static_cast<std::size_t>(i)];
        init[0] = 1.0;
    } else {
        std::vector<double> d0 = dirichlet_row(n, rng);
        for (int i = 1; i <= n; ++i) init[static_cast<std::size_t>(i)] = d0[static_cast<std::size_t>(i)];
    }
    for (State s = 1; s <= n; ++s) {
        std::vector<double> row = dirichlet_row(n, rng);
        for (int t = 1; t <= n; ++t)
            trans[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)] =
                row[static_cast<std::size_t>(t)];
    }
    return Dtmc(std::move(space), std::move(init), std::move(trans));
}

inline PatternMixture random_mixture(int n, int K, std::mt19937_64& rng) {
    StateSpace space = random_space(n, false, rng);
    const auto size = static_cast<std::size_t>(n) + 1;
    std::vector<std::vector<std::vector<double>>> patterns;
    for (int k = 0; k < K; ++k) {
        std::vector<std::vector<double>> mat(size, std::vector<double>(size, 0.0));
        for (State s = 1; s <= n; ++s) {
            std::vector<double> row = dirichlet_row(n, rng);
            for (int t = 1; t <= n; ++t)
                mat[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)] =
                    row[static_cast<std::size_t>(t)];
        }
        patterns.push_back(std::move(mat));
    }
    std::vector<double> iota = dirichlet_row(n, rng);
    return PatternMixture(std::move(space), std::move(patterns), std::move(iota));
}

inline std::vector<double> random_theta(int K, std::mt19937_64& rng) {
    std::vector<double> row = dirichlet_row(K, rng);
    return std::vector<double>(row.begin() + 1, row.end());
}

inline StateFormulaPtr random_prop_formula(int depth, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick(0, depth > 0 ? 4 : 2);
    std::uniform_int_distribution<std::size_t> atom_pick(0, label_pool().size() - 1);
    switch (pick(rng)) {
        case 0: return f::ftrue();
        case 1:
        case 2: return f::atom(label_pool()[atom_pick(rng)]);
        case 3: return f::not_(random_prop_formula(depth - 1, rng));
        default:
            return f::and_(random_prop_formula(depth - 1, rng),
                           random_prop_formula(depth - 1, rng));
    }
}

inline PathFormulaPtr random_bounded_path(int max_n, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> kind(0, 3);
    std::uniform_int_distribution<long long> bound(0, max_n);
    switch (kind(rng)) {
        case 0: return f::next(random_prop_formula(2, rng));
        case 1:
            return f::until(random_prop_formula(2, rng),
                            random_prop_formula(2, rng), bound(rng));
        case 2: return f::eventually(random_prop_formula(2, rng), bound(rng));
        default:
            // X over an until, as the composed questions use.
            return f::next(f::until(random_prop_formula(2, rng),
                                    random_prop_formula(2, rng),
                                    std::max<long long>(0, bound(rng) - 1)));
    }
}

// ---------------------------------------------------------------------------
// Unbounded-until oracle: graph reachability plus a dense linear solve,
// a route independent of the checker's value iteration.
// ---------------------------------------------------------------------------

inline std::vector<double> until_solve(const Dtmc& d, const StateFormula& lhs,
                                       const StateFormula& rhs) {
    const StateSpace& sp = d.space();
    std::vector<bool> s1 = sat(d, lhs);
    std::vector<bool> s2 = sat(d, rhs);
    const int first = sp.first_state();
    const int last = sp.last_state();

    // States that can reach an rhs state through lhs states.
    std::vector<bool> can_reach(static_cast<std::size_t>(last) + 1, false);
    for (State s = first; s <= last; ++s)
        can_reach[static_cast<std::size_t>(s)] = s2[static_cast<std::size_t>(s)];
    bool changed = true;
    while (changed) {
        changed = false;
        for (State s = first; s <= last; ++s) {
            auto si = static_cast<std::size_t>(s);
            if (can_reach[si] || !s1[si]) continue;
            for (State t = first; t <= last; ++t)
                if (d.trans(s, t) > 0.0 && can_reach[static_cast<std::size_t>(t)]) {
                    can_reach[si] = true;
                    changed = true;
                    break;
                }
        }
    }

    std::vector<State> unknowns;
    for (State s = first; s <= last; ++s) {
        auto si = static_cast<std::size_t>(s);
        if (s1[si] && !s2[si] && can_reach[si]) unknowns.push_back(s);
    }

    const std::size_t m = unknowns.size();
    std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
    for (std::size_t r = 0; r < m; ++r) {
        State s = unknowns[r];
        for (std::size_t c = 0; c < m; ++c)
            a[r][c] = (r == c ? 1.0 : 0.0) - d.trans(s, unknowns[c]);
        double b = 0.0;
        for (State t = first; t <= last; ++t)
            if (s2[static_cast<std::size_t>(t)]) b += d.trans(s, t);
        a[r][m] = b;
    }

    // Gaussian elimination with partial pivoting.
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < m; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
        std::swap(a[col], a[pivot]);
        for (std::size_t r = 0; r < m; ++r) {
            if (r == col || a[r][col] == 0.0) continue;
            double factor = a[r][col] / a[col][col];
            for (std::size_t c = col; c <= m; ++c) a[r][c] -= factor * a[col][c];
        }
    }

    std::vector<double> out(static_cast<std::size_t>(last) + 1, 0.0);
    for (State s = first; s <= last; ++s)
        out[static_cast<std::size_t>(s)] = s2[static_cast<std::size_t>(s)] ? 1.0 : 0.0;
    for (std::size_t r = 0; r < m; ++r)
        out[static_cast<std::size_t>(unknowns[r])] = a[r][m] / a[r][r];
    return out;
}

// ---------------------------------------------------------------------------
// Finite-path satisfaction, independent of the checker internals.
// Satisfaction sets of the state subformulas are resolved once.
// ---------------------------------------------------------------------------

using SatCache = std::map<const StateFormula*, std::vector<bool>>;

inline void fill_sat_cache(const PathFormula& psi, const Dtmc& d, SatCache& cache) {
    struct Visitor {
        const Dtmc& d;
        SatCache& cache;
        void operator()(const NextNode& n) const {
            cache.emplace(n.arg.get(), sat(d, *n.arg));
        }
        void operator()(const NextPathNode& n) const {
            fill_sat_cache(*n.arg, d, cache);
        }
        void operator()(const UntilNode& n) const {
            cache.emplace(n.lhs.get(), sat(d, *n.lhs));
            cache.emplace(n.rhs.get(), sat(d, *n.rhs));
        }
    };
    std::visit(Visitor{d, cache}, psi.node());
}

inline bool path_satisfies(const PathFormula& psi, const std::vector<State>& path,
                           std::size_t offset, const SatCache& cache) {
    struct Visitor {
        const std::vector<State>& path;
        std::size_t offset;
        const SatCache& cache;

        bool operator()(const NextNode& n) const {
            if (offset + 1 >= path.size()) return false;
            return cache.at(n.arg.get())[static_cast<std::size_t>(path[offset + 1])];
        }
        bool operator()(const NextPathNode& n) const {
            if (offset + 1 >= path.size()) return false;
            return path_satisfies(*n.arg, path, offset + 1, cache);
        }
        bool operator()(const UntilNode& n) const {
            const auto& s1 = cache.at(n.lhs.get());
            const auto& s2 = cache.at(n.rhs.get());
            long long bound = n.bound ? *n.bound
                                      : static_cast<long long>(path.size());
            for (long long j = 0; j <= bound; ++j) {
                std::size_t at = offset + static_cast<std::size_t>(j);
                if (at >= path.size()) return false;
                if (s2[static_cast<std::size_t>(path[at])]) return true;
                if (!s1[static_cast<std::size_t>(path[at])]) return false;
            }
            return false;
        }
    };
    return std::visit(Visitor{path, offset, cache}, psi.node());
}

inline bool path_satisfies(const PathFormula& psi, const std::vector<State>& path,
                           std::size_t offset, const Dtmc& d) {
    SatCache cache;
    fill_sat_cache(psi, d, cache);
    return path_satisfies(psi, path, offset, cache);
}

// Monte-Carlo estimate of Pr_s(psi) using the generative simulator with
// a single pattern equal to the model's transition matrix.
inline double mc_estimate(const Dtmc& d, State s, const PathFormula& psi,
                          int samples, std::mt19937_64& rng) {
    Horizon h = psi.horizon();
    if (!h) throw Error("mc_estimate requires a bounded formula");
    const int n = d.space().n_states();
    const auto size = static_cast<std::size_t>(n) + 1;

    std::vector<double> iota(size, 0.0);
    iota[static_cast<std::size_t>(s)] = 1.0;
    std::vector<std::vector<double>> pattern(d.trans());
    if (d.space().has_dummy_init())
        throw Error("mc_estimate expects a model without a dummy state");
    StateSpace space = d.space();
    PatternMixture wrapper(space, {pattern}, iota);

    SatCache cache;
    fill_sat_cache(psi, d, cache);

    long long hits = 0;
    for (int i = 0; i < samples; ++i) {
        Trace trace = simulate(wrapper, {1.0}, static_cast<int>(*h) + 1, rng);
        if (path_satisfies(psi, trace.events, 0, cache)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(samples);
}

}  // namespace ummc::testsupport

#endif
