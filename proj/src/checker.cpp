#include "ummc/checker.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ummc/errors.hpp"
#include "ummc/numeric.hpp"

namespace ummc {

namespace {

constexpr double kValueIterationEps = 1e-12;
constexpr long long kValueIterationCap = 1000000;
constexpr double kOracleGuard = 1e7;

std::vector<double> until_prob(const Dtmc& d, const StateFormula& lhs,
                               const StateFormula& rhs, Horizon bound);

// Pr_s(X psi) = sum_s' P(s,s') * inner(s'), for inner either an
// indicator vector (state argument) or a path-probability vector.
std::vector<double> one_step(const Dtmc& d, const std::vector<double>& inner) {
    const StateSpace& sp = d.space();
    std::vector<double> out(static_cast<std::size_t>(sp.index_size()), 0.0);
    for (State s = sp.first_state(); s <= sp.last_state(); ++s) {
        KahanSum acc;
        for (State t = sp.first_state(); t <= sp.last_state(); ++t) {
            double p = d.trans(s, t);
            if (p != 0.0) acc.add(p * inner[static_cast<std::size_t>(t)]);
        }
        out[static_cast<std::size_t>(s)] = acc.value();
    }
    return out;
}

std::vector<double> indicator(const StateSpace& sp, const std::vector<bool>& set) {
    std::vector<double> out(static_cast<std::size_t>(sp.index_size()), 0.0);
    for (State s = sp.first_state(); s <= sp.last_state(); ++s)
        out[static_cast<std::size_t>(s)] = set[static_cast<std::size_t>(s)] ? 1.0 : 0.0;
    return out;
}

std::vector<double> until_prob(const Dtmc& d, const StateFormula& lhs,
                               const StateFormula& rhs, Horizon bound) {
    const StateSpace& sp = d.space();
    std::vector<bool> sat1 = sat(d, lhs);
    std::vector<bool> sat2 = sat(d, rhs);

    std::vector<double> x = indicator(sp, sat2);
    std::vector<double> next(x.size(), 0.0);

    auto step = [&](const std::vector<double>& prev, std::vector<double>& out) {
        for (State s = sp.first_state(); s <= sp.last_state(); ++s) {
            auto si = static_cast<std::size_t>(s);
            if (sat2[si]) {
                out[si] = 1.0;
            } else if (sat1[si]) {
                KahanSum acc;
                for (State t = sp.first_state(); t <= sp.last_state(); ++t) {
                    double p = d.trans(s, t);
                    if (p != 0.0) acc.add(p * prev[static_cast<std::size_t>(t)]);
                }
                out[si] = acc.value();
            } else {
                out[si] = 0.0;
            }
        }
    };

    if (bound) {
        for (long long i = 0; i < *bound; ++i) {
            step(x, next);
            x.swap(next);
        }
        return x;
    }

    for (long long iter = 0; iter < kValueIterationCap; ++iter) {
        step(x, next);
        double diff = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            diff = std::max(diff, std::fabs(next[i] - x[i]));
        x.swap(next);
        if (diff < kValueIterationEps) break;
    }
    return x;
}

}  // namespace

std::vector<bool> sat(const Dtmc& d, const StateFormula& phi) {
    const StateSpace& sp = d.space();
    const auto size = static_cast<std::size_t>(sp.index_size());

    struct Visitor {
        const Dtmc& d;
        const StateSpace& sp;
        std::size_t size;

        std::vector<bool> operator()(const TrueNode&) const {
            std::vector<bool> out(size, false);
            for (State s = sp.first_state(); s <= sp.last_state(); ++s)
                out[static_cast<std::size_t>(s)] = true;
            return out;
        }
        std::vector<bool> operator()(const AtomicNode& n) const {
            if (!sp.has_proposition(n.name))
                throw Error("unknown atomic proposition '" + n.name + "'");
            std::vector<bool> out(size, false);
            for (State s = sp.first_state(); s <= sp.last_state(); ++s)
                out[static_cast<std::size_t>(s)] = sp.state_has_label(s, n.name);
            return out;
        }
        std::vector<bool> operator()(const NotNode& n) const {
            std::vector<bool> out = sat(d, *n.arg);
            for (State s = sp.first_state(); s <= sp.last_state(); ++s)
                out[static_cast<std::size_t>(s)] = !out[static_cast<std::size_t>(s)];
            return out;
        }
        std::vector<bool> operator()(const AndNode& n) const {
            std::vector<bool> lhs = sat(d, *n.lhs);
            std::vector<bool> rhs = sat(d, *n.rhs);
            for (std::size_t i = 0; i < lhs.size(); ++i)
                lhs[i] = lhs[i] && rhs[i];
            return lhs;
        }
        std::vector<bool> operator()(const ProbNode& n) const {
            std::vector<double> probs = prob_vector(d, *n.path);
            std::vector<bool> out(size, false);
            for (State s = sp.first_state(); s <= sp.last_state(); ++s)
                out[static_cast<std::size_t>(s)] =
                    compare(n.op, probs[static_cast<std::size_t>(s)], n.bound);
            return out;
        }
    };
    return std::visit(Visitor{d, sp, size}, phi.node());
}

std::vector<double> prob_vector(const Dtmc& d, const PathFormula& psi) {
    struct Visitor {
        const Dtmc& d;

        std::vector<double> operator()(const NextNode& n) const {
            return one_step(d, indicator(d.space(), sat(d, *n.arg)));
        }
        std::vector<double> operator()(const NextPathNode& n) const {
            return one_step(d, prob_vector(d, *n.arg));
        }
        std::vector<double> operator()(const UntilNode& n) const {
            return until_prob(d, *n.lhs, *n.rhs, n.bound);
        }
    };
    return std::visit(Visitor{d}, psi.node());
}

double prob_path(const Dtmc& d, State s, const PathFormula& psi) {
    if (!d.space().is_valid_state(s))
        throw Error("prob_path: invalid state " + std::to_string(s));
    return prob_vector(d, psi)[static_cast<std::size_t>(s)];
}

double prob_from_init(const Dtmc& d, const PathFormula& psi) {
    if (!d.space().has_dummy_init())
        throw Error("prob_from_init requires a model with a dummy init state");
    return prob_vector(d, psi)[0];
}

double filtered_prob(const Dtmc& d, FilterOp op, const StateFormula& phi,
                     const PathFormula& psi) {
    if (!phi.is_propositional())
        throw Error("filter states must be a propositional formula");
    std::vector<bool> states = sat(d, phi);
    std::vector<double> probs = prob_vector(d, psi);

    bool any = false;
    double mn = 0.0, mx = 0.0;
    KahanSum total;
    long long count = 0;
    const StateSpace& sp = d.space();
    for (State s = sp.first_state(); s <= sp.last_state(); ++s) {
        auto si = static_cast<std::size_t>(s);
        if (!states[si]) continue;
        double p = probs[si];
        if (!any) {
            mn = mx = p;
            any = true;
        } else {
            mn = std::min(mn, p);
            mx = std::max(mx, p);
        }
        total.add(p);
        ++count;
    }
    if (!any) throw Error("filter matches no state");
    switch (op) {
        case FilterOp::Min: return mn;
        case FilterOp::Max: return mx;
        case FilterOp::Avg: return total.value() / static_cast<double>(count);
    }
    throw Error("unknown filter operator");
}

namespace {

using SatCache = std::map<const StateFormula*, std::vector<bool>>;

// Finite-prefix satisfaction for the enumeration oracle. `path` holds
// states; `offset` is the position the formula is anchored at.
bool prefix_satisfies(const PathFormula& psi,
                      const std::vector<State>& path, std::size_t offset,
                      const Dtmc& d, SatCache& sat_cache);

const std::vector<bool>& cached_sat(const StateFormula& phi, const Dtmc& d,
                                    SatCache& cache) {
    auto it = cache.find(&phi);
    if (it == cache.end()) it = cache.emplace(&phi, sat(d, phi)).first;
    return it->second;
}

// Three-valued satisfaction of `psi` on the prefix path[0..upto]
// anchored at `offset`: decided yes, decided no, or needs more states.
enum class PrefixStatus { Yes, No, Unknown };

PrefixStatus prefix_status(const PathFormula& psi, const std::vector<State>& path,
                           std::size_t upto, std::size_t offset, const Dtmc& d,
                           SatCache& sat_cache) {
    struct Visitor {
        const std::vector<State>& path;
        std::size_t upto;
        std::size_t offset;
        const Dtmc& d;
        SatCache& cache;

        PrefixStatus operator()(const NextNode& n) const {
            if (offset + 1 > upto) return PrefixStatus::Unknown;
            const auto& s = cached_sat(*n.arg, d, cache);
            return s[static_cast<std::size_t>(path[offset + 1])]
                       ? PrefixStatus::Yes
                       : PrefixStatus::No;
        }
        PrefixStatus operator()(const NextPathNode& n) const {
            if (offset + 1 > upto) return PrefixStatus::Unknown;
            return prefix_status(*n.arg, path, upto, offset + 1, d, cache);
        }
        PrefixStatus operator()(const UntilNode& n) const {
            const auto& s1 = cached_sat(*n.lhs, d, cache);
            const auto& s2 = cached_sat(*n.rhs, d, cache);
            long long bound = *n.bound;
            for (long long j = 0; j <= bound; ++j) {
                std::size_t at = offset + static_cast<std::size_t>(j);
                if (at > upto) return PrefixStatus::Unknown;
                if (s2[static_cast<std::size_t>(path[at])])
                    return PrefixStatus::Yes;
                if (!s1[static_cast<std::size_t>(path[at])])
                    return PrefixStatus::No;
            }
            return PrefixStatus::No;  // bound exhausted
        }
    };
    return std::visit(Visitor{path, upto, offset, d, sat_cache}, psi.node());
}

}  // namespace

double enumerate_oracle(const Dtmc& d, State s, const PathFormula& psi) {
    if (!d.space().is_valid_state(s))
        throw Error("enumerate_oracle: invalid state " + std::to_string(s));
    Horizon horizon = psi.horizon();
    if (!horizon)
        throw Error("enumerate_oracle requires a bounded path formula");

    const StateSpace& sp = d.space();
    const auto n_states =
        static_cast<double>(sp.last_state() - sp.first_state() + 1);
    if (std::pow(n_states, static_cast<double>(*horizon)) > kOracleGuard)
        throw Error("enumerate_oracle guard exceeded: |S|^N too large");

    SatCache sat_cache;
    std::vector<State> path(static_cast<std::size_t>(*horizon) + 1, s);
    KahanSum total;

    // Depth-first expansion of prefixes up to length `horizon`. A prefix
    // stops growing as soon as its verdict is decided, so dropped row
    // mass on restricted models cannot leak out of satisfied prefixes.
    auto walk = [&](auto&& self, std::size_t depth, double prob) -> void {
        if (prob == 0.0) return;
        switch (prefix_status(psi, path, depth, 0, d, sat_cache)) {
            case PrefixStatus::Yes:
                total.add(prob);
                return;
            case PrefixStatus::No:
                return;
            case PrefixStatus::Unknown:
                break;
        }
        if (depth == path.size() - 1) return;  // undecidable within horizon
        State from = path[depth];
        for (State t = sp.first_state(); t <= sp.last_state(); ++t) {
            double p = d.trans(from, t);
            if (p == 0.0) continue;
            path[depth + 1] = t;
            self(self, depth + 1, prob * p);
        }
    };
    walk(walk, 0, 1.0);
    return total.value();
}

std::variant<double, bool> evaluate_query(const Dtmc& d, const Query& q) {
    if (q.filter_op) {
        if (q.bound)
            throw Error("filtered queries must be quantitative (P=?)");
        return filtered_prob(d, *q.filter_op, *q.filter_states, *q.path);
    }
    if (!q.bound) return prob_from_init(d, *q.path);
    if (!d.space().has_dummy_init())
        throw Error("bound queries are evaluated at the dummy init state");
    double p = prob_vector(d, *q.path)[0];
    return compare(q.bound->first, p, q.bound->second);
}

bool compare(CmpOp op, double value, double bound) {
    switch (op) {
        case CmpOp::Le: return value <= bound;
        case CmpOp::Lt: return value < bound;
        case CmpOp::Ge: return value >= bound;
        case CmpOp::Gt: return value > bound;
    }
    return false;
}

}  // namespace ummc
