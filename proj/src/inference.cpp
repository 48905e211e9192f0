#include "ummc/inference.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>

#include "ummc/errors.hpp"
#include "ummc/numeric.hpp"

namespace ummc {

namespace {

void check_dimensions(const std::vector<Trace>& traces,
                      const PatternMixture& mixture,
                      const std::vector<UserStrategy>& strategies) {
    if (strategies.size() != traces.size())
        throw Error("strategy count does not match trace count");
    for (const auto& st : strategies)
        if (static_cast<int>(st.theta.size()) != mixture.K())
            throw Error("strategy for user '" + st.user_id + "' has length " +
                        std::to_string(st.theta.size()) + ", expected K=" +
                        std::to_string(mixture.K()));
    for (const auto& tr : traces) validate_trace(mixture.space(), tr);
}

void check_config(const EmConfig& config) {
    if (config.K < 1) throw Error("K must be at least 1");
    if (config.restarts < 1) throw Error("restarts must be at least 1");
    if (config.max_iters < 1) throw Error("max_iters must be at least 1");
    if (!(config.tol > 0.0)) throw Error("tol must be positive");
    if (config.smoothing < 0.0) throw Error("smoothing must be non-negative");
}

// Normalizes counts in-place over [1..n]; all-zero mass becomes uniform.
void normalize_row(std::vector<double>& row, int n) {
    double total = 0.0;
    for (int i = 1; i <= n; ++i) total += row[static_cast<std::size_t>(i)];
    if (total > 0.0) {
        for (int i = 1; i <= n; ++i) row[static_cast<std::size_t>(i)] /= total;
    } else {
        for (int i = 1; i <= n; ++i)
            row[static_cast<std::size_t>(i)] = 1.0 / static_cast<double>(n);
    }
}

int draw_from_row(const std::vector<double>& weights, int first, int last,
                  std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double u = unit(rng);
    double cum = 0.0;
    int fallback = -1;
    for (int i = first; i <= last; ++i) {
        double p = weights[static_cast<std::size_t>(i)];
        if (p <= 0.0) continue;
        fallback = i;
        cum += p;
        if (u < cum) return i;
    }
    if (fallback < 0) throw Error("cannot sample from an all-zero distribution");
    return fallback;
}

std::uint64_t restart_seed(std::uint64_t base, int restart) {
    // splitmix64 step keeps restart streams well separated.
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL *
                                 (static_cast<std::uint64_t>(restart) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

double log_likelihood(const std::vector<Trace>& traces,
                      const PatternMixture& mixture,
                      const std::vector<UserStrategy>& strategies) {
    check_dimensions(traces, mixture, strategies);
    const int K = mixture.K();
    double ll = 0.0;
    for (std::size_t m = 0; m < traces.size(); ++m) {
        const auto& events = traces[m].events;
        const auto& theta = strategies[m].theta;
        ll += std::log(
            mixture.iota_init()[static_cast<std::size_t>(events.front())]);
        for (std::size_t t = 0; t + 1 < events.size(); ++t) {
            KahanSum p;
            for (int k = 1; k <= K; ++k)
                p.add(theta[static_cast<std::size_t>(k) - 1] *
                      mixture.pattern(k)[static_cast<std::size_t>(events[t])]
                                        [static_cast<std::size_t>(events[t + 1])]);
            ll += std::log(p.value());
        }
    }
    return ll;
}

Responsibilities e_step(const std::vector<Trace>& traces,
                        const PatternMixture& mixture,
                        const std::vector<UserStrategy>& strategies) {
    check_dimensions(traces, mixture, strategies);
    const int K = mixture.K();
    Responsibilities gamma(traces.size());
    for (std::size_t m = 0; m < traces.size(); ++m) {
        const auto& events = traces[m].events;
        const auto& theta = strategies[m].theta;
        gamma[m].resize(events.size() > 0 ? events.size() - 1 : 0);
        for (std::size_t t = 0; t + 1 < events.size(); ++t) {
            auto& g = gamma[m][t];
            g.resize(static_cast<std::size_t>(K));
            double denom = 0.0;
            for (int k = 1; k <= K; ++k) {
                double w = theta[static_cast<std::size_t>(k) - 1] *
                           mixture.pattern(k)[static_cast<std::size_t>(events[t])]
                                             [static_cast<std::size_t>(events[t + 1])];
                g[static_cast<std::size_t>(k) - 1] = w;
                denom += w;
            }
            if (denom <= 0.0)
                throw Error("transition " + std::to_string(events[t]) + "->" +
                            std::to_string(events[t + 1]) + " at position " +
                            std::to_string(t) + " of user '" + traces[m].user_id +
                            "' has probability 0 under every pattern");
            for (auto& v : g) v /= denom;
        }
    }
    return gamma;
}

EmParams m_step(const StateSpace& space, const std::vector<Trace>& traces,
                const Responsibilities& resp, const EmConfig& config) {
    const int n = space.n_states();
    const int K = config.K;
    const double eps = config.smoothing;
    if (resp.size() != traces.size())
        throw Error("responsibilities do not match trace count");

    const auto size = static_cast<std::size_t>(n) + 1;
    std::vector<std::vector<std::vector<double>>> patterns(
        static_cast<std::size_t>(K),
        std::vector<std::vector<double>>(size, std::vector<double>(size, eps)));
    // Index 0 is never a transition endpoint; clear the pseudo-counts there.
    for (auto& mat : patterns) {
        std::fill(mat[0].begin(), mat[0].end(), 0.0);
        for (auto& row : mat) row[0] = 0.0;
    }

    std::vector<double> iota(size, eps);
    iota[0] = 0.0;
    std::vector<UserStrategy> strategies;
    strategies.reserve(traces.size());

    for (std::size_t m = 0; m < traces.size(); ++m) {
        const auto& events = traces[m].events;
        iota[static_cast<std::size_t>(events.front())] += 1.0;

        std::vector<double> theta_mass(static_cast<std::size_t>(K), 0.0);
        if (resp[m].size() + 1 != events.size())
            throw Error("responsibilities for user '" + traces[m].user_id +
                        "' do not match the trace length");
        for (std::size_t t = 0; t + 1 < events.size(); ++t) {
            const auto& g = resp[m][t];
            if (g.size() != static_cast<std::size_t>(K))
                throw Error("responsibility vector has wrong length");
            for (int k = 0; k < K; ++k) {
                double w = g[static_cast<std::size_t>(k)];
                theta_mass[static_cast<std::size_t>(k)] += w;
                patterns[static_cast<std::size_t>(k)]
                        [static_cast<std::size_t>(events[t])]
                        [static_cast<std::size_t>(events[t + 1])] += w;
            }
        }

        std::vector<double> theta(static_cast<std::size_t>(K));
        double total = 0.0;
        for (int k = 0; k < K; ++k) {
            theta[static_cast<std::size_t>(k)] =
                theta_mass[static_cast<std::size_t>(k)] + eps;
            total += theta[static_cast<std::size_t>(k)];
        }
        if (total > 0.0) {
            for (auto& v : theta) v /= total;
        } else {
            std::fill(theta.begin(), theta.end(), 1.0 / static_cast<double>(K));
        }
        strategies.push_back(UserStrategy{traces[m].user_id, std::move(theta)});
    }

    for (auto& mat : patterns)
        for (State s = 1; s <= n; ++s) normalize_row(mat[static_cast<std::size_t>(s)], n);
    normalize_row(iota, n);

    return EmParams{PatternMixture(space, std::move(patterns), std::move(iota)),
                    std::move(strategies)};
}

EmParams random_init(const StateSpace& space, const std::vector<Trace>& traces,
                     const EmConfig& config, std::mt19937_64& rng) {
    const int n = space.n_states();
    const int K = config.K;
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const auto size = static_cast<std::size_t>(n) + 1;
    std::vector<std::vector<std::vector<double>>> patterns(
        static_cast<std::size_t>(K),
        std::vector<std::vector<double>>(size, std::vector<double>(size, 0.0)));
    for (auto& mat : patterns) {
        for (State s = 1; s <= n; ++s) {
            auto& row = mat[static_cast<std::size_t>(s)];
            for (State t = 1; t <= n; ++t)
                row[static_cast<std::size_t>(t)] = -std::log(1.0 - unit(rng));
            normalize_row(row, n);
        }
    }

    std::vector<double> iota(size, config.smoothing);
    iota[0] = 0.0;
    for (const auto& tr : traces)
        iota[static_cast<std::size_t>(tr.events.front())] += 1.0;
    normalize_row(iota, n);

    std::vector<UserStrategy> strategies;
    strategies.reserve(traces.size());
    for (const auto& tr : traces)
        strategies.push_back(UserStrategy{
            tr.user_id,
            std::vector<double>(static_cast<std::size_t>(K),
                                1.0 / static_cast<double>(K))});

    return EmParams{PatternMixture(space, std::move(patterns), std::move(iota)),
                    std::move(strategies)};
}

EmRun em_run(const std::vector<Trace>& traces, EmParams start,
             const EmConfig& config) {
    check_config(config);
    EmRun run;
    run.params = std::move(start);
    run.loglik = log_likelihood(traces, run.params.mixture, run.params.strategies);

    const StateSpace& space = run.params.mixture.space();
    for (int iter = 0; iter < config.max_iters; ++iter) {
        Responsibilities gamma =
            e_step(traces, run.params.mixture, run.params.strategies);
        EmParams candidate = m_step(space, traces, gamma, config);
        double ll = log_likelihood(traces, candidate.mixture, candidate.strategies);
        if (ll < run.loglik) break;  // smoothing can stall at the fixed point
        double improvement = ll - run.loglik;
        run.params = std::move(candidate);
        run.loglik = ll;
        run.trajectory.push_back(ll);
        ++run.iters;
        if (improvement < config.tol) break;
    }
    return run;
}

FitResult em_fit(const StateSpace& space, const std::vector<Trace>& traces,
                 const EmConfig& config) {
    check_config(config);
    if (traces.empty()) throw Error("em_fit requires at least one trace");
    for (const auto& tr : traces) validate_trace(space, tr);

    auto run_one = [&](int r) {
        std::mt19937_64 rng(restart_seed(config.seed, r));
        return em_run(traces, random_init(space, traces, config, rng), config);
    };

    std::vector<EmRun> runs(static_cast<std::size_t>(config.restarts));
    if (config.restarts == 1) {
        runs[0] = run_one(0);
    } else {
        std::vector<std::future<EmRun>> futures;
        futures.reserve(static_cast<std::size_t>(config.restarts));
        for (int r = 0; r < config.restarts; ++r)
            futures.push_back(std::async(std::launch::async, run_one, r));
        for (int r = 0; r < config.restarts; ++r)
            runs[static_cast<std::size_t>(r)] = futures[static_cast<std::size_t>(r)].get();
    }

    int best = 0;
    for (int r = 1; r < config.restarts; ++r)
        if (runs[static_cast<std::size_t>(r)].loglik >
            runs[static_cast<std::size_t>(best)].loglik)
            best = r;

    EmParams params = std::move(runs[static_cast<std::size_t>(best)].params);

    // Canonical component order: descending total strategy mass.
    const int K = config.K;
    std::vector<double> mass(static_cast<std::size_t>(K), 0.0);
    for (const auto& st : params.strategies)
        for (int k = 0; k < K; ++k)
            mass[static_cast<std::size_t>(k)] += st.theta[static_cast<std::size_t>(k)];
    std::vector<int> order(static_cast<std::size_t>(K));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return mass[static_cast<std::size_t>(a)] > mass[static_cast<std::size_t>(b)];
    });

    std::vector<std::vector<std::vector<double>>> patterns;
    patterns.reserve(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k)
        patterns.push_back(params.mixture.patterns()[static_cast<std::size_t>(
            order[static_cast<std::size_t>(k)])]);
    std::vector<UserStrategy> strategies;
    strategies.reserve(params.strategies.size());
    for (const auto& st : params.strategies) {
        std::vector<double> theta(static_cast<std::size_t>(K));
        for (int k = 0; k < K; ++k)
            theta[static_cast<std::size_t>(k)] =
                st.theta[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
        strategies.push_back(UserStrategy{st.user_id, std::move(theta)});
    }

    FitResult result{
        PatternMixture(space, std::move(patterns),
                       params.mixture.iota_init()),
        std::move(strategies),
        runs[static_cast<std::size_t>(best)].loglik,
        {},
        best,
        {}};
    for (const auto& run : runs) {
        result.iters_per_restart.push_back(run.iters);
        result.trajectories.push_back(run.trajectory);
    }
    return result;
}

Trace simulate(const PatternMixture& mixture, const std::vector<double>& theta,
               int length, std::mt19937_64& rng, const std::string& user_id) {
    if (length < 1) throw Error("simulate requires length >= 1");
    if (static_cast<int>(theta.size()) != mixture.K())
        throw Error("strategy length does not match K");
    validate_strategy(theta);

    const int n = mixture.space().n_states();
    Trace trace{user_id, {}};
    trace.events.reserve(static_cast<std::size_t>(length));

    State s = draw_from_row(mixture.iota_init(), 1, n, rng);
    trace.events.push_back(s);
    std::vector<double> theta_row(theta.size() + 1, 0.0);
    for (std::size_t k = 0; k < theta.size(); ++k) theta_row[k + 1] = theta[k];

    for (int step = 1; step < length; ++step) {
        int k = draw_from_row(theta_row, 1, mixture.K(), rng);
        s = draw_from_row(mixture.pattern(k)[static_cast<std::size_t>(s)], 1, n, rng);
        trace.events.push_back(s);
    }
    return trace;
}

}  // namespace ummc
