/*
 * Maximum-likelihood inference of a K-component activity-pattern
 * mixture and per-user strategies from event traces, by EM with
 * multiple random restarts, plus the generative simulator.
 *
 * The generative model: the first state is drawn from iota_init; at
 * every step the user draws a pattern k with probability theta(k) and
 * then moves according to P_k. Responsibilities are therefore computed
 * per observed transition.
 */
#ifndef UMMC_INFERENCE_HPP
#define UMMC_INFERENCE_HPP

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "ummc/model.hpp"

namespace ummc {

struct EmConfig {
    int K = 1;
    int max_iters = 500;
    double tol = 1e-8;     // absolute log-likelihood improvement threshold
    int restarts = 1;
    std::uint64_t seed = 0;
    double smoothing = 1e-6;  // Dirichlet pseudo-count added in the M-step
};

struct EmParams {
    PatternMixture mixture;
    std::vector<UserStrategy> strategies;  // aligned with the trace list
};

struct FitResult {
    PatternMixture mixture;
    std::vector<UserStrategy> strategies;
    double loglik = 0.0;
    std::vector<int> iters_per_restart;
    int chosen_restart = 0;
    // Accepted log-likelihood values per restart, one entry per iteration.
    std::vector<std::vector<double>> trajectories;
};

// gamma[user][transition][k]; each innermost vector sums to 1.
using Responsibilities = std::vector<std::vector<std::vector<double>>>;

// sum_m [ log iota(s0) + sum_t log sum_k theta_m(k) P_k(s_t, s_{t+1}) ];
// -inf when some factor is 0.
double log_likelihood(const std::vector<Trace>& traces,
                      const PatternMixture& mixture,
                      const std::vector<UserStrategy>& strategies);

// Fails when a transition has probability 0 under every pattern, which
// smoothing > 0 rules out.
Responsibilities e_step(const std::vector<Trace>& traces,
                        const PatternMixture& mixture,
                        const std::vector<UserStrategy>& strategies);

// Closed-form re-estimation from responsibilities with pseudo-count
// smoothing; rows with no observed mass become uniform.
EmParams m_step(const StateSpace& space, const std::vector<Trace>& traces,
                const Responsibilities& resp, const EmConfig& config);

// Random starting point: Dirichlet(1,...,1) pattern rows, uniform
// strategies, iota from first-event counts.
EmParams random_init(const StateSpace& space, const std::vector<Trace>& traces,
                     const EmConfig& config, std::mt19937_64& rng);

struct EmRun {
    EmParams params;
    double loglik = 0.0;
    int iters = 0;
    std::vector<double> trajectory;
};

// One EM run from an explicit starting point. Iterates until the
// improvement drops below config.tol or max_iters is reached; an
// iteration that would lower the log-likelihood (possible only through
// smoothing) is rejected and ends the run. Component order is left
// exactly as seeded.
EmRun em_run(const std::vector<Trace>& traces, EmParams start,
             const EmConfig& config);

// Multi-restart fit returning the best run, with components reordered
// by descending total strategy mass for a canonical output.
FitResult em_fit(const StateSpace& space, const std::vector<Trace>& traces,
                 const EmConfig& config);

// Draws a trace of `length` states from the generative model.
Trace simulate(const PatternMixture& mixture, const std::vector<double>& theta,
               int length, std::mt19937_64& rng,
               const std::string& user_id = "sim");

}  // namespace ummc

#endif
