/*
 * Bundled example model: a four-event app state space and a calibrated
 * two-pattern mixture (effective play vs. ineffective wandering).
 */
#ifndef UMMC_FIXTURES_HPP
#define UMMC_FIXTURES_HPP

#include <map>
#include <string>
#include <vector>

#include "ummc/document.hpp"
#include "ummc/model.hpp"

namespace ummc::fixtures {

// States 1..4: seeY, feed, seeP, pick.
StateSpace yoshi_space();
std::map<State, std::string> yoshi_state_names();

// Two patterns over yoshi_space(); every entry is 0, in [0.01,0.1], or
// greater than 0.1.
PatternMixture yoshi_mixture();

// The example user's strategy.
std::vector<double> yoshi_example_theta();

// The mixture with the example strategy attached, as shipped in data/.
ModelDocument yoshi_document();

}  // namespace ummc::fixtures

#endif
