#include "ummc/fixtures.hpp"

namespace ummc::fixtures {

StateSpace yoshi_space() {
    return StateSpace::with_state_names({"seeY", "feed", "seeP", "pick"}, false);
}

std::map<State, std::string> yoshi_state_names() {
    return {{1, "seeY"}, {2, "feed"}, {3, "seeP"}, {4, "pick"}};
}

PatternMixture yoshi_mixture() {
    // Pattern 1: effective play. Feeding is reached quickly from every
    // state and repeated feeds / basket-filling pick runs are likely.
    std::vector<std::vector<double>> p1 = {
        {0.0, 0.00, 0.00, 0.00, 0.00},
        {0.0, 0.15, 0.60, 0.20, 0.05},   // seeY
        {0.0, 0.25, 0.45, 0.15, 0.15},   // feed
        {0.0, 0.10, 0.25, 0.15, 0.50},   // seeP
        {0.0, 0.05, 0.32, 0.13, 0.50},   // pick
    };
    // Pattern 2: ineffective wandering between sightings; feeding is
    // unreachable and picking rare.
    std::vector<std::vector<double>> p2 = {
        {0.0, 0.00, 0.00, 0.00, 0.00},
        {0.0, 0.53, 0.00, 0.42, 0.05},   // seeY
        {0.0, 0.65, 0.00, 0.35, 0.00},   // feed
        {0.0, 0.45, 0.00, 0.50, 0.05},   // seeP
        {0.0, 0.60, 0.00, 0.40, 0.00},   // pick
    };
    std::vector<double> iota = {0.0, 0.70, 0.01, 0.28, 0.01};
    return PatternMixture(yoshi_space(), {p1, p2}, iota);
}

std::vector<double> yoshi_example_theta() { return {0.7, 0.3}; }

ModelDocument yoshi_document() {
    ModelDocument doc{
        yoshi_mixture(),
        {UserStrategy{"m", yoshi_example_theta()}},
        std::nullopt,
        "Bundled example: two activity patterns over the four-event space "
        "(seeY, feed, seeP, pick). Pattern 1 plays effectively: feeding is "
        "reachable within a few taps and repeat feeds are likely. Pattern 2 "
        "wanders between sightings and never reaches feed. Every transition "
        "probability is 0, in [0.01,0.1], or above 0.1. The example user "
        "'m' mixes the patterns with strategy (0.7, 0.3)."};
    return doc;
}

}  // namespace ummc::fixtures
