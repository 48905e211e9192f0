/*
 * PRISM-language export of a user metamodel: one module with a command
 * per source state (plus the dummy init command), a label block, and
 * property text for the standard questions. A minimal re-parser of the
 * emitted text supports round-trip checks.
 */
#ifndef UMMC_PRISM_HPP
#define UMMC_PRISM_HPP

#include <map>
#include <string>
#include <vector>

#include "ummc/formula.hpp"
#include "ummc/model.hpp"

namespace ummc {

struct PrismDocument {
    std::string model_text;   // dtmc header, alpha formula, module block
    std::string label_text;   // label definitions
    std::string properties_text;  // optional

    // The .pm file contents: model followed by labels.
    std::string full_text() const { return model_text + label_text; }
};

// Deterministic text per the fixed encoding: variables s:[0..n] and
// k:[0..K] starting at the dummy (0,0); for each source state one
// command listing the theta(k')*P_k'(s,s') updates ordered by k' then
// s', zero-probability updates omitted; probabilities printed at 17
// significant digits. `names` must assign a label name to every state
// 1..n.
PrismDocument export_prism(const PatternMixture& mixture,
                           const std::vector<double>& theta,
                           const std::map<State, std::string>& names);

struct ReparsedUmm {
    int n = 0;
    int K = 0;
    // (n*K+1)^2 metamodel transition matrix, dummy at flat index 0.
    std::vector<std::vector<double>> matrix;
};

// Reads back text produced by export_prism (not a general PRISM
// parser); throws ParseError with the offending line number.
ReparsedUmm reparse(const std::string& text);

enum class QuestionId { Q1, Q2, Q3, Q4 };

struct QuestionParams {
    int i = 1;
    long long N = 0;
    Horizon N2;  // q4 only; nullopt = unbounded
};

// Property text for the given question with parameters substituted.
// q4 additionally needs the entry labels of the state space.
std::string export_properties(QuestionId question, const QuestionParams& params,
                              const std::vector<std::string>& entry_labels = {});

}  // namespace ummc

#endif
