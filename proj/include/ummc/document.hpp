/*
 * Structured-text (JSON) documents for mixtures, fit results, and user
 * metamodels. Probabilities are written with 17 significant digits so
 * load(save(x)) == x exactly.
 */
#ifndef UMMC_DOCUMENT_HPP
#define UMMC_DOCUMENT_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ummc/inference.hpp"
#include "ummc/model.hpp"
#include "ummc/umm.hpp"

namespace ummc {

struct FitInfo {
    double loglik = 0.0;
    int chosen_restart = 0;
    std::vector<int> iters_per_restart;
};

struct ModelDocument {
    PatternMixture mixture;
    std::vector<UserStrategy> strategies;
    std::optional<FitInfo> fit;
    std::string notes;

    const UserStrategy& strategy_for(const std::string& user_id) const;
};

void save_model_document(std::ostream& out, const ModelDocument& doc);
ModelDocument load_model_document(std::istream& in);

ModelDocument document_from_fit(const FitResult& fit, std::string notes = "");

void save_umm_document(std::ostream& out, const Umm& umm);
Umm load_umm_document(std::istream& in);

// Per-restart log-likelihood trajectories as TSV rows (restart, iter, loglik).
void write_diagnostics(std::ostream& out, const FitResult& fit);

}  // namespace ummc

#endif
