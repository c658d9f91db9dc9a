#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "rep/traits/lexicon.hpp"

namespace rep::traits {

/// Parameters of one evidence item on the logit scale:
/// logit(x) = mu + lambda * theta + e,  e ~ N(0, sigma2).
struct ItemParams {
    std::string evidence_id;
    double mu = 0.0;
    double lambda = 0.0;
    double sigma2 = 1.0;
    /// Constant column in the training data; excluded from fitting and scoring.
    bool dropped = false;
    bool operator==(const ItemParams&) const = default;
};

struct TraitFit {
    std::string trait_id;
    std::vector<ItemParams> items;
    double log_likelihood = 0.0;  ///< marginal, on the rate scale (includes the logit Jacobian)
    std::uint32_t iterations = 0;
    bool converged = false;
    /// False when fewer than two usable items remain; loadings are then zero.
    bool identified = true;
    std::vector<std::string> warnings;
    /// Log-likelihood after initialization and after every iteration.
    std::vector<double> trace;
    bool operator==(const TraitFit&) const = default;
};

struct EmOptions {
    double tolerance = 1e-8;
    std::uint32_t max_iterations = 500;
    double min_sigma2 = 1e-6;
};

/// Fits the one-factor model for one trait. `rates` is users x items with
/// entries in (0, 1); `evidence_ids` names the columns.
TraitFit fit_em(const Eigen::MatrixXd& rates, const std::string& trait_id,
                const std::vector<std::string>& evidence_ids, const EmOptions& options = {});

/// Marginal log-likelihood of logit-scale data under `items` (dropped items
/// skipped), without the Jacobian term.
double logit_log_likelihood(const Eigen::MatrixXd& y, const std::vector<ItemParams>& items);

Eigen::MatrixXd logit(const Eigen::MatrixXd& rates);

struct TraitScore {
    std::string trait_id;
    double theta = 0.0;
    double sd = 1.0;
    std::uint32_t evidence_used = 0;  ///< items of the trait with a non-zero count
    bool operator==(const TraitScore&) const = default;
};

/// Posterior mean and sd of theta under a N(0, 1) prior.
TraitScore infer_theta(const TraitFit& fit, const EvidenceLexicon& lexicon, const EvidenceVector& ev);

/// Posterior mean and sd from logit-scale observations aligned with `items`.
std::pair<double, double> posterior(const std::vector<ItemParams>& items, const std::vector<double>& y);

struct TraitModel {
    std::vector<TraitFit> traits;

    const TraitFit* find(std::string_view trait_id) const;

    std::string to_json() const;
    static TraitModel from_json(std::string_view text);
    void save(const std::string& path) const;
    static TraitModel load(const std::string& path);
    bool operator==(const TraitModel&) const = default;
};

/// One score per catalog trait, in catalog order. Traits absent from the model
/// get the prior (0, 1).
std::vector<TraitScore> infer_all(const TraitModel& model, const EvidenceLexicon& lexicon, const EvidenceVector& ev);

/// Fits every trait that has lexicon entries. `counts` is users x lexicon size.
TraitModel fit_model(const std::vector<std::vector<std::uint32_t>>& counts, const std::vector<std::uint32_t>& token_counts,
                     const EvidenceLexicon& lexicon, const EmOptions& options = {});

/// alpha = k/(k-1) * (1 - sum of item variances / variance of row sums),
/// sample variances. Throws UndefinedAlpha when the total variance is zero.
double cronbach_alpha(const Eigen::MatrixXd& items);

/// Per-evidence contributions lambda * (y - mu) / sigma2 of one trait's
/// usable items, users x items.
Eigen::MatrixXd contribution_items(const TraitFit& fit, const EvidenceLexicon& lexicon,
                                   const std::vector<EvidenceVector>& users);

} // namespace rep::traits
