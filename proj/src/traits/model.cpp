#include "rep/traits/model.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "rep/common/error.hpp"
#include "rep/traits/catalog.hpp"

namespace rep::traits {

Eigen::MatrixXd logit(const Eigen::MatrixXd& rates) {
    return rates.unaryExpr([](double x) { return std::log(x / (1.0 - x)); });
}

namespace {

double jacobian_term(const Eigen::MatrixXd& rates, const std::vector<ItemParams>& items) {
    double total = 0.0;
    for (Eigen::Index j = 0; j < rates.cols(); ++j) {
        if (items[static_cast<std::size_t>(j)].dropped) continue;
        for (Eigen::Index i = 0; i < rates.rows(); ++i) {
            const double x = rates(i, j);
            total -= std::log(x * (1.0 - x));
        }
    }
    return total;
}

} // namespace

double logit_log_likelihood(const Eigen::MatrixXd& y, const std::vector<ItemParams>& items) {
    const auto n = static_cast<double>(y.rows());
    double log_det = 0.0, lw = 0.0;
    std::size_t used = 0;
    for (const auto& it : items) {
        if (it.dropped) continue;
        log_det += std::log(it.sigma2);
        lw += it.lambda * it.lambda / it.sigma2;
        ++used;
    }
    const double p_factor = 1.0 + lw;
    log_det += std::log(p_factor);

    double quad = 0.0;
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
        double rr = 0.0, lr = 0.0;
        for (Eigen::Index j = 0; j < y.cols(); ++j) {
            const auto& it = items[static_cast<std::size_t>(j)];
            if (it.dropped) continue;
            const double r = y(i, j) - it.mu;
            rr += r * r / it.sigma2;
            lr += it.lambda * r / it.sigma2;
        }
        quad += rr - lr * lr / p_factor;
    }
    return -0.5 * n * static_cast<double>(used) * std::log(2.0 * std::numbers::pi) - 0.5 * n * log_det - 0.5 * quad;
}

TraitFit fit_em(const Eigen::MatrixXd& rates, const std::string& trait_id,
                const std::vector<std::string>& evidence_ids, const EmOptions& options) {
    const Eigen::Index n = rates.rows();
    const Eigen::Index p = rates.cols();
    if (static_cast<std::size_t>(p) != evidence_ids.size())
        throw ValidationError("fit_em: " + std::to_string(p) + " columns but " +
                              std::to_string(evidence_ids.size()) + " evidence ids");
    if (n < 2) throw DegenerateData("fit_em needs at least two users, got " + std::to_string(n));
    if (p < 1) throw DegenerateData("fit_em needs at least one evidence item");
    if ((rates.array() <= 0.0).any() || (rates.array() >= 1.0).any())
        throw ValidationError("fit_em: rates must lie strictly between 0 and 1");

    TraitFit fit;
    fit.trait_id = trait_id;
    const Eigen::MatrixXd y_all = logit(rates);
    const Eigen::VectorXd mean_all = y_all.colwise().mean();

    std::vector<Eigen::Index> usable;
    for (Eigen::Index j = 0; j < p; ++j) {
        ItemParams item;
        item.evidence_id = evidence_ids[static_cast<std::size_t>(j)];
        item.mu = mean_all(j);
        const double var = (y_all.col(j).array() - mean_all(j)).square().mean();
        if (var <= 1e-14 * std::max(1.0, mean_all(j) * mean_all(j))) {
            item.dropped = true;
            fit.warnings.push_back("evidence '" + item.evidence_id + "' is constant in the training data; dropped");
        } else {
            usable.push_back(j);
            item.sigma2 = var;
        }
        fit.items.push_back(item);
    }

    const auto q = static_cast<Eigen::Index>(usable.size());
    auto finish = [&](const Eigen::MatrixXd& y) {
        std::vector<ItemParams> used;
        for (auto j : usable) used.push_back(fit.items[static_cast<std::size_t>(j)]);
        fit.log_likelihood = logit_log_likelihood(y, used) + jacobian_term(rates, fit.items);
    };

    Eigen::MatrixXd y(n, q);
    for (Eigen::Index k = 0; k < q; ++k) y.col(k) = y_all.col(usable[static_cast<std::size_t>(k)]);

    if (q < 2) {
        // One usable item: the loading is not identified; keep mean and variance.
        fit.identified = false;
        fit.converged = true;
        fit.warnings.push_back("fewer than two usable evidence items; loadings not identified");
        finish(y);
        fit.trace.push_back(fit.log_likelihood);
        return fit;
    }

    Eigen::VectorXd mu = y.colwise().mean();
    const Eigen::MatrixXd centered = y.rowwise() - mu.transpose();
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const double top = std::max(eig.eigenvalues()(q - 1), 0.0);
    Eigen::VectorXd lambda = eig.eigenvectors().col(q - 1) * std::sqrt(top);
    Eigen::VectorXd psi = (cov.diagonal().array() - lambda.array().square())
                              .max(0.05 * cov.diagonal().array())
                              .max(options.min_sigma2);

    auto params = [&] {
        std::vector<ItemParams> out(static_cast<std::size_t>(q));
        for (Eigen::Index k = 0; k < q; ++k) out[static_cast<std::size_t>(k)] = {"", mu(k), lambda(k), psi(k), false};
        return out;
    };
    const double jac = jacobian_term(rates, fit.items);
    double ll = logit_log_likelihood(y, params()) + jac;
    fit.trace.push_back(ll);

    const double dn = static_cast<double>(n);
    const Eigen::VectorXd sum_y = y.colwise().sum();
    for (std::uint32_t iter = 1; iter <= options.max_iterations; ++iter) {
        // E-step
        const Eigen::VectorXd w = lambda.array() / psi.array();
        const double precision = 1.0 + lambda.dot(w);
        const Eigen::VectorXd m = (y.rowwise() - mu.transpose()) * w / precision;
        const double v = 1.0 / precision;
        // M-step
        const double sm = m.sum();
        const double smm = m.squaredNorm() + dn * v;
        const Eigen::VectorXd sum_ym = y.transpose() * m;
        const double det = dn * smm - sm * sm;
        mu = (smm * sum_y - sm * sum_ym) / det;
        lambda = (dn * sum_ym - sm * sum_y) / det;
        const Eigen::MatrixXd resid = (y.rowwise() - mu.transpose()) - m * lambda.transpose();
        psi = (resid.colwise().squaredNorm().transpose().array() / dn + lambda.array().square() * v)
                  .max(options.min_sigma2);

        const double next = logit_log_likelihood(y, params()) + jac;
        fit.trace.push_back(next);
        fit.iterations = iter;
        const double gain = next - ll;
        ll = next;
        if (gain < options.tolerance) {
            fit.converged = true;
            break;
        }
    }

    if (lambda.sum() < 0) lambda = -lambda;
    for (Eigen::Index k = 0; k < q; ++k) {
        auto& item = fit.items[static_cast<std::size_t>(usable[static_cast<std::size_t>(k)])];
        item.mu = mu(k);
        item.lambda = lambda(k);
        item.sigma2 = psi(k);
    }
    fit.log_likelihood = ll;
    if (!fit.converged)
        fit.warnings.push_back("EM stopped after " + std::to_string(options.max_iterations) + " iterations");
    return fit;
}

std::pair<double, double> posterior(const std::vector<ItemParams>& items, const std::vector<double>& y) {
    double num = 0.0, precision = 1.0;
    for (std::size_t j = 0; j < items.size(); ++j) {
        const auto& it = items[j];
        if (it.dropped) continue;
        num += it.lambda * (y[j] - it.mu) / it.sigma2;
        precision += it.lambda * it.lambda / it.sigma2;
    }
    return {num / precision, std::sqrt(1.0 / precision)};
}

TraitScore infer_theta(const TraitFit& fit, const EvidenceLexicon& lexicon, const EvidenceVector& ev) {
    std::vector<double> y;
    TraitScore score;
    score.trait_id = fit.trait_id;
    for (const auto& it : fit.items) {
        const auto idx = lexicon.index_of(it.evidence_id);
        if (idx < 0 || static_cast<std::size_t>(idx) >= ev.rates.size())
            throw LexiconMismatch("model evidence '" + it.evidence_id + "' is not in the lexicon");
        const double x = ev.rates[static_cast<std::size_t>(idx)];
        y.push_back(std::log(x / (1.0 - x)));
        if (!it.dropped && ev.counts[static_cast<std::size_t>(idx)] > 0) ++score.evidence_used;
    }
    std::tie(score.theta, score.sd) = posterior(fit.items, y);
    return score;
}

const TraitFit* TraitModel::find(std::string_view trait_id) const {
    for (const auto& t : traits)
        if (t.trait_id == trait_id) return &t;
    return nullptr;
}

std::vector<TraitScore> infer_all(const TraitModel& model, const EvidenceLexicon& lexicon, const EvidenceVector& ev) {
    std::vector<TraitScore> out;
    for (const auto& info : trait_catalog()) {
        if (const auto* fit = model.find(info.id))
            out.push_back(infer_theta(*fit, lexicon, ev));
        else
            out.push_back({info.id, 0.0, 1.0, 0});
    }
    return out;
}

TraitModel fit_model(const std::vector<std::vector<std::uint32_t>>& counts, const std::vector<std::uint32_t>& token_counts,
                     const EvidenceLexicon& lexicon, const EmOptions& options) {
    if (counts.size() != token_counts.size()) throw ValidationError("fit_model: counts and token counts differ in length");
    TraitModel model;
    for (const auto& info : trait_catalog()) {
        const auto cols = lexicon.entries_for(info.id);
        if (cols.empty()) continue;
        Eigen::MatrixXd rates(static_cast<Eigen::Index>(counts.size()), static_cast<Eigen::Index>(cols.size()));
        std::vector<std::string> ids;
        for (auto c : cols) ids.push_back(lexicon.entries()[c].evidence_id);
        for (std::size_t i = 0; i < counts.size(); ++i) {
            if (counts[i].size() != lexicon.size()) throw LexiconMismatch("count row does not match the lexicon size");
            for (std::size_t k = 0; k < cols.size(); ++k)
                rates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                    smooth_rate(counts[i][cols[k]], token_counts[i]);
        }
        auto fit = fit_em(rates, info.id, ids, options);
        fit.trace.clear();
        model.traits.push_back(std::move(fit));
    }
    return model;
}

double cronbach_alpha(const Eigen::MatrixXd& items) {
    const auto n = items.rows();
    const auto k = items.cols();
    if (n < 2 || k < 2)
        throw UndefinedAlpha("alpha needs at least two users and two items (got " + std::to_string(n) + " x " +
                             std::to_string(k) + ")");
    auto sample_var = [&](const Eigen::VectorXd& v) {
        return (v.array() - v.mean()).square().sum() / static_cast<double>(n - 1);
    };
    double item_var = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) item_var += sample_var(items.col(j));
    const Eigen::VectorXd totals = items.rowwise().sum();
    const double total_var = sample_var(totals);
    // Identical totals can still leave rounding-level variance behind.
    if (!(total_var > 1e-24 * std::max(1.0, totals.mean() * totals.mean())))
        throw UndefinedAlpha("total score variance is zero");
    const double dk = static_cast<double>(k);
    return dk / (dk - 1.0) * (1.0 - item_var / total_var);
}

Eigen::MatrixXd contribution_items(const TraitFit& fit, const EvidenceLexicon& lexicon,
                                   const std::vector<EvidenceVector>& users) {
    std::vector<std::pair<std::size_t, const ItemParams*>> cols;
    for (const auto& it : fit.items) {
        if (it.dropped || it.lambda == 0.0) continue;
        const auto idx = lexicon.index_of(it.evidence_id);
        if (idx < 0) throw LexiconMismatch("model evidence '" + it.evidence_id + "' is not in the lexicon");
        cols.emplace_back(static_cast<std::size_t>(idx), &it);
    }
    Eigen::MatrixXd out(static_cast<Eigen::Index>(users.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < users.size(); ++i)
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const auto& [idx, it] = cols[k];
            const double x = users[i].rates[idx];
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                it->lambda * (std::log(x / (1.0 - x)) - it->mu) / it->sigma2;
        }
    return out;
}

// ---------------------------------------------------------------------------
// Model file

namespace {
constexpr const char* kModelFormat = "rep-trait-model";
constexpr int kModelVersion = 1;
} // namespace

std::string TraitModel::to_json() const {
    nlohmann::ordered_json doc;
    doc["format"] = kModelFormat;
    doc["version"] = kModelVersion;
    auto& arr = doc["traits"] = nlohmann::ordered_json::array();
    for (const auto& t : traits) {
        nlohmann::ordered_json jt;
        jt["trait_id"] = t.trait_id;
        jt["log_likelihood"] = t.log_likelihood;
        jt["iterations"] = t.iterations;
        jt["converged"] = t.converged;
        jt["identified"] = t.identified;
        jt["warnings"] = t.warnings;
        auto& items = jt["items"] = nlohmann::ordered_json::array();
        for (const auto& it : t.items)
            items.push_back({{"evidence_id", it.evidence_id},
                             {"mu", it.mu},
                             {"lambda", it.lambda},
                             {"sigma2", it.sigma2},
                             {"dropped", it.dropped}});
        arr.push_back(std::move(jt));
    }
    return doc.dump(1) + "\n";
}

TraitModel TraitModel::from_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        if (doc.at("format").get<std::string>() != kModelFormat) throw FormatError("not a trait model file");
        if (doc.at("version").get<int>() != kModelVersion)
            throw FormatError("unsupported model version " + doc.at("version").dump());
        TraitModel model;
        for (const auto& jt : doc.at("traits")) {
            TraitFit t;
            t.trait_id = jt.at("trait_id").get<std::string>();
            if (!is_trait(t.trait_id)) throw FormatError("model names unknown trait '" + t.trait_id + "'");
            t.log_likelihood = jt.at("log_likelihood").get<double>();
            t.iterations = jt.at("iterations").get<std::uint32_t>();
            t.converged = jt.at("converged").get<bool>();
            t.identified = jt.at("identified").get<bool>();
            t.warnings = jt.at("warnings").get<std::vector<std::string>>();
            for (const auto& ji : jt.at("items")) {
                ItemParams it;
                it.evidence_id = ji.at("evidence_id").get<std::string>();
                it.mu = ji.at("mu").get<double>();
                it.lambda = ji.at("lambda").get<double>();
                it.sigma2 = ji.at("sigma2").get<double>();
                it.dropped = ji.at("dropped").get<bool>();
                if (!(it.sigma2 > 0.0) || !std::isfinite(it.mu) || !std::isfinite(it.lambda))
                    throw FormatError("invalid parameters for evidence '" + it.evidence_id + "'");
                t.items.push_back(std::move(it));
            }
            model.traits.push_back(std::move(t));
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed model file: ") + e.what());
    }
}

void TraitModel::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io_error", "cannot write model '" + path + "'");
    out << to_json();
}

TraitModel TraitModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFound("cannot open model '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

} // namespace rep::traits
