#include "rep/traits/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "rep/common/error.hpp"
#include "rep/fsm/synthetic.hpp"

namespace rep::traits {

std::string cue_word(std::uint32_t index) { return "q" + fsm::synthetic_word(index) + "x"; }
std::string filler_word(std::uint32_t index) { return fsm::synthetic_word(index % 2000); }

EvidenceLexicon SyntheticSpec::lexicon() const {
    std::vector<LexiconEntry> entries;
    for (const auto& it : items) entries.push_back({it.evidence_id, it.trait_id, "cue_" + it.evidence_id, it.cue});
    return EvidenceLexicon(std::move(entries));
}

std::vector<fsm::PatternSource> SyntheticSpec::patterns() const {
    std::vector<fsm::PatternSource> out;
    for (const auto& it : items) out.push_back({"cue_" + it.evidence_id, it.cue});
    return out;
}

std::vector<std::string> SyntheticSpec::trait_ids() const {
    std::vector<std::string> out;
    for (const auto& it : items)
        if (std::find(out.begin(), out.end(), it.trait_id) == out.end()) out.push_back(it.trait_id);
    return out;
}

TraitModel SyntheticSpec::true_model() const {
    TraitModel m;
    for (const auto& t : trait_ids()) {
        TraitFit fit;
        fit.trait_id = t;
        fit.converged = true;
        for (const auto& it : items)
            if (it.trait_id == t) fit.items.push_back({it.evidence_id, it.mu, it.lambda, it.sigma2, false});
        m.traits.push_back(std::move(fit));
    }
    return m;
}

SyntheticSpec random_synthetic_spec(const std::vector<std::string>& trait_ids, std::size_t items_per_trait,
                                    std::uint64_t seed, const SignalRange& r) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> mu(r.mu_min, r.mu_max), lambda(r.lambda_min, r.lambda_max),
        sigma2(r.sigma2_min, r.sigma2_max);
    SyntheticSpec spec;
    std::uint32_t next_cue = 0;
    for (const auto& t : trait_ids)
        for (std::size_t k = 0; k < items_per_trait; ++k) {
            SyntheticItem it;
            it.evidence_id = t + "_" + std::to_string(k);
            it.trait_id = t;
            it.cue = cue_word(next_cue++);
            it.mu = mu(rng);
            it.lambda = lambda(rng);
            it.sigma2 = sigma2(rng);
            spec.items.push_back(std::move(it));
        }
    return spec;
}

SyntheticSpec spec_from_lexicon(const EvidenceLexicon& lexicon, std::uint64_t seed, const SignalRange& r) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> mu(r.mu_min, r.mu_max), lambda(r.lambda_min, r.lambda_max),
        sigma2(r.sigma2_min, r.sigma2_max);
    SyntheticSpec spec;
    for (const auto& e : lexicon.entries()) {
        SyntheticItem it{e.evidence_id, e.trait_id, e.cue};
        it.mu = mu(rng);
        it.lambda = lambda(rng);
        it.sigma2 = sigma2(rng);
        spec.items.push_back(std::move(it));
    }
    return spec;
}

SyntheticSpec strong_signal_spec(const std::string& trait_id) {
    SignalRange r;
    r.mu_min = -8.0;
    r.mu_max = -7.0;
    r.lambda_min = 0.8;
    r.lambda_max = 1.2;
    r.sigma2_min = 0.2;
    r.sigma2_max = 0.4;
    return random_synthetic_spec({trait_id}, 10, 20240601, r);
}

SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec, std::size_t n_users, std::uint32_t words_per_user,
                                          std::uint64_t seed, bool with_texts) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    SyntheticCorpus c;
    c.trait_ids = spec.trait_ids();
    std::vector<std::size_t> trait_of;
    for (const auto& it : spec.items)
        trait_of.push_back(static_cast<std::size_t>(
            std::find(c.trait_ids.begin(), c.trait_ids.end(), it.trait_id) - c.trait_ids.begin()));
    c.theta.resize(static_cast<Eigen::Index>(n_users), static_cast<Eigen::Index>(c.trait_ids.size()));
    std::vector<std::string> words;
    for (std::size_t i = 0; i < n_users; ++i) {
        for (Eigen::Index t = 0; t < c.theta.cols(); ++t) c.theta(static_cast<Eigen::Index>(i), t) = normal(rng);
        std::vector<std::uint32_t> counts;
        std::uint64_t cue_total = 0;
        for (std::size_t j = 0; j < spec.items.size(); ++j) {
            const auto& it = spec.items[j];
            const double y = it.mu + it.lambda * c.theta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(trait_of[j])) +
                             std::sqrt(it.sigma2) * normal(rng);
            const double x = 1.0 / (1.0 + std::exp(-y));
            std::binomial_distribution<std::uint32_t> draw(words_per_user, x);
            counts.push_back(words_per_user == 0 ? 0 : draw(rng));
            cue_total += counts.back();
        }
        const auto tokens = static_cast<std::uint32_t>(std::max<std::uint64_t>(words_per_user, cue_total));
        if (with_texts) {
            words.clear();
            for (std::size_t j = 0; j < spec.items.size(); ++j) words.insert(words.end(), counts[j], spec.items[j].cue);
            std::uniform_int_distribution<std::uint32_t> filler(0, 1999);
            while (words.size() < tokens) words.push_back(filler_word(filler(rng)));
            std::shuffle(words.begin(), words.end(), rng);
            std::string text;
            for (const auto& w : words) {
                if (!text.empty()) text += ' ';
                text += w;
            }
            c.texts.push_back(std::move(text));
        }
        c.counts.push_back(std::move(counts));
        c.token_counts.push_back(tokens);
    }
    return c;
}

std::vector<ReliabilityPoint> reliability_curve(const TraitFit& fit, const EvidenceLexicon& lexicon,
                                                const fsm::CompiledMatcher& matcher, const TextGenerator& generator,
                                                const std::vector<std::uint32_t>& word_counts, std::uint64_t seed) {
    std::vector<ReliabilityPoint> out;
    for (std::size_t k = 0; k < word_counts.size(); ++k) {
        // Same seed at every length: the users (theta) stay fixed along the curve.
        const auto texts = generator(word_counts[k], seed);
        std::vector<EvidenceVector> users;
        users.reserve(texts.size());
        for (const auto& t : texts) users.push_back(extract_evidence(t, lexicon, matcher));
        ReliabilityPoint p{word_counts[k], 0.0, false};
        try {
            p.alpha = cronbach_alpha(contribution_items(fit, lexicon, users));
            p.defined = std::isfinite(p.alpha);
        } catch (const UndefinedAlpha&) {
        }
        out.push_back(p);
    }
    return out;
}

} // namespace rep::traits
