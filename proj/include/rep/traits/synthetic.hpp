#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rep/fsm/matcher.hpp"
#include "rep/traits/lexicon.hpp"
#include "rep/traits/model.hpp"

namespace rep::traits {

struct SyntheticItem {
    std::string evidence_id;
    std::string trait_id;
    std::string cue;  ///< a single made-up word that only appears as this cue
    double mu = -5.0;
    double lambda = 1.0;
    double sigma2 = 0.25;
};

struct SyntheticSpec {
    std::vector<SyntheticItem> items;

    EvidenceLexicon lexicon() const;
    /// One pattern per cue, id "cue_<evidence_id>".
    std::vector<fsm::PatternSource> patterns() const;
    /// The generating parameters as a model (for scoring without a fit).
    TraitModel true_model() const;
    std::vector<std::string> trait_ids() const;
};

struct SignalRange {
    double mu_min = -6.0, mu_max = -4.5;
    double lambda_min = 0.5, lambda_max = 1.5;
    double sigma2_min = 0.1, sigma2_max = 0.4;
};

/// Random parameters for `items_per_trait` cues on each listed trait.
SyntheticSpec random_synthetic_spec(const std::vector<std::string>& trait_ids, std::size_t items_per_trait,
                                    std::uint64_t seed, const SignalRange& range = {});

/// Random parameters for the cues of an existing lexicon, in lexicon order.
/// Each cue must be a single surface token so generated texts hit its pattern.
SyntheticSpec spec_from_lexicon(const EvidenceLexicon& lexicon, std::uint64_t seed, const SignalRange& range = {});

/// Ten rare cues loading strongly on one trait. Alpha of its contributions
/// passes 0.8 between a few hundred and a thousand words per user.
SyntheticSpec strong_signal_spec(const std::string& trait_id = "openness");

std::string cue_word(std::uint32_t index);
std::string filler_word(std::uint32_t index);

struct SyntheticCorpus {
    std::vector<std::string> trait_ids;
    Eigen::MatrixXd theta;  ///< users x traits
    std::vector<std::vector<std::uint32_t>> counts;  ///< users x items
    std::vector<std::uint32_t> token_counts;
    std::vector<std::string> texts;  ///< empty unless requested
};

/// theta ~ N(0,1) per user and trait; y = mu + lambda*theta + N(0, sigma2);
/// counts ~ Binomial(words, logistic(y)). Texts hold each cue `count` times
/// among filler words; a text is longer than `words_per_user` only when the
/// cue counts alone exceed it. Deterministic for a seed.
SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec, std::size_t n_users, std::uint32_t words_per_user,
                                          std::uint64_t seed, bool with_texts = true);

struct ReliabilityPoint {
    std::uint32_t word_count = 0;
    double alpha = 0.0;
    bool defined = false;
};

using TextGenerator = std::function<std::vector<std::string>(std::uint32_t words, std::uint64_t seed)>;

/// Cronbach's alpha of the per-evidence contributions of one trait across the
/// generated users, for each word count (input order). Word counts where
/// alpha is undefined are flagged rather than thrown.
std::vector<ReliabilityPoint> reliability_curve(const TraitFit& fit, const EvidenceLexicon& lexicon,
                                                const fsm::CompiledMatcher& matcher, const TextGenerator& generator,
                                                const std::vector<std::uint32_t>& word_counts, std::uint64_t seed);

} // namespace rep::traits
