#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rep/fsm/pattern.hpp"

namespace rep::fsm {

/// Pronounceable pseudo-words that the rule lemmatizer leaves unchanged.
std::string synthetic_word(std::uint32_t index);

struct SyntheticPatternOptions {
    std::size_t count = 1000;
    std::uint32_t vocabulary = 20000;
    std::uint32_t min_tokens = 3;
    std::uint32_t max_tokens = 6;
    double p_alternatives = 0.2;
    double p_gap = 0.1;
    std::uint64_t seed = 1;
};

/// Benchmark patterns: uniform words, a fraction with one alternatives list
/// (one in ten of those long enough to become a class token) and a fraction
/// with one authored `*` gap.
std::vector<PatternSource> synthetic_patterns(const SyntheticPatternOptions& options);

/// Stream of `length` symbol-level words drawn from the same vocabulary plus
/// a share of out-of-vocabulary words.
std::vector<std::string> synthetic_words(std::size_t length, std::uint32_t vocabulary, double p_unknown,
                                         std::uint64_t seed);

/// Utterances of 5..40 words. A share of them embed a contiguous instance of
/// one of `patterns` so benchmarks see realistic hit rates.
struct SyntheticStream {
    std::vector<std::string> words;
    std::vector<std::uint32_t> utterance_offsets;  ///< starts, plus a final end
};
SyntheticStream synthetic_stream(const std::vector<PatternSource>& patterns, std::size_t min_words,
                                 std::uint32_t vocabulary, double p_embed, std::uint64_t seed);

} // namespace rep::fsm
