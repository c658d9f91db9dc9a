#include "rep/fsm/synthetic.hpp"

#include <random>

namespace rep::fsm {

std::string synthetic_word(std::uint32_t index) {
    static constexpr char kOnset[] = "bdfgklmnprtvz";
    static constexpr char kVowel[] = "aiou";
    std::string w;
    do {
        const std::uint32_t syllable = index % 52;
        index /= 52;
        w += kOnset[syllable % 13];
        w += kVowel[syllable / 13];
    } while (index > 0);
    return w;
}

std::vector<PatternSource> synthetic_patterns(const SyntheticPatternOptions& o) {
    std::mt19937_64 rng(o.seed);
    std::uniform_int_distribution<std::uint32_t> word(0, o.vocabulary - 1);
    std::uniform_int_distribution<std::uint32_t> length(o.min_tokens, o.max_tokens);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<PatternSource> out;
    out.reserve(o.count);
    for (std::size_t i = 0; i < o.count; ++i) {
        const auto n = length(rng);
        const bool alternatives = u(rng) < o.p_alternatives;
        const bool gap = n > 1 && u(rng) < o.p_gap;
        const auto alt_at = std::uniform_int_distribution<std::uint32_t>(0, n - 1)(rng);
        const auto gap_at = std::uniform_int_distribution<std::uint32_t>(1, std::max(1u, n - 1))(rng);
        std::string text;
        for (std::uint32_t k = 0; k < n; ++k) {
            if (gap && k == gap_at) text += "* ";
            if (alternatives && k == alt_at) {
                const std::uint32_t members = u(rng) < 0.1 ? 8 + word(rng) % 5 : 2 + word(rng) % 3;
                text += '[';
                for (std::uint32_t m = 0; m < members; ++m) {
                    if (m) text += '|';
                    text += synthetic_word(word(rng));
                }
                text += ']';
            } else {
                text += synthetic_word(word(rng));
            }
            if (k + 1 < n) text += ' ';
        }
        out.push_back({"s" + std::to_string(i), std::move(text)});
    }
    return out;
}

std::vector<std::string> synthetic_words(std::size_t length, std::uint32_t vocabulary, double p_unknown,
                                         std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::uint32_t> word(0, vocabulary - 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::string> out(length);
    for (auto& w : out) w = u(rng) < p_unknown ? synthetic_word(vocabulary + word(rng)) : synthetic_word(word(rng));
    return out;
}

namespace {

void realize(const std::vector<Element>& seq, std::mt19937_64& rng, std::vector<std::string>& out) {
    for (const auto& e : seq) {
        if (const auto* t = std::get_if<Token>(&e.node)) {
            out.push_back(t->text);
        } else if (const auto* l = std::get_if<Literal>(&e.node)) {
            out.insert(out.end(), l->words.begin(), l->words.end());
        } else if (const auto* a = std::get_if<Alternatives>(&e.node)) {
            realize(a->members[rng() % a->members.size()], rng, out);
        } else if (const auto* g = std::get_if<Gap>(&e.node)) {
            const std::uint32_t span = g->max ? *g->max - g->min : 3;
            for (std::uint32_t k = g->min + static_cast<std::uint32_t>(rng() % (span + 1)); k > 0; --k)
                out.push_back(synthetic_word(static_cast<std::uint32_t>(rng() % 1000)));
        } else {
            out.push_back("zz");
        }
    }
}

} // namespace

SyntheticStream synthetic_stream(const std::vector<PatternSource>& patterns, std::size_t min_words,
                                 std::uint32_t vocabulary, double p_embed, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::uint32_t> word(0, vocabulary - 1);
    std::uniform_int_distribution<std::uint32_t> length(5, 40);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SyntheticStream s;
    s.utterance_offsets.push_back(0);
    std::vector<std::string> embedded;
    while (s.words.size() < min_words) {
        const auto n = length(rng);
        embedded.clear();
        if (!patterns.empty() && u(rng) < p_embed)
            realize(parse_pattern(patterns[rng() % patterns.size()].text), rng, embedded);
        const std::uint32_t at = n > embedded.size() ? static_cast<std::uint32_t>(rng() % (n - embedded.size() + 1)) : 0;
        for (std::uint32_t k = 0; k < at; ++k) s.words.push_back(synthetic_word(word(rng)));
        s.words.insert(s.words.end(), embedded.begin(), embedded.end());
        while (s.words.size() - s.utterance_offsets.back() < n) s.words.push_back(synthetic_word(word(rng)));
        s.utterance_offsets.push_back(static_cast<std::uint32_t>(s.words.size()));
    }
    return s;
}

} // namespace rep::fsm
