#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rep/fsm/matcher.hpp"

namespace rep::traits {

struct LexiconEntry {
    std::string evidence_id;
    std::string trait_id;
    std::string pattern_id;
    std::string cue;
    bool operator==(const LexiconEntry&) const = default;
};

/// Evidence entries in file order. Every trait id is checked against the
/// catalog and evidence ids are unique.
class EvidenceLexicon {
public:
    EvidenceLexicon() = default;
    explicit EvidenceLexicon(std::vector<LexiconEntry> entries);

    /// `evidence_id\ttrait_id\tpattern_id\tcue` lines; '#' comments and blank
    /// lines skipped.
    static EvidenceLexicon parse(std::string_view content);
    static EvidenceLexicon load(const std::string& path);
    std::string to_tsv() const;

    const std::vector<LexiconEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    /// Position of an evidence id, or -1.
    std::int64_t index_of(std::string_view evidence_id) const;
    /// Entry positions belonging to one trait, in file order.
    std::vector<std::uint32_t> entries_for(std::string_view trait_id) const;

    /// Throws LexiconMismatch unless every pattern id is known to `matcher`.
    void check_against(const fsm::CompiledMatcher& matcher) const;

private:
    std::vector<LexiconEntry> entries_;
    std::unordered_map<std::string, std::uint32_t> index_;
};

/// Counts aligned with the lexicon entries.
struct EvidenceVector {
    std::vector<std::uint32_t> counts;
    std::uint32_t token_count = 0;
    std::vector<double> rates;
};

/// (c + 0.5) / (n + 1), clamped to [1e-6, 1 - 1e-6].
double smooth_rate(std::uint64_t count, std::uint64_t token_count);

EvidenceVector evidence_from_counts(std::vector<std::uint32_t> counts, std::uint32_t token_count);

/// Counts one per match hit of each entry's pattern in the tokenized text.
EvidenceVector extract_evidence(std::string_view text, const EvidenceLexicon& lexicon,
                                const fsm::CompiledMatcher& matcher);
EvidenceVector extract_evidence(const std::vector<std::string>& tokens, const EvidenceLexicon& lexicon,
                                const fsm::CompiledMatcher& matcher);

} // namespace rep::traits
