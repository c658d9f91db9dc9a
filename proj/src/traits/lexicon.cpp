#include "rep/traits/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "rep/common/error.hpp"
#include "rep/fsm/text.hpp"
#include "rep/traits/catalog.hpp"

namespace rep::traits {

EvidenceLexicon::EvidenceLexicon(std::vector<LexiconEntry> entries) : entries_(std::move(entries)) {
    for (std::uint32_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        if (e.evidence_id.empty() || e.pattern_id.empty()) throw FormatError("lexicon entry with empty id");
        if (!is_trait(e.trait_id))
            throw LexiconMismatch("evidence '" + e.evidence_id + "' names unknown trait '" + e.trait_id + "'");
        if (!index_.emplace(e.evidence_id, i).second)
            throw LexiconMismatch("duplicate evidence id '" + e.evidence_id + "'");
    }
}

EvidenceLexicon EvidenceLexicon::parse(std::string_view content) {
    std::vector<LexiconEntry> entries;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < content.size()) {
        auto eol = content.find('\n', pos);
        if (eol == std::string_view::npos) eol = content.size();
        std::string_view line = content.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (int k = 0; k < 3; ++k) {
            const auto tab = line.find('\t', start);
            if (tab == std::string_view::npos)
                throw FormatError("lexicon line " + std::to_string(line_no) + ": expected 4 tab-separated fields");
            fields.emplace_back(line.substr(start, tab - start));
            start = tab + 1;
        }
        fields.emplace_back(line.substr(start));
        entries.push_back({fields[0], fields[1], fields[2], fields[3]});
    }
    return EvidenceLexicon(std::move(entries));
}

EvidenceLexicon EvidenceLexicon::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFound("cannot open lexicon '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string EvidenceLexicon::to_tsv() const {
    std::string out = "# evidence_id\ttrait_id\tpattern_id\tcue\n";
    for (const auto& e : entries_) out += e.evidence_id + '\t' + e.trait_id + '\t' + e.pattern_id + '\t' + e.cue + '\n';
    return out;
}

std::int64_t EvidenceLexicon::index_of(std::string_view evidence_id) const {
    auto it = index_.find(std::string(evidence_id));
    return it == index_.end() ? std::int64_t{-1} : std::int64_t{it->second};
}

std::vector<std::uint32_t> EvidenceLexicon::entries_for(std::string_view trait_id) const {
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].trait_id == trait_id) out.push_back(i);
    return out;
}

void EvidenceLexicon::check_against(const fsm::CompiledMatcher& matcher) const {
    for (const auto& e : entries_)
        if (matcher.pattern_index(e.pattern_id) < 0)
            throw LexiconMismatch("pattern '" + e.pattern_id + "' of evidence '" + e.evidence_id +
                                  "' is not in the matcher");
}

double smooth_rate(std::uint64_t count, std::uint64_t token_count) {
    const double x = (static_cast<double>(count) + 0.5) / (static_cast<double>(token_count) + 1.0);
    return std::clamp(x, 1e-6, 1.0 - 1e-6);
}

EvidenceVector evidence_from_counts(std::vector<std::uint32_t> counts, std::uint32_t token_count) {
    EvidenceVector ev;
    ev.rates.reserve(counts.size());
    for (auto c : counts) ev.rates.push_back(smooth_rate(c, token_count));
    ev.counts = std::move(counts);
    ev.token_count = token_count;
    return ev;
}

EvidenceVector extract_evidence(const std::vector<std::string>& tokens, const EvidenceLexicon& lexicon,
                                const fsm::CompiledMatcher& matcher) {
    // pattern index -> lexicon entries using it
    std::vector<std::vector<std::uint32_t>> users(matcher.pattern_count());
    for (std::uint32_t i = 0; i < lexicon.size(); ++i) {
        const auto& e = lexicon.entries()[i];
        const auto p = matcher.pattern_index(e.pattern_id);
        if (p < 0)
            throw LexiconMismatch("pattern '" + e.pattern_id + "' of evidence '" + e.evidence_id +
                                  "' is not in the matcher");
        users[static_cast<std::size_t>(p)].push_back(i);
    }
    std::vector<std::uint32_t> counts(lexicon.size(), 0);
    const auto symbols = matcher.intern_tokens(tokens);
    matcher.scan(symbols, [&](std::uint32_t pattern, std::uint32_t, std::uint32_t) {
        for (auto i : users[pattern]) ++counts[i];
    });
    return evidence_from_counts(std::move(counts), static_cast<std::uint32_t>(tokens.size()));
}

EvidenceVector extract_evidence(std::string_view text, const EvidenceLexicon& lexicon,
                                const fsm::CompiledMatcher& matcher) {
    return extract_evidence(fsm::tokenize(text), lexicon, matcher);
}

} // namespace rep::traits
