#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <memory>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rep/fsm/pattern.hpp"
#include "rep/fsm/rewrite.hpp"
#include "rep/fsm/text.hpp"

namespace rep::fsm {

using SymbolId = std::uint32_t;
using StateId = std::uint32_t;

inline constexpr SymbolId kUnkSymbol = 0;
inline constexpr SymbolId kAnySymbol = 1;
inline constexpr StateId kNoState = std::numeric_limits<StateId>::max();

/// Dense ids for the matcher's vocabulary. Literal words are looked up by
/// surface form; everything else by lemma. Lemmas unknown to the vocabulary
/// fall back to a symbol for the set of regexes they match, then to UNK.
class TokenInterner {
public:
    enum class Kind : std::uint8_t { Unk = 0, Any = 1, Literal = 2, Lemma = 3, RegexMask = 4, Class = 5 };

    struct Entry {
        Kind kind;
        std::string text;
        bool operator==(const Entry&) const = default;
    };

    TokenInterner();

    SymbolId add(Kind kind, std::string text);
    /// Finds an existing entry; returns kUnkSymbol when absent.
    SymbolId find(Kind kind, std::string_view text) const;

    const Entry& entry(SymbolId id) const { return entries_.at(id); }
    std::size_t size() const { return entries_.size(); }
    const std::vector<Entry>& entries() const { return entries_; }

    /// Maps one lowercase surface token to its symbol.
    SymbolId intern(std::string_view surface, const Lemmatizer& lemmatizer) const;

    void set_regexes(std::vector<std::string> exprs);
    const std::vector<std::string>& regexes() const { return regex_text_; }

private:
    std::vector<Entry> entries_;
    std::unordered_map<std::string, SymbolId> literal_index_;
    std::unordered_map<std::string, SymbolId> lemma_index_;
    std::unordered_map<std::uint32_t, SymbolId> mask_index_;
    std::vector<std::string> regex_text_;
    std::vector<std::regex> regex_;
};

struct MatchHit {
    std::uint32_t pattern;  ///< dense index; see CompiledMatcher::pattern_id
    std::uint32_t start;
    std::uint32_t end;      ///< exclusive
    bool operator==(const MatchHit&) const = default;
    auto operator<=>(const MatchHit& o) const {
        if (start != o.start) return start <=> o.start;
        if (end != o.end) return end <=> o.end;
        return pattern <=> o.pattern;
    }
};

struct CompileStats {
    std::size_t input_patterns = 0;
    std::size_t rewritten_patterns = 0;
    std::size_t classes = 0;
    std::size_t nfa_states = 0;
    std::size_t dfa_states = 0;
    std::size_t min_states = 0;
    std::size_t columns = 0;
    std::size_t edges = 0;
    double seconds = 0.0;
};

/// Immutable minimized DFA over interned tokens. Each state has a default
/// transition (taken by symbols without an explicit edge) plus a sorted list
/// of explicit (column, target) edges whose target differs from the default.
class CompiledMatcher {
public:
    CompiledMatcher() = default;

    std::size_t state_count() const { return default_.size(); }
    std::size_t column_count() const { return column_count_; }
    std::size_t edge_count() const { return edge_column_.size(); }
    StateId start() const { return start_; }
    /// The rejecting sink state, or kNoState when the sink is unreachable.
    StateId sink() const { return sink_; }

    std::size_t pattern_count() const { return pattern_ids_.size(); }
    const std::string& pattern_id(std::uint32_t index) const { return pattern_ids_.at(index); }
    /// Dense index of a pattern id, or -1.
    std::int64_t pattern_index(std::string_view id) const;

    const TokenInterner& interner() const { return interner_; }
    /// Lemmatizer used when interning input text. Not serialized; a loaded
    /// matcher uses the built-in rule lemmatizer until replaced.
    void set_lemmatizer(Lemmatizer lemmatizer) { lemmatizer_ = std::move(lemmatizer); }
    const ClassTable& classes() const { return classes_; }
    std::uint32_t column_of(SymbolId s) const { return symbol_column_[s]; }

    StateId next(StateId state, std::uint32_t column) const {
        const std::uint32_t lo = edge_offset_[state];
        const std::uint32_t hi = edge_offset_[state + 1];
        if (hi - lo <= 8) {
            for (std::uint32_t e = lo; e < hi; ++e)
                if (edge_column_[e] == column) return edge_target_[e];
            return default_[state];
        }
        const auto* first = edge_column_.data() + lo;
        const auto* last = edge_column_.data() + hi;
        const auto* it = std::lower_bound(first, last, column);
        if (it != last && *it == column) return edge_target_[lo + static_cast<std::uint32_t>(it - first)];
        return default_[state];
    }

    std::span<const std::uint32_t> accepts(StateId state) const {
        const std::uint32_t set = accept_set_[state];
        return {accept_items_.data() + accept_offset_[set], accept_offset_[set + 1] - accept_offset_[set]};
    }

    std::vector<SymbolId> intern_tokens(const std::vector<std::string>& tokens) const;
    /// Tokenizes free text and interns the tokens.
    std::vector<SymbolId> intern_text(std::string_view text) const;

    /// Calls `on_hit(pattern, start, end)` for every hit, in (start, end,
    /// pattern) order. Restarts the automaton at every position.
    template <typename OnHit>
    void scan(std::span<const SymbolId> tokens, OnHit&& on_hit) const {
        const auto n = static_cast<std::uint32_t>(tokens.size());
        const std::uint32_t* cols = symbol_column_.data();
        const StateId* first_step = start_row_.data();
        for (std::uint32_t i = 0; i < n; ++i) {
            StateId s = first_step[cols[tokens[i]]];
            std::uint32_t j = i;
            while (s != sink_) {
                const std::uint32_t set = accept_set_[s];
                if (set != 0)
                    for (std::uint32_t k = accept_offset_[set]; k < accept_offset_[set + 1]; ++k)
                        on_hit(accept_items_[k], i, j + 1);
                if (++j == n) break;
                s = next(s, cols[tokens[j]]);
            }
        }
    }

    std::vector<MatchHit> match_stream(std::span<const SymbolId> tokens) const;
    std::size_t count_hits(std::span<const SymbolId> tokens) const;

    /// Versioned little-endian binary form (magic "REPFSM1\0").
    std::string serialize() const;
    static CompiledMatcher deserialize(std::string_view blob);

    bool operator==(const CompiledMatcher&) const;

private:
    friend class MatcherBuilder;

    std::vector<std::string> pattern_ids_;
    Lemmatizer lemmatizer_ = [](std::string_view t) { return lemmatize(t); };
    TokenInterner interner_;
    ClassTable classes_;
    std::vector<std::uint32_t> symbol_column_;
    std::uint32_t column_count_ = 0;
    StateId start_ = 0;
    StateId sink_ = kNoState;
    std::vector<StateId> default_;
    std::vector<std::uint32_t> edge_offset_{0};
    std::vector<std::uint32_t> edge_column_;
    std::vector<StateId> edge_target_;
    std::vector<std::uint32_t> accept_set_;
    std::vector<std::uint32_t> accept_offset_{0, 0};
    std::vector<std::uint32_t> accept_items_;
    // Dense copy of the start state's row; every scan position begins there.
    std::vector<StateId> start_row_;

    void build_start_row();
};

struct CompileOptions {
    GapPolicy gaps;
    RewriteOptions rewrite;
    /// Share NFA states between patterns with common element prefixes.
    bool prefix_trie = true;
    bool minimize = true;
    std::size_t max_states = 20'000'000;
    std::size_t max_regexes = 10;
};

/// parse -> normalize -> rewrite -> Thompson NFA -> subset construction ->
/// minimization. Pattern ids must be unique; dense indices follow the
/// lexicographic order of ids.
CompiledMatcher compile(const std::vector<PatternSource>& patterns, const Lemmatizer& lemmatizer,
                        const CompileOptions& options = {}, CompileStats* stats = nullptr);

/// Same, starting from already parsed ASTs.
CompiledMatcher compile_asts(const std::vector<std::string>& ids, const std::vector<PatternAst>& asts,
                             const Lemmatizer& lemmatizer, const CompileOptions& options = {},
                             CompileStats* stats = nullptr);

/// Reads `<pattern_id>\t<dsl>` lines; '#' lines and blank lines are skipped.
std::vector<PatternSource> read_pattern_file(const std::string& path);
std::vector<PatternSource> parse_pattern_lines(std::string_view content);

} // namespace rep::fsm
