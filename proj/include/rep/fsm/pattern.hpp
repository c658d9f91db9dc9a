#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace rep::fsm {

struct Element;

/// A lemma-matched word.
struct Token {
    std::string text;
    bool operator==(const Token&) const = default;
};

/// Words matched verbatim and contiguously, without lemmatization.
struct Literal {
    std::vector<std::string> words;
    bool operator==(const Literal&) const = default;
};

/// Exactly one arbitrary token.
struct AnyOne {
    bool operator==(const AnyOne&) const = default;
};

/// Between `min` and `max` arbitrary tokens; no `max` means unbounded.
struct Gap {
    std::uint32_t min = 0;
    std::optional<std::uint32_t> max;
    bool operator==(const Gap&) const = default;
};

/// One of several contiguous element sequences. An empty member matches the
/// empty string; the parser never produces one, factoring can.
struct Alternatives {
    std::vector<std::vector<Element>> members;
    bool operator==(const Alternatives&) const = default;
};

/// Anchored ECMAScript regex applied to one lemmatized token.
struct RegexToken {
    std::string expr;
    bool operator==(const RegexToken&) const = default;
};

/// Reference into a ClassTable, produced when a long alternatives list is
/// retracted into a single symbol.
struct ClassRef {
    std::uint32_t class_id = 0;
    bool operator==(const ClassRef&) const = default;
};

struct Element {
    std::variant<Token, Literal, AnyOne, Gap, Alternatives, RegexToken, ClassRef> node;
    bool operator==(const Element&) const = default;
};

using PatternAst = std::vector<Element>;

struct PatternSource {
    std::string pattern_id;
    std::string text;
};

/// Parses the pattern DSL:
///   word        lemma-matched token
///   "a b c"     literal words matched verbatim
///   [a|b c|d]   alternatives of word sequences
///   _           exactly one token
///   *           gap of zero or more tokens
///   /regex/     anchored regex over one token
///   \x          escapes a leading special character
/// Throws SyntaxError with the byte offset of the problem.
PatternAst parse_pattern(std::string_view text);

struct GapPolicy {
    /// Upper bound of the gap inserted between adjacent authored elements.
    std::uint32_t implicit_max = 3;
    bool insert = true;
};

using Lemmatizer = std::function<std::string(std::string_view)>;

/// Lemmatizes tokens (literals untouched) and inserts Gap(0, implicit_max)
/// between consecutive non-gap elements. Idempotent on its own output.
PatternAst normalize(const PatternAst& ast, const Lemmatizer& lemmatizer, const GapPolicy& policy = {});

/// Canonical, unambiguous text form; equal ASTs give equal strings.
std::string to_string(const PatternAst& ast);
std::string to_string(const Element& element);

/// Checks the structural invariants: non-empty alternatives, bounded gaps
/// with min <= max, no adjacent gaps.
bool is_well_formed(const PatternAst& ast);

} // namespace rep::fsm
