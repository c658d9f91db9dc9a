#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rep/fsm/pattern.hpp"

namespace rep::fsm {

/// Member sets of the class tokens created by alternatives retraction.
/// Identical member sets share one class.
class ClassTable {
public:
    /// Returns the class id for `members` (sorted and de-duplicated first).
    std::uint32_t intern(std::vector<std::string> members);

    std::size_t size() const { return classes_.size(); }
    const std::vector<std::string>& members(std::uint32_t class_id) const { return classes_.at(class_id); }

private:
    std::vector<std::vector<std::string>> classes_;
};

struct RewriteOptions {
    bool dedup = true;
    bool retract_alternatives = true;
    bool factor_alternatives = true;
    /// Alternatives lists with at least this many single-word members become a class token.
    std::uint32_t class_threshold = 8;
};

struct RewrittenPattern {
    PatternAst ast;
    /// Indices of the original patterns this AST accepts for, ascending.
    std::vector<std::uint32_t> labels;
};

struct RewriteResult {
    std::vector<RewrittenPattern> patterns;
    ClassTable classes;
};

/// Applies the batch rewrites to normalized patterns: collapses exact
/// duplicates, retracts long alternatives lists into class tokens and factors
/// common prefixes and suffixes out of alternatives. The recognized language
/// of every label is unchanged.
RewriteResult rewrite_batch(const std::vector<PatternAst>& patterns, const RewriteOptions& options = {});

/// Factors common prefixes and suffixes of alternative sequences, recursively.
/// Returns a contiguous element sequence equivalent to the alternatives.
std::vector<Element> factor_alternatives(std::vector<std::vector<Element>> members);

} // namespace rep::fsm
