#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rep::fsm {

/// Splits free text into lowercase tokens. Words are runs of ASCII letters,
/// digits, apostrophes and non-ASCII bytes; common emoticons such as ":)" or
/// "<3" are kept whole; every other visible character is its own token.
std::vector<std::string> tokenize(std::string_view text);

std::string to_lower(std::string_view text);

/// Rule-based lemmatizer: an exception table for irregular forms followed by
/// ordered suffix rules. Callers pass lowercase tokens. Idempotent.
std::string lemmatize(std::string_view token);

/// The lemmatizer's exception table, exposed for tests and docs.
const std::vector<std::pair<std::string_view, std::string_view>>& lemma_exceptions();

} // namespace rep::fsm
