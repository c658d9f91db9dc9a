#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rep::traits {

struct TraitInfo {
    std::string id;
    std::string name;
    std::string domain;  ///< own id for the five domains, parent domain for facets
};

/// The five domains followed by their 30 facets, six per domain.
const std::vector<TraitInfo>& trait_catalog();
bool is_trait(std::string_view id);
std::size_t trait_index(std::string_view id);  ///< throws rep::NotFound

} // namespace rep::traits
