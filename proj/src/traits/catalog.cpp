#include "rep/traits/catalog.hpp"

#include <algorithm>

#include "rep/common/error.hpp"

namespace rep::traits {

const std::vector<TraitInfo>& trait_catalog() {
    static const std::vector<TraitInfo> catalog = [] {
        std::vector<TraitInfo> c = {
            {"openness", "Openness", "openness"},
            {"conscientiousness", "Conscientiousness", "conscientiousness"},
            {"extraversion", "Extraversion", "extraversion"},
            {"agreeableness", "Agreeableness", "agreeableness"},
            {"neuroticism", "Neuroticism", "neuroticism"},
        };
        const std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> facets = {
            {"openness",
             {{"fantasy", "Fantasy"}, {"aesthetics", "Aesthetics"}, {"feelings", "Feelings"},
              {"actions", "Actions"}, {"ideas", "Ideas"}, {"values", "Values"}}},
            {"conscientiousness",
             {{"competence", "Competence"}, {"order", "Order"}, {"dutifulness", "Dutifulness"},
              {"achievement_striving", "Achievement-striving"}, {"self_discipline", "Self-discipline"},
              {"deliberation", "Deliberation"}}},
            {"extraversion",
             {{"warmth", "Warmth"}, {"gregariousness", "Gregariousness"}, {"assertiveness", "Assertiveness"},
              {"activity", "Activity"}, {"excitement_seeking", "Excitement-seeking"},
              {"positive_emotions", "Positive emotions"}}},
            {"agreeableness",
             {{"trust", "Trust"}, {"straightforwardness", "Straightforwardness"}, {"altruism", "Altruism"},
              {"compliance", "Compliance"}, {"modesty", "Modesty"}, {"tender_mindedness", "Tender-mindedness"}}},
            {"neuroticism",
             {{"anxiety", "Anxiety"}, {"angry_hostility", "Angry hostility"}, {"depression", "Depression"},
              {"self_consciousness", "Self-consciousness"}, {"impulsiveness", "Impulsiveness"},
              {"vulnerability", "Vulnerability"}}},
        };
        for (const auto& [domain, list] : facets)
            for (const auto& [id, name] : list) c.push_back({id, name, domain});
        return c;
    }();
    return catalog;
}

std::size_t trait_index(std::string_view id) {
    const auto& c = trait_catalog();
    auto it = std::find_if(c.begin(), c.end(), [&](const TraitInfo& t) { return t.id == id; });
    if (it == c.end()) throw NotFound("unknown trait '" + std::string(id) + "'");
    return static_cast<std::size_t>(it - c.begin());
}

bool is_trait(std::string_view id) {
    const auto& c = trait_catalog();
    return std::any_of(c.begin(), c.end(), [&](const TraitInfo& t) { return t.id == id; });
}

} // namespace rep::traits
