#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rep/traits/model.hpp"

namespace rep::scoring {

inline constexpr std::size_t kImItems = 20;

enum class Rating : std::uint8_t { agree = 1, not_sure = 2, disagree = 3 };
enum class WeaknessAction : std::uint8_t { dont_share = 0, share_mine = 1, share_rep = 2 };
enum class Confidence : std::uint8_t { high = 1, med = 2, low = 3 };
enum class OpinionAction : std::uint8_t { dont_share = 0, share = 1 };
enum class ListenAction : std::uint8_t { share_mine = 0, share_rep = 1 };

struct ImResponses {
    std::array<int, kImItems> values{};
    std::array<bool, kImItems> reverse_keyed{};
};

struct OpinionOutcome {
    Confidence cf = Confidence::high;
    OpinionAction action = OpinionAction::dont_share;
};

struct ConfideOutcomes {
    Rating weakness_rating = Rating::agree;
    WeaknessAction weakness_action = WeaknessAction::dont_share;
    std::array<OpinionOutcome, 2> opinions{};
};

struct ShareOutcome {
    Rating rating = Rating::agree;
    ListenAction act = ListenAction::share_mine;
};

struct ListenOutcomes {
    std::array<bool, 2> clicks{};
    std::array<ShareOutcome, 5> shares{};
};

/// Throws ValidationError for values outside 1..7.
int score_im(const ImResponses& r);
int willingness_confide(const ConfideOutcomes& o);
int willingness_listen(const ListenOutcomes& o);

/// Outcome keys as recorded by the dialogue layer, e.g. "im.3", "wc.weakness.rating",
/// "wc.opinion2.action", "wl.click1", "wl.share4.act". Values are the integer
/// codes of the enums above (IM items: the raw 1..7 answer).
using Outcomes = std::map<std::string, int>;

/// Missing actions count as "not shared"; a present action with a missing or
/// illegal rating throws ValidationError.
ConfideOutcomes confide_from(const Outcomes& o);
ListenOutcomes listen_from(const Outcomes& o);
/// nullopt unless all twenty items were answered.
std::optional<ImResponses> im_from(const Outcomes& o, const std::array<bool, kImItems>& reverse_keyed);

struct ScoreReport {
    std::string session_id;
    std::optional<int> im;
    int wc = 0;
    int wl = 0;
    std::vector<traits::TraitScore> traits;

    nlohmann::ordered_json to_json() const;
    static ScoreReport from_json(const nlohmann::json& j);
    bool operator==(const ScoreReport&) const = default;
};

ScoreReport score_session(std::string session_id, const Outcomes& outcomes,
                          const std::array<bool, kImItems>& reverse_keyed,
                          std::vector<traits::TraitScore> trait_scores);

} // namespace rep::scoring
