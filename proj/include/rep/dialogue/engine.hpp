#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "rep/dialogue/script.hpp"
#include "rep/persona/persona.hpp"

namespace rep::dialogue {

struct UserEvent {
    enum class Kind : std::uint8_t { chat_begin, text, widget_answer, link_click };
    Kind kind = Kind::text;
    std::string text;
    std::string question_id;  ///< widget answers and link clicks
    int value = 0;

    static UserEvent begin() { return {Kind::chat_begin, {}, {}, 0}; }
    static UserEvent say(std::string t) { return {Kind::text, std::move(t), {}, 0}; }
    static UserEvent answer(std::string q, int v) { return {Kind::widget_answer, {}, std::move(q), v}; }
    static UserEvent click(std::string link) { return {Kind::link_click, {}, std::move(link), 0}; }

    nlohmann::ordered_json to_json() const;
    static UserEvent from_json(const nlohmann::json& j);
    bool operator==(const UserEvent&) const = default;
};

struct PendingQuestion {
    std::string question_id;
    std::string unit_id;
    bool operator==(const PendingQuestion&) const = default;
};

struct SessionState {
    std::uint64_t seed = 0;
    std::uint32_t turn = 0;
    /// Non-reusable units already activated.
    std::set<std::string> activated;
    /// Every activation in order, reusable ones included.
    std::vector<std::string> activation_log;
    std::vector<std::string> subtopic_stack;
    /// First agenda group with an unactivated unit.
    std::uint32_t agenda_cursor = 0;
    std::optional<PendingQuestion> pending;
    std::map<std::string, std::string> answers;
    std::map<std::string, int> outcomes;

    nlohmann::ordered_json to_json() const;
    static SessionState from_json(const nlohmann::json& j);
    bool operator==(const SessionState&) const = default;
};

struct Reply {
    enum class Kind : std::uint8_t { say, question };
    Kind kind = Kind::say;
    std::string text;
    std::string unit_id;
    std::string question_id;
    nlohmann::json widget;  ///< null when the reply carries no widget

    nlohmann::ordered_json to_json() const;
    bool operator==(const Reply&) const = default;
};

/// (class, agenda group, topic declaration index, unit index); lower ranks first.
/// Classes: 0 stack-top subtopic, 1 agenda, 2 sidetalk, 3 error handling.
struct RankKey {
    std::uint32_t cls = 0;
    std::uint32_t group = 0;
    std::uint32_t topic = 0;
    std::uint32_t unit = 0;
    auto operator<=>(const RankKey&) const = default;
};

struct Candidate {
    UnitRef ref;
    RankKey key;
};

/// What the triggers are evaluated against within a turn.
enum class Context : std::uint8_t {
    chat_begin,
    text,           ///< free text, no question pending
    pending_text,   ///< free text offered for interception while a question waits
    answered,       ///< right after an answer was stored
    proactive,      ///< chaining after a reply that asked nothing
};

RankKey rank_key(const InterviewScript& script, const SessionState& state, UnitRef ref);

/// Ranked candidates. `hits` are the pattern indices matched by the event text.
std::vector<Candidate> candidate_units(const InterviewScript& script, const SessionState& state, Context ctx,
                                       const std::set<std::uint32_t>& hits);

bool is_complete(const InterviewScript& script, const SessionState& state);

struct StepResult {
    SessionState state;
    std::vector<Reply> replies;
    std::vector<std::string> activated;  ///< units fired this turn, in order
};

/// Pure transition. Throws ValidationError for malformed events, Conflict on a
/// completed session, NotFound for unknown links, NoCandidate when nothing can
/// respond and the fallback is disabled.
StepResult step(const InterviewScript& script, const persona::Persona& persona, const SessionState& state,
                const UserEvent& event);

SessionState initial_state(std::uint64_t seed);

} // namespace rep::dialogue
