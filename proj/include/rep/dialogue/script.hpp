#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "rep/fsm/matcher.hpp"
#include "rep/persona/persona.hpp"

namespace rep::dialogue {

enum class Initiator : std::uint8_t { proactive, reactive, mixed };
enum class Importance : std::uint8_t { agenda, sidetalk, error_handling, subtopic };

/// Built-in state predicates: `answered:<question>`, `activated:<unit>`,
/// `agenda-complete`, `no-pending`.
struct Predicate {
    enum class Kind : std::uint8_t { answered, activated, agenda_complete, no_pending };
    Kind kind = Kind::no_pending;
    std::string arg;
    std::string text;
};

struct Trigger {
    enum class Kind : std::uint8_t { chat_begin, pattern, predicate, always };
    Kind kind = Kind::always;
    std::string pattern_id;
    std::int64_t pattern_index = -1;
    Predicate predicate;
};

struct Action {
    enum class Kind : std::uint8_t { say, ask, call, widget };
    Kind kind = Kind::say;
    std::string ref;  ///< template, question or function name
    nlohmann::json widget;
};

struct SemanticUnit {
    std::string unit_id;
    Trigger trigger;
    std::vector<Action> response;
    bool reusable = false;
    std::string subtopic;
};

struct Topic {
    std::string name;
    Initiator initiator = Initiator::proactive;
    Importance importance = Importance::agenda;
    std::vector<SemanticUnit> units;
    std::optional<Predicate> exit;
    /// agenda: temporal group index; others 0
    std::uint32_t group = 0;
};

enum class QuestionType : std::uint8_t { open_ended, likert, single_choice, link };

struct ChoiceOption {
    std::string label;
    int value = 0;
};

struct Question {
    std::string question_id;
    QuestionType type = QuestionType::open_ended;
    std::string heading;  ///< template id
    int points = 0;
    std::vector<ChoiceOption> options;
    std::string url;
    bool tracked = false;
    /// Outcome key written when answered or clicked, e.g. "im.4", "wl.click1".
    std::string measure;
    bool reverse_keyed = false;
};

struct ScriptConfig {
    /// Temporal groups; topics inside one group are unordered.
    std::vector<std::vector<std::string>> agenda;
    std::vector<std::string> sidetalk;
    std::vector<std::string> error_handling;
    std::uint32_t chain_limit = 3;
    bool default_fallback = true;
    std::map<std::string, std::string> functions;  ///< function name -> template id
};

struct UnitRef {
    std::uint32_t topic = 0;
    std::uint32_t unit = 0;
    bool operator==(const UnitRef&) const = default;
};

class InterviewScript {
public:
    /// Throws FormatError, SchemaError, DanglingRef, CycleError.
    static std::shared_ptr<const InterviewScript> parse(std::string_view json_text);
    static std::shared_ptr<const InterviewScript> load(const std::string& path);

    const std::string& script_id() const { return script_id_; }
    const std::vector<Topic>& topics() const { return topics_; }
    const ScriptConfig& config() const { return config_; }
    const std::map<std::string, Question>& questions() const { return questions_; }
    const std::map<std::string, persona::ResponseTemplate>& templates() const { return templates_; }
    const fsm::CompiledMatcher& matcher() const { return matcher_; }

    const Topic& topic(std::string_view name) const;
    std::optional<std::uint32_t> topic_index(std::string_view name) const;
    const SemanticUnit& unit(UnitRef r) const { return topics_[r.topic].units[r.unit]; }
    /// Throws NotFound.
    UnitRef unit_ref(std::string_view unit_id) const;
    const Question& question(std::string_view id) const;
    /// Agenda topic names flattened in temporal order.
    std::vector<std::string> agenda_order() const;

private:
    std::string script_id_;
    std::vector<Topic> topics_;
    ScriptConfig config_;
    std::map<std::string, Question> questions_;
    std::map<std::string, persona::ResponseTemplate> templates_;
    fsm::CompiledMatcher matcher_;
    std::unordered_map<std::string, std::uint32_t> topic_index_;
    std::unordered_map<std::string, UnitRef> unit_index_;
};

inline constexpr std::string_view kFallbackTopic = "builtin-fallback";
inline constexpr std::string_view kNumCandidatesFunction = "answer-num-candidates";

} // namespace rep::dialogue
