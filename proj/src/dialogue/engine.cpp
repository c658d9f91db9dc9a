#include "rep/dialogue/engine.hpp"

#include <algorithm>

#include "rep/common/error.hpp"

namespace rep::dialogue {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

bool was_activated(const SessionState& s, const SemanticUnit& u) {
    if (s.activated.count(u.unit_id)) return true;
    return u.reusable && std::find(s.activation_log.begin(), s.activation_log.end(), u.unit_id) != s.activation_log.end();
}

bool eval(const InterviewScript& script, const SessionState& s, const Predicate& p) {
    switch (p.kind) {
    case Predicate::Kind::answered: return s.answers.count(p.arg) > 0;
    case Predicate::Kind::activated: return was_activated(s, script.unit(script.unit_ref(p.arg)));
    case Predicate::Kind::agenda_complete: return is_complete(script, s);
    case Predicate::Kind::no_pending: return !s.pending.has_value();
    }
    return false;
}

bool fires(const InterviewScript& script, const SessionState& s, const Topic& topic, const SemanticUnit& u,
           Context ctx, const std::set<std::uint32_t>& hits) {
    const bool error_class = topic.importance == Importance::error_handling;
    const auto kind = u.trigger.kind;
    switch (ctx) {
    case Context::chat_begin:
        if (error_class || kind == Trigger::Kind::pattern) return false;
        break;
    case Context::text:
        if (kind == Trigger::Kind::chat_begin) return false;
        break;
    case Context::pending_text:
        if (!error_class && kind != Trigger::Kind::pattern) return false;
        if (kind == Trigger::Kind::chat_begin) return false;
        break;
    case Context::answered:
        if (error_class || kind == Trigger::Kind::pattern || kind == Trigger::Kind::chat_begin) return false;
        break;
    case Context::proactive:
        if (topic.importance != Importance::agenda && topic.importance != Importance::subtopic) return false;
        if (kind == Trigger::Kind::pattern || kind == Trigger::Kind::chat_begin) return false;
        break;
    }
    switch (kind) {
    case Trigger::Kind::chat_begin: return ctx == Context::chat_begin;
    case Trigger::Kind::pattern: return hits.count(static_cast<std::uint32_t>(u.trigger.pattern_index)) > 0;
    case Trigger::Kind::predicate: return eval(script, s, u.trigger.predicate);
    case Trigger::Kind::always: return true;
    }
    return false;
}

std::uint32_t agenda_cursor(const InterviewScript& script, const SessionState& s) {
    const auto& groups = script.config().agenda;
    for (std::uint32_t g = 0; g < groups.size(); ++g)
        for (const auto& name : groups[g])
            for (const auto& u : script.topic(name).units)
                if (!was_activated(s, u)) return g;
    return static_cast<std::uint32_t>(groups.size());
}

void settle_stack(const InterviewScript& script, SessionState& s) {
    while (!s.subtopic_stack.empty()) {
        const auto& top = script.topic(s.subtopic_stack.back());
        bool done = top.exit && eval(script, s, *top.exit);
        if (!done)
            done = std::all_of(top.units.begin(), top.units.end(),
                               [&](const SemanticUnit& u) { return u.reusable || s.activated.count(u.unit_id); });
        if (!done) break;
        s.subtopic_stack.pop_back();
    }
}

json widget_for(const Question& q) {
    switch (q.type) {
    case QuestionType::open_ended: return {{"type", "text"}, {"question_id", q.question_id}};
    case QuestionType::likert: return {{"type", "likert"}, {"question_id", q.question_id}, {"points", q.points}};
    case QuestionType::single_choice: {
        json opts = json::array();
        for (const auto& o : q.options) opts.push_back({{"label", o.label}, {"value", o.value}});
        return {{"type", "single_choice"}, {"question_id", q.question_id}, {"options", opts}};
    }
    case QuestionType::link:
        return {{"type", "link"}, {"link_id", q.question_id}, {"url", q.url}, {"tracked", q.tracked}};
    }
    return nullptr;
}

class Turn {
public:
    Turn(const InterviewScript& script, const persona::Persona& persona, SessionState state)
        : script_(script), persona_(persona) {
        result_.state = std::move(state);
    }

    SessionState& state() { return result_.state; }

    std::string render(const std::string& template_id) {
        persona::Slots slots{{"persona", persona_.name}};
        for (const auto& [q, a] : state().answers) slots["answer." + q] = a;
        const std::uint64_t seed =
            persona::splitmix64(state().seed ^ (std::uint64_t{state().turn} << 20) ^ result_.replies.size());
        return persona::render(script_.templates().at(template_id), persona_, slots, seed);
    }

    void present(const Question& q, const std::string& unit_id) {
        Reply r;
        r.kind = Reply::Kind::question;
        r.text = render(q.heading);
        r.unit_id = unit_id;
        r.question_id = q.question_id;
        r.widget = widget_for(q);
        result_.replies.push_back(std::move(r));
    }

    void activate(UnitRef ref) {
        const auto& u = script_.unit(ref);
        auto& s = state();
        s.activation_log.push_back(u.unit_id);
        if (!u.reusable) s.activated.insert(u.unit_id);
        result_.activated.push_back(u.unit_id);
        for (const auto& a : u.response) {
            switch (a.kind) {
            case Action::Kind::say:
                result_.replies.push_back({Reply::Kind::say, render(a.ref), u.unit_id, {}, nullptr});
                break;
            case Action::Kind::call: {
                auto it = script_.config().functions.find(a.ref);
                const std::string tmpl = it != script_.config().functions.end() ? it->second : a.ref;
                result_.replies.push_back({Reply::Kind::say, render(tmpl), u.unit_id, {}, nullptr});
                break;
            }
            case Action::Kind::widget:
                result_.replies.push_back({Reply::Kind::say, {}, u.unit_id, {}, a.widget});
                break;
            case Action::Kind::ask: {
                const auto& q = script_.question(a.ref);
                present(q, u.unit_id);
                if (q.type != QuestionType::link) s.pending = PendingQuestion{q.question_id, u.unit_id};
                break;
            }
            }
        }
        if (!u.subtopic.empty()) s.subtopic_stack.push_back(u.subtopic);
        settle();
    }

    void settle() {
        settle_stack(script_, state());
        state().agenda_cursor = agenda_cursor(script_, state());
    }

    bool activate_best(Context ctx, const std::set<std::uint32_t>& hits) {
        const auto c = candidate_units(script_, state(), ctx, hits);
        if (c.empty()) return false;
        activate(c.front().ref);
        return true;
    }

    void chain() {
        for (std::uint32_t k = 0; k < script_.config().chain_limit && !state().pending; ++k)
            if (!activate_best(Context::proactive, {})) break;
    }

    StepResult finish() {
        ++result_.state.turn;
        return std::move(result_);
    }

private:
    const InterviewScript& script_;
    const persona::Persona& persona_;
    StepResult result_;
};

std::set<std::uint32_t> pattern_hits(const InterviewScript& script, std::string_view text) {
    std::set<std::uint32_t> hits;
    const auto& m = script.matcher();
    if (m.pattern_count() == 0) return hits;
    const auto tokens = m.intern_text(text);
    m.scan(std::span<const fsm::SymbolId>(tokens), [&](std::uint32_t p, std::uint32_t, std::uint32_t) { hits.insert(p); });
    return hits;
}

void validate_widget_answer(const Question& q, int value) {
    switch (q.type) {
    case QuestionType::likert:
        if (value < 1 || value > q.points)
            throw ValidationError("answer to " + q.question_id + " must be within 1.." + std::to_string(q.points));
        return;
    case QuestionType::single_choice:
        for (const auto& o : q.options)
            if (o.value == value) return;
        throw ValidationError("answer to " + q.question_id + " is not one of its options");
    default:
        throw ValidationError("question " + q.question_id + " expects a text answer");
    }
}

} // namespace

RankKey rank_key(const InterviewScript& script, const SessionState&, UnitRef ref) {
    const auto& t = script.topics()[ref.topic];
    std::uint32_t cls = 0;
    switch (t.importance) {
    case Importance::subtopic: cls = 0; break;
    case Importance::agenda: cls = 1; break;
    case Importance::sidetalk: cls = 2; break;
    case Importance::error_handling: cls = 3; break;
    }
    return {cls, t.group, ref.topic, ref.unit};
}

std::vector<Candidate> candidate_units(const InterviewScript& script, const SessionState& state, Context ctx,
                                       const std::set<std::uint32_t>& hits) {
    std::vector<Candidate> out;
    const std::string* top = state.subtopic_stack.empty() ? nullptr : &state.subtopic_stack.back();
    for (std::uint32_t ti = 0; ti < script.topics().size(); ++ti) {
        const auto& topic = script.topics()[ti];
        if (topic.importance == Importance::subtopic && (!top || *top != topic.name)) continue;
        for (std::uint32_t ui = 0; ui < topic.units.size(); ++ui) {
            const auto& u = topic.units[ui];
            if (!u.reusable && state.activated.count(u.unit_id)) continue;
            if (!fires(script, state, topic, u, ctx, hits)) continue;
            out.push_back({{ti, ui}, rank_key(script, state, {ti, ui})});
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) { return a.key < b.key; });
    return out;
}

bool is_complete(const InterviewScript& script, const SessionState& state) {
    for (const auto& name : script.agenda_order())
        for (const auto& u : script.topic(name).units)
            if (!was_activated(state, u)) return false;
    return true;
}

SessionState initial_state(std::uint64_t seed) {
    SessionState s;
    s.seed = seed;
    return s;
}

StepResult step(const InterviewScript& script, const persona::Persona& persona, const SessionState& state,
                const UserEvent& event) {
    if (event.kind == UserEvent::Kind::link_click) {
        auto it = script.questions().find(event.question_id);
        if (it == script.questions().end() || it->second.type != QuestionType::link)
            throw NotFound("unknown link " + event.question_id);
        StepResult r{state, {}, {}};
        if (!it->second.measure.empty()) r.state.outcomes[it->second.measure] = 1;
        return r;
    }
    if (is_complete(script, state) && state.turn > 0) throw Conflict("the interview is already complete");

    Turn turn(script, persona, state);
    auto& s = turn.state();
    switch (event.kind) {
    case UserEvent::Kind::chat_begin:
        if (state.turn != 0) throw ValidationError("the chat has already begun");
        turn.activate_best(Context::chat_begin, {});
        break;

    case UserEvent::Kind::widget_answer: {
        if (!s.pending || s.pending->question_id != event.question_id)
            throw ValidationError("question " + event.question_id + " is not awaiting an answer");
        const auto& q = script.question(event.question_id);
        validate_widget_answer(q, event.value);
        s.answers[q.question_id] = std::to_string(event.value);
        if (!q.measure.empty()) s.outcomes[q.measure] = event.value;
        s.pending.reset();
        turn.settle();
        turn.activate_best(Context::answered, {});
        break;
    }

    case UserEvent::Kind::text: {
        if (event.text.find_first_not_of(" \t\r\n") == std::string::npos)
            throw ValidationError("empty message");
        const auto hits = pattern_hits(script, event.text);
        if (!s.pending) {
            if (!turn.activate_best(Context::text, hits)) throw NoCandidate("no unit can respond to this message");
            break;
        }
        const PendingQuestion pending = *s.pending;
        const auto& q = script.question(pending.question_id);
        const auto answer_key = rank_key(script, s, script.unit_ref(pending.unit_id));
        const auto cands = candidate_units(script, s, Context::pending_text, hits);
        const Candidate* reactive = nullptr;
        const Candidate* fallback = nullptr;
        for (const auto& c : cands) {
            const bool error_class = c.key.cls == 3;
            if (!error_class && !reactive) reactive = &c;
            if (error_class && !fallback) fallback = &c;
        }
        if (reactive && reactive->key.cls <= answer_key.cls) {
            turn.activate(reactive->ref);
        } else if (q.type == QuestionType::open_ended) {
            s.answers[q.question_id] = event.text;
            s.pending.reset();
            turn.settle();
            turn.activate_best(Context::answered, {});
            break;
        } else if (fallback) {
            turn.activate(fallback->ref);
        } else {
            throw NoCandidate("question " + q.question_id + " needs a widget answer");
        }
        // the question is still open: ask it again unless the reply asked something new
        if (s.pending == pending) turn.present(q, pending.unit_id);
        break;
    }

    case UserEvent::Kind::link_click: break;
    }
    turn.chain();
    return turn.finish();
}

ordered_json UserEvent::to_json() const {
    ordered_json j;
    switch (kind) {
    case Kind::chat_begin: j["kind"] = "chat_begin"; break;
    case Kind::text: j["kind"] = "text"; j["text"] = text; break;
    case Kind::widget_answer:
        j["kind"] = "widget_answer";
        j["question_id"] = question_id;
        j["value"] = value;
        break;
    case Kind::link_click: j["kind"] = "link_click"; j["link_id"] = question_id; break;
    }
    return j;
}

UserEvent UserEvent::from_json(const json& j) {
    try {
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "chat_begin") return begin();
        if (kind == "text") return say(j.at("text").get<std::string>());
        if (kind == "widget_answer") return answer(j.at("question_id").get<std::string>(), j.at("value").get<int>());
        if (kind == "link_click") return click(j.at("link_id").get<std::string>());
        throw ValidationError("unknown event kind " + kind);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed event: ") + e.what());
    }
}

ordered_json SessionState::to_json() const {
    ordered_json j;
    j["seed"] = seed;
    j["turn"] = turn;
    j["activated"] = activated;
    j["activation_log"] = activation_log;
    j["subtopic_stack"] = subtopic_stack;
    j["agenda_cursor"] = agenda_cursor;
    if (pending) j["pending"] = {{"question_id", pending->question_id}, {"unit_id", pending->unit_id}};
    else j["pending"] = nullptr;
    j["answers"] = answers;
    j["outcomes"] = outcomes;
    return j;
}

SessionState SessionState::from_json(const json& j) {
    try {
        SessionState s;
        s.seed = j.at("seed").get<std::uint64_t>();
        s.turn = j.at("turn").get<std::uint32_t>();
        s.activated = j.at("activated").get<std::set<std::string>>();
        s.activation_log = j.at("activation_log").get<std::vector<std::string>>();
        s.subtopic_stack = j.at("subtopic_stack").get<std::vector<std::string>>();
        s.agenda_cursor = j.at("agenda_cursor").get<std::uint32_t>();
        if (!j.at("pending").is_null())
            s.pending = PendingQuestion{j.at("pending").at("question_id").get<std::string>(),
                                        j.at("pending").at("unit_id").get<std::string>()};
        s.answers = j.at("answers").get<std::map<std::string, std::string>>();
        s.outcomes = j.at("outcomes").get<std::map<std::string, int>>();
        return s;
    } catch (const json::exception& e) {
        throw FormatError(std::string("session state: ") + e.what());
    }
}

ordered_json Reply::to_json() const {
    ordered_json j;
    j["kind"] = kind == Kind::say ? "say" : "question";
    j["text"] = text;
    j["unit_id"] = unit_id;
    if (!question_id.empty()) j["question_id"] = question_id;
    if (!widget.is_null()) j["widget"] = widget;
    return j;
}

} // namespace rep::dialogue
