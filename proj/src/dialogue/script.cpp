#include "rep/dialogue/script.hpp"

#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "rep/common/error.hpp"

namespace rep::dialogue {

namespace {

using nlohmann::json;

const json& need(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw SchemaError(where + ": missing field '" + key + "'");
    return j.at(key);
}

std::string need_string(const json& j, const char* key, const std::string& where) {
    const auto& v = need(j, key, where);
    if (!v.is_string()) throw SchemaError(where + ": field '" + key + "' must be a string");
    return v.get<std::string>();
}

Predicate parse_predicate(const std::string& text, const std::string& where) {
    Predicate p;
    p.text = text;
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    const std::string arg = colon == std::string::npos ? std::string() : text.substr(colon + 1);
    if (head == "answered" && !arg.empty()) p.kind = Predicate::Kind::answered;
    else if (head == "activated" && !arg.empty()) p.kind = Predicate::Kind::activated;
    else if (text == "agenda-complete") p.kind = Predicate::Kind::agenda_complete;
    else if (text == "no-pending") p.kind = Predicate::Kind::no_pending;
    else throw SchemaError(where + ": unknown predicate '" + text + "'");
    p.arg = arg;
    return p;
}

Trigger parse_trigger(const json& j, const std::string& where) {
    Trigger t;
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "chat-begin") t.kind = Trigger::Kind::chat_begin;
        else if (s == "always") t.kind = Trigger::Kind::always;
        else throw SchemaError(where + ": unknown trigger '" + s + "'");
    } else if (j.is_object() && j.contains("pattern")) {
        t.kind = Trigger::Kind::pattern;
        t.pattern_id = need_string(j, "pattern", where);
    } else if (j.is_object() && j.contains("predicate")) {
        t.kind = Trigger::Kind::predicate;
        t.predicate = parse_predicate(need_string(j, "predicate", where), where);
    } else {
        throw SchemaError(where + ": malformed trigger");
    }
    return t;
}

Action parse_action(const json& j, const std::string& where) {
    Action a;
    if (!j.is_object() || j.size() != 1) throw SchemaError(where + ": an action is a single-key object");
    const auto& [key, value] = *j.items().begin();
    if (key == "widget") {
        if (!value.is_object() || !value.contains("type")) throw SchemaError(where + ": widget needs a type");
        a.kind = Action::Kind::widget;
        a.widget = value;
        return a;
    }
    if (!value.is_string()) throw SchemaError(where + ": action '" + key + "' takes a string");
    a.ref = value.get<std::string>();
    if (key == "say") a.kind = Action::Kind::say;
    else if (key == "ask") a.kind = Action::Kind::ask;
    else if (key == "call") a.kind = Action::Kind::call;
    else throw SchemaError(where + ": unknown action '" + key + "'");
    return a;
}

Question parse_question(const std::string& id, const json& j) {
    const std::string where = "question " + id;
    Question q;
    q.question_id = id;
    const auto type = need_string(j, "type", where);
    q.heading = need_string(j, "heading", where);
    q.measure = j.value("measure", std::string());
    q.reverse_keyed = j.value("reverse_keyed", false);
    if (type == "open_ended") {
        q.type = QuestionType::open_ended;
    } else if (type == "likert") {
        q.type = QuestionType::likert;
        q.points = need(j, "points", where).get<int>();
        if (q.points != 5 && q.points != 7) throw SchemaError(where + ": likert points must be 5 or 7");
    } else if (type == "single_choice") {
        q.type = QuestionType::single_choice;
        std::set<int> values;
        for (const auto& o : need(j, "options", where)) {
            q.options.push_back({need_string(o, "label", where), need(o, "value", where).get<int>()});
            if (!values.insert(q.options.back().value).second) throw SchemaError(where + ": duplicate option value");
        }
        if (q.options.size() < 2) throw SchemaError(where + ": single_choice needs at least two options");
    } else if (type == "link") {
        q.type = QuestionType::link;
        q.url = need_string(j, "url", where);
        q.tracked = j.value("tracked", true);
    } else {
        throw SchemaError(where + ": unknown question type '" + type + "'");
    }
    return q;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFound("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

std::shared_ptr<const InterviewScript> InterviewScript::parse(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("script: ") + e.what());
    }

    auto s = std::make_shared<InterviewScript>();
    try {
        s->script_id_ = need_string(doc, "script_id", "script");

        // templates, with the built-in fallbacks added when absent
        if (doc.contains("templates")) s->templates_ = persona::parse_templates(doc.dump());
        auto add_builtin = [&](const std::string& id, std::vector<std::string> alts) {
            if (!s->templates_.count(id)) s->templates_.emplace(id, persona::ResponseTemplate{id, std::move(alts)});
        };
        add_builtin(std::string(kFallbackTopic),
                    {"Sorry, I did not quite get that. Could you put it another way?",
                     "I did not understand that. Please rephrase."});
        add_builtin(std::string(kNumCandidatesFunction),
                    {"Quite a few people have applied, but I cannot share the exact number."});

        std::vector<fsm::PatternSource> patterns;
        if (doc.contains("patterns"))
            for (const auto& [id, text] : doc.at("patterns").items())
                patterns.push_back({id, text.get<std::string>()});
        s->matcher_ = fsm::compile(patterns, [](std::string_view t) { return fsm::lemmatize(t); });

        if (doc.contains("questions"))
            for (const auto& [id, q] : doc.at("questions").items()) {
                auto parsed = parse_question(id, q);
                if (!s->templates_.count(parsed.heading))
                    throw DanglingRef("question " + id + ": unknown heading template '" + parsed.heading + "'");
                s->questions_.emplace(id, std::move(parsed));
            }

        const auto& cfg = doc.contains("config") ? doc.at("config") : json::object();
        auto& config = s->config_;
        config.chain_limit = cfg.value("chain_limit", 3u);
        config.default_fallback = cfg.value("default_fallback", true);
        if (cfg.contains("functions"))
            for (const auto& [name, tmpl] : cfg.at("functions").items()) {
                config.functions[name] = tmpl.get<std::string>();
                if (!s->templates_.count(config.functions[name]))
                    throw DanglingRef("function " + name + ": unknown template '" + config.functions[name] + "'");
            }
        if (cfg.contains("agenda"))
            for (const auto& entry : cfg.at("agenda")) {
                if (entry.is_string()) config.agenda.push_back({entry.get<std::string>()});
                else config.agenda.push_back(need(entry, "unordered", "agenda").get<std::vector<std::string>>());
            }
        if (cfg.contains("sidetalk"))
            for (const auto& entry : cfg.at("sidetalk")) {
                if (entry.is_string()) config.sidetalk.push_back(entry.get<std::string>());
                else
                    for (const auto& n : need(entry, "unordered", "sidetalk"))
                        config.sidetalk.push_back(n.get<std::string>());
            }
        config.error_handling = cfg.value("error_handling", std::vector<std::string>{});

        for (const auto& t : need(doc, "topics", "script")) {
            Topic topic;
            topic.name = need_string(t, "name", "topic");
            const std::string where = "topic " + topic.name;
            const auto init = t.value("initiator", std::string("proactive"));
            if (init == "proactive") topic.initiator = Initiator::proactive;
            else if (init == "reactive") topic.initiator = Initiator::reactive;
            else if (init == "mixed") topic.initiator = Initiator::mixed;
            else throw SchemaError(where + ": unknown initiator '" + init + "'");
            if (t.contains("exit")) topic.exit = parse_predicate(t.at("exit").get<std::string>(), where);
            for (const auto& u : need(t, "units", where)) {
                SemanticUnit unit;
                unit.unit_id = need_string(u, "id", where);
                const std::string uw = "unit " + unit.unit_id;
                unit.trigger = parse_trigger(need(u, "trigger", uw), uw);
                for (const auto& a : need(u, "response", uw)) unit.response.push_back(parse_action(a, uw));
                if (unit.response.empty()) throw SchemaError(uw + ": empty response");
                unit.reusable = u.value("reusable", false);
                unit.subtopic = u.value("subtopic", std::string());
                topic.units.push_back(std::move(unit));
            }
            if (topic.units.empty()) throw SchemaError(where + ": no units");
            if (s->topic_index_.count(topic.name)) throw SchemaError("duplicate topic " + topic.name);
            s->topic_index_.emplace(topic.name, static_cast<std::uint32_t>(s->topics_.size()));
            s->topics_.push_back(std::move(topic));
        }

        if (config.error_handling.empty() && config.default_fallback) {
            Topic fb;
            fb.name = std::string(kFallbackTopic);
            fb.initiator = Initiator::reactive;
            fb.importance = Importance::error_handling;
            fb.units.push_back({std::string(kFallbackTopic), Trigger{}, {Action{Action::Kind::say, fb.name, {}}}, true, {}});
            s->topic_index_.emplace(fb.name, static_cast<std::uint32_t>(s->topics_.size()));
            s->topics_.push_back(std::move(fb));
            config.error_handling.push_back(std::string(kFallbackTopic));
        }
    } catch (const json::exception& e) {
        throw SchemaError(std::string("script: ") + e.what());
    }

    // cross references
    for (std::uint32_t ti = 0; ti < s->topics_.size(); ++ti) {
        const auto& topic = s->topics_[ti];
        for (std::uint32_t ui = 0; ui < topic.units.size(); ++ui) {
            const auto& u = topic.units[ui];
            if (!s->unit_index_.emplace(u.unit_id, UnitRef{ti, ui}).second)
                throw SchemaError("duplicate unit id " + u.unit_id);
        }
    }
    auto check_predicate = [&](const Predicate& p, const std::string& where) {
        if (p.kind == Predicate::Kind::answered && !s->questions_.count(p.arg))
            throw DanglingRef(where + ": unknown question '" + p.arg + "'");
        if (p.kind == Predicate::Kind::activated && !s->unit_index_.count(p.arg))
            throw DanglingRef(where + ": unknown unit '" + p.arg + "'");
    };
    for (auto& topic : s->topics_) {
        if (topic.exit) check_predicate(*topic.exit, "topic " + topic.name);
        for (auto& u : topic.units) {
            const std::string where = "unit " + u.unit_id;
            if (u.trigger.kind == Trigger::Kind::pattern) {
                u.trigger.pattern_index = s->matcher_.pattern_index(u.trigger.pattern_id);
                if (u.trigger.pattern_index < 0)
                    throw DanglingRef(where + ": unknown pattern '" + u.trigger.pattern_id + "'");
            }
            if (u.trigger.kind == Trigger::Kind::predicate) check_predicate(u.trigger.predicate, where);
            if (!u.subtopic.empty() && !s->topic_index_.count(u.subtopic))
                throw DanglingRef(where + ": unknown subtopic '" + u.subtopic + "'");
            for (const auto& a : u.response) {
                if (a.kind == Action::Kind::say && !s->templates_.count(a.ref))
                    throw DanglingRef(where + ": unknown template '" + a.ref + "'");
                if (a.kind == Action::Kind::ask && !s->questions_.count(a.ref))
                    throw DanglingRef(where + ": unknown question '" + a.ref + "'");
                if (a.kind == Action::Kind::call && !s->config_.functions.count(a.ref) &&
                    a.ref != kNumCandidatesFunction)
                    throw DanglingRef(where + ": unknown function '" + a.ref + "'");
            }
        }
    }

    // subtopic graph must be acyclic
    {
        std::vector<int> color(s->topics_.size(), 0);
        std::function<void(std::uint32_t)> visit = [&](std::uint32_t t) {
            color[t] = 1;
            for (const auto& u : s->topics_[t].units) {
                if (u.subtopic.empty()) continue;
                const auto c = s->topic_index_.at(u.subtopic);
                if (color[c] == 1)
                    throw CycleError("subtopic cycle through " + s->topics_[t].name + " -> " + u.subtopic);
                if (color[c] == 0) visit(c);
            }
            color[t] = 2;
        };
        for (std::uint32_t t = 0; t < s->topics_.size(); ++t)
            if (color[t] == 0) visit(t);
    }

    // every topic lives in exactly one importance class
    std::vector<int> placed(s->topics_.size(), 0);
    auto place = [&](const std::string& name, Importance imp, std::uint32_t group) {
        auto it = s->topic_index_.find(name);
        if (it == s->topic_index_.end()) throw DanglingRef("config: unknown topic '" + name + "'");
        if (placed[it->second]++) throw SchemaError("topic " + name + " appears in more than one class");
        s->topics_[it->second].importance = imp;
        s->topics_[it->second].group = group;
    };
    for (std::uint32_t g = 0; g < s->config_.agenda.size(); ++g)
        for (const auto& n : s->config_.agenda[g]) place(n, Importance::agenda, g);
    for (const auto& n : s->config_.sidetalk) place(n, Importance::sidetalk, 0);
    for (const auto& n : s->config_.error_handling) place(n, Importance::error_handling, 0);
    for (const auto& topic : s->topics_)
        for (const auto& u : topic.units)
            if (!u.subtopic.empty()) {
                const auto c = s->topic_index_.at(u.subtopic);
                if (placed[c] > 0 && s->topics_[c].importance != Importance::subtopic)
                    throw SchemaError("topic " + u.subtopic + " is both a subtopic and in the config");
                placed[c] = -1;
                s->topics_[c].importance = Importance::subtopic;
            }
    for (std::uint32_t t = 0; t < s->topics_.size(); ++t) {
        if (placed[t] == 0) throw SchemaError("topic " + s->topics_[t].name + " is not placed in the config");
        if (s->topics_[t].importance == Importance::error_handling)
            for (auto& u : s->topics_[t].units) u.reusable = true;
    }
    return s;
}

std::shared_ptr<const InterviewScript> InterviewScript::load(const std::string& path) {
    return parse(read_file(path));
}

const Topic& InterviewScript::topic(std::string_view name) const {
    auto it = topic_index_.find(std::string(name));
    if (it == topic_index_.end()) throw NotFound("unknown topic " + std::string(name));
    return topics_[it->second];
}

std::optional<std::uint32_t> InterviewScript::topic_index(std::string_view name) const {
    auto it = topic_index_.find(std::string(name));
    if (it == topic_index_.end()) return std::nullopt;
    return it->second;
}

UnitRef InterviewScript::unit_ref(std::string_view unit_id) const {
    auto it = unit_index_.find(std::string(unit_id));
    if (it == unit_index_.end()) throw NotFound("unknown unit " + std::string(unit_id));
    return it->second;
}

const Question& InterviewScript::question(std::string_view id) const {
    auto it = questions_.find(std::string(id));
    if (it == questions_.end()) throw NotFound("unknown question " + std::string(id));
    return it->second;
}

std::vector<std::string> InterviewScript::agenda_order() const {
    std::vector<std::string> out;
    for (const auto& g : config_.agenda) out.insert(out.end(), g.begin(), g.end());
    return out;
}

} // namespace rep::dialogue
