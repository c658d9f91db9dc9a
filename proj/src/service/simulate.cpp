#include "rep/service/simulate.hpp"

#include <cmath>
#include <fstream>

#include "rep/common/error.hpp"

namespace rep::service {

using nlohmann::json;
using nlohmann::ordered_json;

UserProfile UserProfile::from_json(const json& j) {
    try {
        UserProfile u;
        u.texts = j.value("texts", std::map<std::string, std::string>{});
        u.choices = j.value("choices", std::map<std::string, int>{});
        for (const auto& i : j.value("interjections", json::array()))
            u.interjections.push_back({i.at("before").get<std::string>(), i.at("text").get<std::string>()});
        for (const auto& c : j.value("clicks", json::array())) u.clicks.insert(c.get<std::string>());
        u.default_text = j.value("default_text", u.default_text);
        u.idle_text = j.value("idle_text", u.idle_text);
        return u;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("user profile: ") + e.what());
    }
}

UserProfile UserProfile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw NotFound("cannot open " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw FormatError("user profile " + path + " is not JSON");
    return from_json(j);
}

SimulationResult simulate(Service& svc, const UserProfile& user, const std::string& script_id,
                          const std::string& persona_id, std::size_t max_messages) {
    auto turn = svc.create_session(script_id, persona_id);
    SimulationResult out;
    out.session_id = turn.session_id;
    std::set<std::size_t> used;
    while (turn.status == SessionStatus::active && out.messages < max_messages) {
        const ordered_json* question = nullptr;
        for (const auto& r : turn.replies) {
            if (!r.contains("widget") || !r["widget"].is_object()) continue;
            const auto& w = r["widget"];
            if (w.value("type", "") == "link") {
                if (user.clicks.count(w.value("link_id", "")) && w.contains("href")) {
                    const std::string href = w["href"];
                    svc.track_click(out.session_id, href.substr(href.rfind('/') + 1));
                }
                continue;
            }
            question = &w;
        }

        dialogue::UserEvent ev = dialogue::UserEvent::say(user.idle_text);
        if (question) {
            const std::string qid = (*question)["question_id"];
            bool interjected = false;
            for (std::size_t k = 0; k < user.interjections.size(); ++k)
                if (!used.count(k) && user.interjections[k].before == qid) {
                    used.insert(k);
                    ev = dialogue::UserEvent::say(user.interjections[k].text);
                    interjected = true;
                    break;
                }
            if (!interjected) {
                const std::string type = (*question)["type"];
                if (type == "text") {
                    auto it = user.texts.find(qid);
                    ev = dialogue::UserEvent::say(it == user.texts.end() ? user.default_text : it->second);
                } else {
                    int v = 0;
                    if (auto it = user.choices.find(qid); it != user.choices.end()) {
                        v = it->second;
                    } else if (type == "likert") {
                        v = ((*question)["points"].get<int>() + 1) / 2;
                    } else {
                        const auto& opts = (*question)["options"];
                        v = opts[opts.size() / 2]["value"].get<int>();
                    }
                    ev = dialogue::UserEvent::answer(qid, v);
                }
            }
        }
        turn = svc.post_message(out.session_id, ev);
        ++out.messages;
    }
    out.completed = turn.status == SessionStatus::completed;
    return out;
}

ordered_json golden_view(Service& svc, const std::string& session_id) {
    auto t = svc.transcript(session_id);
    t.erase("session_id");
    ordered_json lines = ordered_json::array();
    for (const auto& rec : t["events"]) {
        const auto& p = rec["payload"];
        if (rec["kind"] == "rep_msg") {
            ordered_json r = {{"rep", p.value("text", "")}};
            if (p.contains("widget") && p["widget"].is_object()) {
                auto w = p["widget"];
                w.erase("href");  // carries the random session id
                r["widget"] = w;
            }
            lines.push_back(r);
        } else {
            lines.push_back({{rec["kind"].get<std::string>(), p["event"]}});
        }
    }
    ordered_json g;
    g["script_id"] = t["script_id"];
    g["persona_id"] = t["persona_id"];
    g["status"] = t["status"];
    g["transcript"] = lines;
    if (svc.meta(session_id).status == SessionStatus::completed) {
        auto rep = svc.get_report(session_id).to_json();
        rep.erase("session_id");
        if (rep.contains("traits"))
            for (auto& tr : rep["traits"])
                for (const char* k : {"theta", "sd"})
                    if (tr.contains(k)) tr[k] = std::round(tr[k].get<double>() * 1e6) / 1e6;
        g["report"] = rep;
    }
    return g;
}

} // namespace rep::service
