#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

namespace gen {

inline const std::vector<std::string> kCueWords = {"alpha", "bravo", "charlie", "delta", "echo"};

struct ScriptOptions {
    bool only_satisfiable = false;  ///< agenda triggers limited to always / pattern / no-pending
    bool with_error_topic = true;
};

// Small random scripts over a fixed cue vocabulary. Each cue word w has the
// pattern id "p_<w>".
inline nlohmann::json random_script(std::mt19937_64& rng, const ScriptOptions& opt = {}) {
    using nlohmann::json;
    auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
    auto chance = [&](double p) { return std::bernoulli_distribution(p)(rng); };

    json doc;
    doc["script_id"] = "random";
    for (const auto& w : kCueWords) doc["patterns"]["p_" + w] = w;
    doc["templates"]["say"] = {"Noted.", "Noted!", "Okay :)"};
    doc["templates"]["ask"] = {"Tell me something?"};
    doc["templates"]["rate"] = {"Rate it."};

    int q_count = 0, u_count = 0, t_count = 0;
    json topics = json::array();
    std::vector<std::string> questions;

    std::function<std::string(int, bool)> make_topic = [&](int depth, bool agenda) -> std::string {
        const std::string name = "topic" + std::to_string(t_count++);
        json t;
        t["name"] = name;
        t["units"] = json::array();
        const int n_units = 1 + pick(3);
        for (int k = 0; k < n_units; ++k) {
            json u;
            u["id"] = "u" + std::to_string(u_count++);
            int kind = pick(10);
            if (opt.only_satisfiable && agenda) kind = std::min(kind, 7);
            if (kind < 4) u["trigger"] = "always";
            else if (kind < 7) u["trigger"] = {{"pattern", "p_" + kCueWords[pick(5)]}};
            else if (kind < 8) u["trigger"] = {{"predicate", "no-pending"}};
            else if (kind < 9) u["trigger"] = "chat-begin";
            else if (!questions.empty()) u["trigger"] = {{"predicate", "answered:" + questions[pick(static_cast<int>(questions.size()))]}};
            else u["trigger"] = "always";
            json resp = json::array();
            if (chance(0.5)) resp.push_back({{"say", "say"}});
            if (chance(0.5) || resp.empty()) {
                const std::string q = "q" + std::to_string(q_count++);
                if (chance(0.5)) doc["questions"][q] = {{"type", "open_ended"}, {"heading", "ask"}};
                else doc["questions"][q] = {{"type", "likert"}, {"heading", "rate"}, {"points", 5}};
                questions.push_back(q);
                resp.push_back({{"ask", q}});
            }
            u["response"] = resp;
            if (!opt.only_satisfiable && chance(0.1)) u["reusable"] = true;
            if (depth < 2 && chance(0.25)) u["subtopic"] = make_topic(depth + 1, false);
            t["units"].push_back(u);
        }
        topics.push_back(t);
        return name;
    };

    json agenda = json::array(), sidetalk = json::array(), errors = json::array();
    const int n_agenda = 1 + pick(3);
    for (int i = 0; i < n_agenda; ++i) {
        if (i > 0 && chance(0.3)) {
            json group = json::array({make_topic(0, true), make_topic(0, true)});
            agenda.push_back({{"unordered", group}});
        } else {
            agenda.push_back(make_topic(0, true));
        }
    }
    const int n_side = pick(3);
    for (int i = 0; i < n_side; ++i) sidetalk.push_back(make_topic(0, false));
    if (opt.with_error_topic) {
        const std::string name = "topic" + std::to_string(t_count++);
        topics.push_back({{"name", name},
                          {"units", json::array({{{"id", "u" + std::to_string(u_count++)},
                                                  {"trigger", "always"},
                                                  {"response", json::array({{{"say", "say"}}})}}})}});
        errors.push_back(name);
    }
    if (!doc.contains("questions")) doc["questions"] = json::object();
    doc["topics"] = topics;
    doc["config"] = {{"agenda", agenda}, {"sidetalk", sidetalk}, {"error_handling", errors}};
    return doc;
}

} // namespace gen
