#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "rep/service/service.hpp"

namespace rep::service {

/// Scripted interviewee used by the demo and the end-to-end tests.
struct UserProfile {
    /// Free-text answers keyed by question id; `default_text` otherwise.
    std::map<std::string, std::string> texts;
    /// Widget answers keyed by question id; the middle option otherwise.
    std::map<std::string, int> choices;
    struct Interjection {
        std::string before;  ///< question id it precedes
        std::string text;
    };
    std::vector<Interjection> interjections;
    std::set<std::string> clicks;  ///< link ids to follow
    std::string default_text = "I think so.";
    std::string idle_text = "Okay.";

    static UserProfile from_json(const nlohmann::json& j);
    static UserProfile load(const std::string& path);
};

struct SimulationResult {
    std::string session_id;
    std::size_t messages = 0;
    bool completed = false;
};

/// Drives one session to completion, or until `max_messages` user turns.
SimulationResult simulate(Service& svc, const UserProfile& user, const std::string& script_id = {},
                          const std::string& persona_id = {}, std::size_t max_messages = 400);

/// Transcript without timestamps and trait estimates rounded to 1e-6, for
/// byte-stable comparison.
nlohmann::ordered_json golden_view(Service& svc, const std::string& session_id);

} // namespace rep::service
