#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rep/dialogue/engine.hpp"
#include "rep/persona/persona.hpp"
#include "rep/scoring/scoring.hpp"
#include "rep/traits/lexicon.hpp"
#include "rep/traits/model.hpp"

namespace rep::service {

struct TraitResources {
    traits::TraitModel model;
    traits::EvidenceLexicon lexicon;
    fsm::CompiledMatcher matcher;

    /// model.json, lexicon.tsv and patterns.tsv; the lexicon is checked against the patterns.
    static std::shared_ptr<const TraitResources> load(const std::string& model_path, const std::string& lexicon_path,
                                                      const std::string& patterns_path);
};

/// Immutable bundle of everything sessions read. Swapped whole on reload.
struct Catalog {
    std::map<std::string, std::shared_ptr<const dialogue::InterviewScript>> scripts;
    std::map<std::string, persona::Persona> personas;
    std::shared_ptr<const TraitResources> traits;
    std::string default_script;
};

enum class SessionStatus : std::uint8_t { active, completed, abandoned };
std::string_view status_name(SessionStatus s);

struct SessionMeta {
    std::string session_id;
    std::string script_id;
    std::string persona_id;
    std::uint64_t seed = 0;
    std::int64_t created_ms = 0;
    std::int64_t updated_ms = 0;
    SessionStatus status = SessionStatus::active;

    nlohmann::ordered_json to_json() const;
    static SessionMeta from_json(const nlohmann::json& j);
};

struct TurnResponse {
    std::string session_id;
    std::vector<nlohmann::ordered_json> replies;
    SessionStatus status = SessionStatus::active;

    nlohmann::ordered_json to_json() const;
};

struct CandidateReport {
    scoring::ScoreReport score;
    std::string persona_id;
    std::uint64_t word_count = 0;

    nlohmann::ordered_json to_json() const;
    static CandidateReport from_json(const nlohmann::json& j);
};

struct ServiceOptions {
    std::filesystem::path data_dir;
    /// Sessions idle longer than this are marked abandoned by expire_idle().
    std::int64_t session_ttl_ms = 24 * 3600 * 1000LL;
    std::function<std::int64_t()> now_ms;
    /// 32 hex digits from std::random_device unless replaced.
    std::function<std::string()> new_session_id;
};

/// Session store and API logic. Each session's writes are serialized; the event
/// log is written before the snapshot and is the source of truth.
class Service {
public:
    Service(ServiceOptions options, std::shared_ptr<const Catalog> catalog);
    ~Service();

    void reload(std::shared_ptr<const Catalog> catalog);
    std::shared_ptr<const Catalog> catalog() const;

    /// Empty ids pick the catalog default script and alternate personas.
    TurnResponse create_session(const std::string& script_id = {}, const std::string& persona_id = {});
    TurnResponse post_message(const std::string& session_id, const dialogue::UserEvent& event);
    /// Records the click and returns the destination URL.
    std::string track_click(const std::string& session_id, const std::string& token);
    CandidateReport get_report(const std::string& session_id);
    /// sort_by: a trait id, "im", "wc" or "wl"; order "asc" or "desc".
    std::vector<nlohmann::ordered_json> list_results(const std::string& sort_by, const std::string& order);

    SessionMeta meta(const std::string& session_id);
    dialogue::SessionState state(const std::string& session_id);
    nlohmann::ordered_json transcript(const std::string& session_id);
    /// The text handed to trait inference: user free-text turns only.
    std::string trait_input(const std::string& session_id);
    /// Snapshot equals the fold of the whole event log.
    bool verify(const std::string& session_id);
    std::vector<std::string> session_ids() const;
    std::size_t expire_idle();

    /// Link token used in tracked redirect URLs.
    static std::string link_token(const std::string& session_id, const std::string& link_id);

    /// Called at "before_append", "mid_append", "after_append" and
    /// "after_snapshot"; a hook that throws simulates a crash at that point.
    void set_fault_hook(std::function<void(std::string_view)> hook);

private:
    struct Slot;
    std::shared_ptr<Slot> slot(const std::string& session_id);
    void load_slot(Slot& s);
    TurnResponse apply(Slot& s, const dialogue::UserEvent& event, const char* kind);
    CandidateReport build_report(Slot& s);
    void write_meta(const Slot& s);
    void fault(std::string_view point);
    std::filesystem::path dir_of(const std::string& session_id) const;

    ServiceOptions options_;
    mutable std::mutex catalog_mutex_;
    std::shared_ptr<const Catalog> catalog_;
    mutable std::mutex slots_mutex_;
    std::map<std::string, std::shared_ptr<Slot>> slots_;
    std::uint64_t created_count_ = 0;
    std::function<void(std::string_view)> fault_hook_;
};

std::uint64_t fnv1a64(std::string_view s);

/// Catalog from a directory laid out like data/: scripts/*.json, personas/*.json,
/// model.json and lexicon/{lexicon,patterns}.tsv (trait files optional).
std::shared_ptr<const Catalog> load_catalog(const std::filesystem::path& data_root, const std::string& default_script = "demo");

} // namespace rep::service
