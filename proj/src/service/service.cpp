#include "rep/service/service.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "rep/common/error.hpp"
#include "rep/fsm/text.hpp"
#include "rep/traits/catalog.hpp"

namespace rep::service {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw NotFound("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_fd(int fd, std::string_view data, const fs::path& p) {
    while (!data.empty()) {
        const ssize_t n = ::write(fd, data.data(), data.size());
        if (n < 0) {
            if (errno == EINTR) continue;
            throw Error("io_error", "write " + p.string() + ": " + std::strerror(errno));
        }
        data.remove_prefix(static_cast<std::size_t>(n));
    }
}

// write to a temporary file, fsync, rename over the target
void write_atomic(const fs::path& p, std::string_view data) {
    const fs::path tmp = p.string() + ".tmp";
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) throw Error("io_error", "open " + tmp.string() + ": " + std::strerror(errno));
    try {
        write_fd(fd, data, tmp);
        ::fsync(fd);
    } catch (...) {
        ::close(fd);
        throw;
    }
    ::close(fd);
    fs::rename(tmp, p);
}

std::int64_t system_now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

std::string random_session_id() {
    static std::mutex m;
    static std::random_device rd;
    std::lock_guard lock(m);
    std::uint64_t hi = (std::uint64_t{rd()} << 32) | rd();
    std::uint64_t lo = (std::uint64_t{rd()} << 32) | rd();
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(hi),
                  static_cast<unsigned long long>(lo));
    return buf;
}

bool valid_session_id(const std::string& id) {
    if (id.empty() || id.size() > 128) return false;
    return std::all_of(id.begin(), id.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
    });
}

struct LogRead {
    std::vector<json> records;
    std::size_t good_bytes = 0;
    bool torn = false;
};

// Complete batches only: an input record followed by its declared replies.
LogRead read_log(const fs::path& p) {
    LogRead out;
    if (!fs::exists(p)) return out;
    const std::string data = read_text(p);
    std::size_t pos = 0;
    std::vector<json> batch;
    std::size_t expected = 0;
    std::uint64_t seq = out.records.size();
    while (pos < data.size()) {
        const auto nl = data.find('\n', pos);
        if (nl == std::string::npos) {
            out.torn = true;
            break;
        }
        json rec;
        try {
            rec = json::parse(std::string_view(data).substr(pos, nl - pos));
        } catch (const json::exception&) {
            out.torn = true;
            break;
        }
        pos = nl + 1;
        if (rec.value("seq", std::uint64_t{0}) != ++seq) throw FormatError("event log " + p.string() + ": sequence gap");
        if (batch.empty()) {
            if (rec.at("kind") == "rep_msg") throw FormatError("event log " + p.string() + ": orphan reply");
            expected = rec.at("payload").at("replies").get<std::size_t>();
        }
        batch.push_back(std::move(rec));
        if (batch.size() == expected + 1) {
            for (auto& r : batch) out.records.push_back(std::move(r));
            batch.clear();
            out.good_bytes = pos;
        }
    }
    if (!batch.empty()) out.torn = true;
    return out;
}

std::string_view kind_of(const dialogue::UserEvent& e) {
    switch (e.kind) {
    case dialogue::UserEvent::Kind::chat_begin: return "system";
    case dialogue::UserEvent::Kind::text: return "user_msg";
    case dialogue::UserEvent::Kind::widget_answer: return "widget_answer";
    case dialogue::UserEvent::Kind::link_click: return "link_click";
    }
    return "system";
}

std::uint64_t count_words(std::string_view text) {
    std::uint64_t n = 0;
    for (const auto& t : fsm::tokenize(text))
        if (std::isalnum(static_cast<unsigned char>(t[0])) || static_cast<unsigned char>(t[0]) >= 0x80) ++n;
    return n;
}

} // namespace

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string_view status_name(SessionStatus s) {
    switch (s) {
    case SessionStatus::active: return "active";
    case SessionStatus::completed: return "completed";
    case SessionStatus::abandoned: return "abandoned";
    }
    return "active";
}

ordered_json SessionMeta::to_json() const {
    return {{"session_id", session_id}, {"script_id", script_id}, {"persona_id", persona_id},
            {"seed", seed},             {"created_ms", created_ms}, {"updated_ms", updated_ms},
            {"status", status_name(status)}};
}

SessionMeta SessionMeta::from_json(const json& j) {
    try {
        SessionMeta m;
        m.session_id = j.at("session_id").get<std::string>();
        m.script_id = j.at("script_id").get<std::string>();
        m.persona_id = j.at("persona_id").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.created_ms = j.at("created_ms").get<std::int64_t>();
        m.updated_ms = j.at("updated_ms").get<std::int64_t>();
        const auto st = j.at("status").get<std::string>();
        m.status = st == "completed" ? SessionStatus::completed
                   : st == "abandoned" ? SessionStatus::abandoned
                                       : SessionStatus::active;
        return m;
    } catch (const json::exception& e) {
        throw FormatError(std::string("session meta: ") + e.what());
    }
}

ordered_json TurnResponse::to_json() const {
    ordered_json j;
    j["session_id"] = session_id;
    j["status"] = status_name(status);
    j["replies"] = replies;
    return j;
}

ordered_json CandidateReport::to_json() const {
    auto j = score.to_json();
    j["persona_id"] = persona_id;
    j["word_count"] = word_count;
    return j;
}

CandidateReport CandidateReport::from_json(const json& j) {
    CandidateReport r;
    r.score = scoring::ScoreReport::from_json(j);
    r.persona_id = j.value("persona_id", std::string());
    r.word_count = j.value("word_count", std::uint64_t{0});
    return r;
}

std::shared_ptr<const TraitResources> TraitResources::load(const std::string& model_path,
                                                           const std::string& lexicon_path,
                                                           const std::string& patterns_path) {
    auto r = std::make_shared<TraitResources>();
    r->model = traits::TraitModel::load(model_path);
    r->lexicon = traits::EvidenceLexicon::load(lexicon_path);
    r->matcher = fsm::compile(fsm::read_pattern_file(patterns_path), [](std::string_view t) { return fsm::lemmatize(t); });
    r->lexicon.check_against(r->matcher);
    return r;
}

std::shared_ptr<const Catalog> load_catalog(const fs::path& root, const std::string& default_script) {
    auto c = std::make_shared<Catalog>();
    c->default_script = default_script;
    auto sorted_json = [](const fs::path& dir) {
        std::vector<fs::path> files;
        if (fs::is_directory(dir))
            for (const auto& e : fs::directory_iterator(dir))
                if (e.path().extension() == ".json") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        return files;
    };
    for (const auto& p : sorted_json(root / "scripts")) {
        auto s = dialogue::InterviewScript::load(p.string());
        c->scripts[s->script_id()] = s;
    }
    for (const auto& p : sorted_json(root / "personas")) {
        auto persona = persona::Persona::load(p.string());
        c->personas[persona.id] = persona;
    }
    if (fs::exists(root / "model.json") && fs::exists(root / "lexicon" / "lexicon.tsv"))
        c->traits = TraitResources::load((root / "model.json").string(), (root / "lexicon" / "lexicon.tsv").string(),
                                         (root / "lexicon" / "patterns.tsv").string());
    return c;
}

struct Service::Slot {
    std::mutex m;
    SessionMeta meta;
    bool loaded = false;
    dialogue::SessionState state;
    std::uint64_t next_seq = 1;
    std::optional<CandidateReport> report;
};

Service::Service(ServiceOptions options, std::shared_ptr<const Catalog> catalog)
    : options_(std::move(options)), catalog_(std::move(catalog)) {
    if (!options_.now_ms) options_.now_ms = system_now_ms;
    if (!options_.new_session_id) options_.new_session_id = random_session_id;
    fs::create_directories(options_.data_dir / "sessions");
    for (const auto& e : fs::directory_iterator(options_.data_dir / "sessions")) {
        if (!e.is_directory() || !fs::exists(e.path() / "meta.json")) continue;
        auto s = std::make_shared<Slot>();
        s->meta = SessionMeta::from_json(json::parse(read_text(e.path() / "meta.json")));
        slots_.emplace(s->meta.session_id, std::move(s));
    }
    created_count_ = slots_.size();
}

Service::~Service() = default;

void Service::reload(std::shared_ptr<const Catalog> catalog) {
    std::lock_guard lock(catalog_mutex_);
    catalog_ = std::move(catalog);
}

std::shared_ptr<const Catalog> Service::catalog() const {
    std::lock_guard lock(catalog_mutex_);
    return catalog_;
}

void Service::set_fault_hook(std::function<void(std::string_view)> hook) { fault_hook_ = std::move(hook); }

void Service::fault(std::string_view point) {
    if (fault_hook_) fault_hook_(point);
}

fs::path Service::dir_of(const std::string& id) const { return options_.data_dir / "sessions" / id; }

std::string Service::link_token(const std::string& session_id, const std::string& link_id) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(session_id + ":" + link_id)));
    return buf;
}

std::shared_ptr<Service::Slot> Service::slot(const std::string& id) {
    std::lock_guard lock(slots_mutex_);
    auto it = slots_.find(id);
    if (it == slots_.end()) throw NotFound("session_not_found", "no session " + id);
    return it->second;
}

std::vector<std::string> Service::session_ids() const {
    std::lock_guard lock(slots_mutex_);
    std::vector<std::string> out;
    for (const auto& [id, s] : slots_) out.push_back(id);
    return out;
}

void Service::write_meta(const Slot& s) {
    write_atomic(dir_of(s.meta.session_id) / "meta.json", s.meta.to_json().dump(1) + "\n");
}

// Snapshot plus replay of whatever the log holds beyond it. A torn final batch
// is cut off: that turn never completed.
void Service::load_slot(Slot& s) {
    if (s.loaded) return;
    const auto dir = dir_of(s.meta.session_id);
    const auto cat = catalog();
    auto sit = cat->scripts.find(s.meta.script_id);
    auto pit = cat->personas.find(s.meta.persona_id);
    if (sit == cat->scripts.end()) throw NotFound("unknown_script", "script " + s.meta.script_id + " is not loaded");
    if (pit == cat->personas.end()) throw NotFound("unknown_persona", "persona " + s.meta.persona_id + " is not loaded");

    auto log = read_log(dir / "events.jsonl");
    if (log.torn) fs::resize_file(dir / "events.jsonl", log.good_bytes);

    dialogue::SessionState st = dialogue::initial_state(s.meta.seed);
    std::uint64_t from = 0;
    if (fs::exists(dir / "snapshot.json")) {
        const auto snap = json::parse(read_text(dir / "snapshot.json"));
        const auto seq = snap.at("seq").get<std::uint64_t>();
        if (seq <= log.records.size()) {
            st = dialogue::SessionState::from_json(snap.at("state"));
            from = seq;
        }
    }
    bool replayed = false;
    for (const auto& rec : log.records) {
        if (rec.at("seq").get<std::uint64_t>() <= from || rec.at("kind") == "rep_msg") continue;
        st = dialogue::step(*sit->second, pit->second, st, dialogue::UserEvent::from_json(rec.at("payload").at("event")))
                 .state;
        replayed = true;
    }
    s.state = std::move(st);
    s.next_seq = log.records.size() + 1;
    if (replayed || log.torn || !fs::exists(dir / "snapshot.json"))
        write_atomic(dir / "snapshot.json",
                     ordered_json{{"seq", s.next_seq - 1}, {"state", s.state.to_json()}}.dump() + "\n");
    const bool complete = dialogue::is_complete(*sit->second, s.state) && s.state.turn > 0;
    if (complete && s.meta.status == SessionStatus::active) {
        s.meta.status = SessionStatus::completed;
        write_meta(s);
    }
    if (fs::exists(dir / "report.json"))
        s.report = CandidateReport::from_json(json::parse(read_text(dir / "report.json")));
    s.loaded = true;
}

TurnResponse Service::apply(Slot& s, const dialogue::UserEvent& event, const char* kind) {
    load_slot(s);
    const auto cat = catalog();
    const auto& script = *cat->scripts.at(s.meta.script_id);
    const auto& persona = cat->personas.at(s.meta.persona_id);
    if (s.meta.status == SessionStatus::abandoned)
        throw Conflict("session_abandoned", "this interview was closed after a long pause");
    if (s.meta.status == SessionStatus::completed && event.kind != dialogue::UserEvent::Kind::link_click)
        throw Conflict("session_completed", "this interview is already complete, thank you");

    auto result = dialogue::step(script, persona, s.state, event);

    TurnResponse resp;
    resp.session_id = s.meta.session_id;
    for (const auto& r : result.replies) {
        auto j = r.to_json();
        if (j.contains("widget") && j["widget"].is_object() && j["widget"].value("type", "") == "link" && j["widget"].value("tracked", false))
            j["widget"]["href"] = "/r/" + s.meta.session_id + "/" +
                                  link_token(s.meta.session_id, j["widget"]["link_id"].get<std::string>());
        resp.replies.push_back(std::move(j));
    }

    std::string batch;
    std::uint64_t seq = s.next_seq;
    ordered_json input{{"seq", seq++},
                       {"kind", kind},
                       {"payload", {{"event", event.to_json()}, {"replies", resp.replies.size()}}}};
    batch += input.dump() + "\n";
    for (const auto& r : resp.replies)
        batch += ordered_json{{"seq", seq++}, {"kind", "rep_msg"}, {"payload", r}}.dump() + "\n";

    const auto dir = dir_of(s.meta.session_id);
    fault("before_append");
    {
        const auto path = dir / "events.jsonl";
        const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
        if (fd < 0) throw Error("io_error", "open " + path.string() + ": " + std::strerror(errno));
        try {
            const std::size_t half = batch.size() / 2;
            write_fd(fd, std::string_view(batch).substr(0, half), path);
            fault("mid_append");
            write_fd(fd, std::string_view(batch).substr(half), path);
            ::fsync(fd);
        } catch (...) {
            ::close(fd);
            s.loaded = false;
            throw;
        }
        ::close(fd);
    }
    s.state = std::move(result.state);
    s.next_seq = seq;
    try {
        fault("after_append");
        write_atomic(dir / "snapshot.json", ordered_json{{"seq", seq - 1}, {"state", s.state.to_json()}}.dump() + "\n");
        fault("after_snapshot");
    } catch (...) {
        s.loaded = false;
        throw;
    }

    s.meta.updated_ms = options_.now_ms();
    if (s.meta.status == SessionStatus::active && dialogue::is_complete(script, s.state))
        s.meta.status = SessionStatus::completed;
    write_meta(s);
    resp.status = s.meta.status;
    return resp;
}

TurnResponse Service::create_session(const std::string& script_id, const std::string& persona_id) {
    const auto cat = catalog();
    const std::string sid = script_id.empty() ? cat->default_script : script_id;
    if (!cat->scripts.count(sid)) throw NotFound("unknown_script", "no script '" + sid + "'");
    if (cat->personas.empty()) throw NotFound("unknown_persona", "no personas are loaded");

    auto s = std::make_shared<Slot>();
    {
        std::lock_guard lock(slots_mutex_);
        std::string pid = persona_id;
        if (pid.empty()) {
            auto it = cat->personas.begin();
            std::advance(it, static_cast<long>(created_count_ % cat->personas.size()));
            pid = it->first;
        } else if (!cat->personas.count(pid)) {
            throw NotFound("unknown_persona", "no persona '" + pid + "'");
        }
        std::string id;
        for (int attempt = 0;; ++attempt) {
            id = options_.new_session_id();
            if (!slots_.count(id) && !fs::exists(dir_of(id))) break;
            if (attempt == 8) throw Conflict("session_exists", "session id " + id + " is already taken");
        }
        if (!valid_session_id(id)) throw Error("bad_session_id", "session id generator returned '" + id + "'");
        ++created_count_;
        s->meta = {id, sid, pid, fnv1a64(id), options_.now_ms(), 0, SessionStatus::active};
        s->meta.updated_ms = s->meta.created_ms;
        s->loaded = true;
        s->state = dialogue::initial_state(s->meta.seed);
        fs::create_directories(dir_of(id));
        write_meta(*s);
        slots_.emplace(id, s);
    }
    std::lock_guard lock(s->m);
    return apply(*s, dialogue::UserEvent::begin(), "system");
}

TurnResponse Service::post_message(const std::string& session_id, const dialogue::UserEvent& event) {
    if (event.kind != dialogue::UserEvent::Kind::text && event.kind != dialogue::UserEvent::Kind::widget_answer)
        throw BadRequest("a message is free text or a widget answer");
    auto s = slot(session_id);
    std::lock_guard lock(s->m);
    return apply(*s, event, std::string(kind_of(event)).c_str());
}

std::string Service::track_click(const std::string& session_id, const std::string& token) {
    auto s = slot(session_id);
    std::lock_guard lock(s->m);
    load_slot(*s);
    const auto cat = catalog();
    for (const auto& [qid, q] : cat->scripts.at(s->meta.script_id)->questions())
        if (q.type == dialogue::QuestionType::link && link_token(session_id, qid) == token) {
            if (s->meta.status != SessionStatus::abandoned) apply(*s, dialogue::UserEvent::click(qid), "link_click");
            return q.url;
        }
    throw NotFound("unknown_link", "no such link in this session");
}

SessionMeta Service::meta(const std::string& session_id) {
    auto s = slot(session_id);
    std::lock_guard lock(s->m);
    return s->meta;
}

dialogue::SessionState Service::state(const std::string& session_id) {
    auto s = slot(session_id);
    std::lock_guard lock(s->m);
    load_slot(*s);
    return s->state;
}

ordered_json Service::transcript(const std::string& session_id) {
    auto s = slot(session_id);
    std::lock_guard lock(s->m);
    load_slot(*s);
    ordered_json j;
    j["session_id"] = s->meta.session_id;
    j["script_id"] = s->meta.script_id;
    j["persona_id"] = s->meta.persona_id;
    j["status"] = status_name(s->meta.status);
    j["events"] = ordered_json::array();
    for (const auto& rec : read_log(dir_of(session_id) / "events.jsonl").records)
        j["events"].push_back(ordered_json::parse(rec.dump()));
    return j;
}

std::string Service::trait_input(const std::string& session_id) {
    auto s = slot(session_id);
    std::lock_guard lock(s->m);
    std::string text;
    for (const auto& rec : read_log(dir_of(session_id) / "events.jsonl").records) {
        if (rec.at("kind") != "user_msg") continue;
        if (!text.empty()) text += '\n';
        text += rec.at("payload").at("event").at("text").get<std::string>();
    }
    return text;
}

bool Service::verify(const std::string& session_id) {
    auto s = slot(session_id);
    std::lock_guard lock(s->m);
    load_slot(*s);
    const auto cat = catalog();
    const auto& script = *cat->scripts.at(s->meta.script_id);
    const auto& persona = cat->personas.at(s->meta.persona_id);
    auto st = dialogue::initial_state(s->meta.seed);
    for (const auto& rec : read_log(dir_of(session_id) / "events.jsonl").records)
        if (rec.at("kind") != "rep_msg")
            st = dialogue::step(script, persona, st, dialogue::UserEvent::from_json(rec.at("payload").at("event"))).state;
    const auto snap = json::parse(read_text(dir_of(session_id) / "snapshot.json"));
    return st == s->state && dialogue::SessionState::from_json(snap.at("state")) == st;
}

CandidateReport Service::build_report(Slot& s) {
    const auto cat = catalog();
    const auto& script = *cat->scripts.at(s.meta.script_id);
    std::string text;
    for (const auto& rec : read_log(dir_of(s.meta.session_id) / "events.jsonl").records) {
        if (rec.at("kind") != "user_msg") continue;
        if (!text.empty()) text += '\n';
        text += rec.at("payload").at("event").at("text").get<std::string>();
    }
    std::vector<traits::TraitScore> scores;
    if (cat->traits) {
        const auto ev = traits::extract_evidence(text, cat->traits->lexicon, cat->traits->matcher);
        scores = traits::infer_all(cat->traits->model, cat->traits->lexicon, ev);
    } else {
        scores = traits::infer_all({}, {}, traits::evidence_from_counts({}, 0));
    }
    std::array<bool, scoring::kImItems> reverse{};
    for (const auto& [qid, q] : script.questions())
        if (q.measure.rfind("im.", 0) == 0) {
            const int k = std::stoi(q.measure.substr(3));
            if (k >= 1 && k <= static_cast<int>(scoring::kImItems)) reverse[static_cast<std::size_t>(k - 1)] = q.reverse_keyed;
        }
    CandidateReport r;
    r.score = scoring::score_session(s.meta.session_id, s.state.outcomes, reverse, std::move(scores));
    r.persona_id = s.meta.persona_id;
    r.word_count = count_words(text);
    return r;
}

CandidateReport Service::get_report(const std::string& session_id) {
    auto s = slot(session_id);
    std::lock_guard lock(s->m);
    load_slot(*s);
    if (s->meta.status != SessionStatus::completed)
        throw Conflict("session_not_complete", "the interview has not been completed");
    if (!s->report) {
        s->report = build_report(*s);
        write_atomic(dir_of(session_id) / "report.json", s->report->to_json().dump(1) + "\n");
    }
    return *s->report;
}

std::vector<ordered_json> Service::list_results(const std::string& sort_by, const std::string& order) {
    const bool known = sort_by == "im" || sort_by == "wc" || sort_by == "wl" || traits::is_trait(sort_by);
    if (!known) throw BadRequest("unknown_sort_key", "cannot sort by '" + sort_by + "'");
    if (order != "asc" && order != "desc") throw BadRequest("unknown_order", "order must be asc or desc");

    struct Row {
        std::string id;
        std::optional<double> key;
        ordered_json summary;
    };
    std::vector<Row> rows;
    for (const auto& id : session_ids()) {
        {
            auto s = slot(id);
            std::lock_guard lock(s->m);
            if (s->meta.status != SessionStatus::completed) continue;
        }
        const auto r = get_report(id);
        ordered_json sum;
        sum["session_id"] = id;
        sum["persona_id"] = r.persona_id;
        sum["im"] = r.score.im ? ordered_json(*r.score.im) : ordered_json(nullptr);
        sum["wc"] = r.score.wc;
        sum["wl"] = r.score.wl;
        sum["word_count"] = r.word_count;
        auto& t = sum["traits"] = ordered_json::object();
        std::optional<double> key;
        for (const auto& ts : r.score.traits) {
            t[ts.trait_id] = ts.theta;
            if (ts.trait_id == sort_by) key = ts.theta;
        }
        if (sort_by == "im" && r.score.im) key = *r.score.im;
        if (sort_by == "wc") key = r.score.wc;
        if (sort_by == "wl") key = r.score.wl;
        rows.push_back({id, key, std::move(sum)});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.id < b.id; });
    const bool desc = order == "desc";
    std::stable_sort(rows.begin(), rows.end(), [&](const Row& a, const Row& b) {
        if (!a.key || !b.key) return a.key.has_value() && !b.key.has_value();
        return desc ? *a.key > *b.key : *a.key < *b.key;
    });
    std::vector<ordered_json> out;
    for (auto& r : rows) out.push_back(std::move(r.summary));
    return out;
}

std::size_t Service::expire_idle() {
    const auto now = options_.now_ms();
    std::size_t n = 0;
    for (const auto& id : session_ids()) {
        auto s = slot(id);
        std::lock_guard lock(s->m);
        if (s->meta.status == SessionStatus::active && now - s->meta.updated_ms > options_.session_ttl_ms) {
            s->meta.status = SessionStatus::abandoned;
            write_meta(*s);
            ++n;
        }
    }
    return n;
}

} // namespace rep::service
