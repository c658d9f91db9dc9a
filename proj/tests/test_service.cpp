#include "rep/service/http.hpp"

#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "rep/common/error.hpp"
#include "rep/service/simulate.hpp"

using namespace rep;
using namespace rep::service;
using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = REP_SOURCE_DIR;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("rep_service_" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

std::shared_ptr<const Catalog> test_catalog() {
    static const auto cat = [] {
        auto c = std::make_shared<Catalog>(*load_catalog(kRoot / "data"));
        auto mini = dialogue::InterviewScript::load((kRoot / "tests/data/mini/mini.json").string());
        c->scripts[mini->script_id()] = mini;
        return std::shared_ptr<const Catalog>(c);
    }();
    return cat;
}

struct Clock {
    std::shared_ptr<std::atomic<std::int64_t>> t = std::make_shared<std::atomic<std::int64_t>>(1'000'000);
    std::function<std::int64_t()> fn() const {
        return [t = t] { return t->load(); };
    }
};

ServiceOptions options_for(const fs::path& dir, std::function<std::string()> ids = {}) {
    ServiceOptions o;
    o.data_dir = dir;
    o.now_ms = [] { return std::int64_t{1'000'000}; };
    o.new_session_id = std::move(ids);
    return o;
}

std::function<std::string()> counter_ids(const std::string& prefix) {
    auto n = std::make_shared<std::atomic<int>>(0);
    return [n, prefix] {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s%04d", prefix.c_str(), (*n)++);
        return std::string(buf);
    };
}

std::vector<json> log_records(const fs::path& dir, const std::string& id) {
    std::vector<json> out;
    std::istringstream in(slurp(dir / "sessions" / id / "events.jsonl"));
    std::string line;
    while (std::getline(in, line)) out.push_back(json::parse(line));
    return out;
}

// Inputs in log order, the independent replay source.
std::vector<dialogue::UserEvent> log_inputs(const fs::path& dir, const std::string& id) {
    std::vector<dialogue::UserEvent> out;
    for (const auto& r : log_records(dir, id))
        if (r["kind"] != "rep_msg") out.push_back(dialogue::UserEvent::from_json(r["payload"]["event"]));
    return out;
}

dialogue::SessionState fold(const Catalog& cat, const SessionMeta& m, const std::vector<dialogue::UserEvent>& events) {
    auto st = dialogue::initial_state(m.seed);
    for (const auto& e : events)
        st = dialogue::step(*cat.scripts.at(m.script_id), cat.personas.at(m.persona_id), st, e).state;
    return st;
}

void feed(Service& svc, const std::string& id, const dialogue::UserEvent& ev) {
    if (ev.kind == dialogue::UserEvent::Kind::link_click)
        svc.track_click(id, Service::link_token(id, ev.question_id));
    else
        svc.post_message(id, ev);
}

std::string pending_of(Service& svc, const std::string& id) {
    const auto st = svc.state(id);
    return st.pending ? st.pending->question_id : std::string();
}

// Finishes a mini session: name, then the rating.
TurnResponse finish_mini(Service& svc, const std::string& id, const std::string& name, int rating) {
    svc.post_message(id, dialogue::UserEvent::say(name));
    return svc.post_message(id, dialogue::UserEvent::answer("rate-q", rating));
}

template <class E>
std::string code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const E& e) {
        return e.code();
    }
    return "no error";
}

UserProfile demo_user() { return UserProfile::load((kRoot / "data/sim/demo_user.json").string()); }

// Random answers so results rows differ.
UserProfile random_user(std::mt19937_64& rng, const Catalog& cat) {
    UserProfile u;
    const auto& script = *cat.scripts.at("demo");
    for (const auto& [qid, q] : script.questions()) {
        if (q.type == dialogue::QuestionType::likert)
            u.choices[qid] = std::uniform_int_distribution<int>(1, q.points)(rng);
        else if (q.type == dialogue::QuestionType::single_choice)
            u.choices[qid] = q.options[std::uniform_int_distribution<std::size_t>(0, q.options.size() - 1)(rng)].value;
        else if (q.type == dialogue::QuestionType::open_ended) {
            static const std::vector<std::string> words = {"plan", "worry", "party", "art", "team", "happy", "careful",
                                                           "music", "trust", "help", "goal", "the", "a", "work"};
            std::string t;
            for (int k = 0; k < 12; ++k) t += words[rng() % words.size()] + " ";
            u.texts[qid] = t;
        }
        if (q.type == dialogue::QuestionType::link && rng() % 2) u.clicks.insert(qid);
    }
    // the job inquiry topic is on the agenda, so every candidate asks both
    std::vector<std::string> qids;
    for (const auto& [qid, q] : script.questions())
        if (q.type != dialogue::QuestionType::link && qid.rfind("post-", 0) != 0) qids.push_back(qid);
    u.interjections.push_back({qids[rng() % qids.size()], "how many people apply for this role?"});
    u.interjections.push_back({qids[rng() % qids.size()], "When do you make a decision?"});
    return u;
}

} // namespace

TEST_CASE("sessions: create, converse, persist across restarts") {
    TempDir tmp;
    std::string id;
    {
        Service svc(options_for(tmp.path, counter_ids("s")), test_catalog());
        auto r = svc.create_session("mini");
        id = r.session_id;
        CHECK(id == "s0000");
        REQUIRE(r.replies.size() == 2);
        CHECK(r.replies[1]["widget"]["question_id"] == "name-q");
        CHECK(svc.meta(id).persona_id == "albert");
        CHECK(svc.create_session("mini").session_id == "s0001");
        CHECK(svc.meta("s0001").persona_id == "kaya");

        r = svc.post_message(id, dialogue::UserEvent::say("Robin"));
        // the link is shown, never left pending, and the rating follows
        REQUIRE(r.replies.size() == 2);
        CHECK(r.replies[0]["widget"]["type"] == "link");
        CHECK(r.replies[0]["widget"]["href"] == "/r/" + id + "/" + Service::link_token(id, "doc"));
        CHECK(r.replies[1]["widget"]["question_id"] == "rate-q");
        CHECK(r.status == SessionStatus::active);
    }
    Service again(options_for(tmp.path, counter_ids("t")), test_catalog());
    CHECK(again.session_ids().size() == 2);
    CHECK(pending_of(again, id) == "rate-q");
    CHECK(again.state(id).answers.at("name-q") == "Robin");
    // the created count survives, so the third session gets albert again
    CHECK(again.meta(again.create_session("mini").session_id).persona_id == "albert");

    auto done = again.post_message(id, dialogue::UserEvent::answer("rate-q", 2));
    CHECK(done.status == SessionStatus::completed);
    CHECK(done.replies.back()["text"] == "Thanks Robin, that's all.");
    CHECK(again.verify(id));
}

TEST_CASE("sessions: error codes") {
    TempDir tmp;
    Service svc(options_for(tmp.path, counter_ids("e")), test_catalog());
    CHECK(code_of<NotFound>([&] { svc.create_session("nope"); }) == "unknown_script");
    CHECK(code_of<NotFound>([&] { svc.create_session("mini", "nobody"); }) == "unknown_persona");
    CHECK(code_of<NotFound>([&] { svc.post_message("zzz", dialogue::UserEvent::say("hi")); }) == "session_not_found");
    CHECK(svc.session_ids().empty());

    const auto id = svc.create_session("mini", "kaya").session_id;
    CHECK(code_of<BadRequest>([&] { svc.post_message(id, dialogue::UserEvent::click("doc")); }) == "bad_request");
    CHECK(code_of<Conflict>([&] { svc.get_report(id); }) == "session_not_complete");
    svc.post_message(id, dialogue::UserEvent::say("Sam"));
    CHECK(code_of<ValidationError>([&] { svc.post_message(id, dialogue::UserEvent::answer("rate-q", 9)); }) ==
          "validation_error");
    CHECK(code_of<ValidationError>([&] { svc.post_message(id, dialogue::UserEvent::answer("name-q", 1)); }) ==
          "validation_error");
    // rejected turns leave no trace
    CHECK(log_inputs(tmp.path, id).size() == 2);
    svc.post_message(id, dialogue::UserEvent::answer("rate-q", 1));
    CHECK(code_of<Conflict>([&] { svc.post_message(id, dialogue::UserEvent::say("more")); }) == "session_completed");
    CHECK(code_of<BadRequest>([&] { svc.list_results("height", "asc"); }) == "unknown_sort_key");
    CHECK(code_of<BadRequest>([&] { svc.list_results("wc", "sideways"); }) == "unknown_order");
    CHECK(code_of<NotFound>([&] { svc.track_click(id, "0000"); }) == "unknown_link");
}

TEST_CASE("links: idempotent, session scoped, allowed after completion") {
    TempDir tmp;
    Service svc(options_for(tmp.path, counter_ids("l")), test_catalog());
    const auto a = svc.create_session("mini").session_id;
    const auto b = svc.create_session("mini").session_id;
    svc.post_message(a, dialogue::UserEvent::say("Ana"));

    const auto before = svc.state(a);
    CHECK(svc.track_click(a, Service::link_token(a, "doc")) == "https://example.org/doc");
    auto once = svc.state(a);
    CHECK(once.outcomes.at("wl.click1") == 1);
    CHECK(once.turn == before.turn);
    CHECK(once.pending == before.pending);
    svc.track_click(a, Service::link_token(a, "doc"));
    CHECK(svc.state(a) == once);

    CHECK(Service::link_token(a, "doc") != Service::link_token(b, "doc"));
    CHECK(code_of<NotFound>([&] { svc.track_click(b, Service::link_token(a, "doc")); }) == "unknown_link");
    CHECK_FALSE(svc.state(b).outcomes.count("wl.click1"));

    finish_mini(svc, b, "Bo", 3);
    CHECK(svc.meta(b).status == SessionStatus::completed);
    svc.track_click(b, Service::link_token(b, "doc"));
    CHECK(svc.state(b).outcomes.at("wl.click1") == 1);
    CHECK(svc.get_report(b).score.wl == 1);
    CHECK(svc.verify(a));
    CHECK(svc.verify(b));
}

TEST_CASE("ttl: idle sessions are abandoned, finished ones are not") {
    TempDir tmp;
    Clock clock;
    auto opts = options_for(tmp.path, counter_ids("x"));
    opts.now_ms = clock.fn();
    opts.session_ttl_ms = 60'000;
    Service svc(opts, test_catalog());
    const auto idle = svc.create_session("mini").session_id;
    const auto busy = svc.create_session("mini").session_id;
    const auto done = svc.create_session("mini").session_id;
    finish_mini(svc, done, "Di", 1);

    *clock.t += 40'000;
    svc.post_message(busy, dialogue::UserEvent::say("Bea"));
    CHECK(svc.expire_idle() == 0);
    *clock.t += 30'000;
    CHECK(svc.expire_idle() == 1);
    CHECK(svc.meta(idle).status == SessionStatus::abandoned);
    CHECK(svc.meta(busy).status == SessionStatus::active);
    CHECK(svc.meta(done).status == SessionStatus::completed);
    CHECK(code_of<Conflict>([&] { svc.post_message(idle, dialogue::UserEvent::say("hello?")); }) == "session_abandoned");
    *clock.t += 60'001;
    CHECK(svc.expire_idle() == 1);
    CHECK(svc.expire_idle() == 0);

    Service again(opts, test_catalog());
    CHECK(again.meta(idle).status == SessionStatus::abandoned);
    CHECK(again.meta(done).status == SessionStatus::completed);
}

TEST_CASE("reports: trait input is the candidate's free text only") {
    TempDir tmp;
    Service svc(options_for(tmp.path, counter_ids("h")), test_catalog());
    const auto r = simulate(svc, demo_user(), "demo", "kaya");
    REQUIRE(r.completed);
    const auto cat = test_catalog();

    // independent reconstruction from the raw log
    std::string expected;
    std::set<std::string> rep_texts;
    for (const auto& rec : log_records(tmp.path, r.session_id)) {
        if (rec["kind"] == "user_msg") expected += (expected.empty() ? "" : "\n") + rec["payload"]["event"]["text"].get<std::string>();
        if (rec["kind"] == "rep_msg") rep_texts.insert(rec["payload"]["text"].get<std::string>());
    }
    const auto input = svc.trait_input(r.session_id);
    CHECK(input == expected);
    for (const auto& t : rep_texts)
        if (t.size() > 12) CHECK_MESSAGE(input.find(t) == std::string::npos, t);
    for (const auto& [qid, text] : demo_user().texts) CHECK(input.find(text) != std::string::npos);
    CHECK(input.find("how many people apply") != std::string::npos);
    CHECK(input.find("im-0") == std::string::npos);

    const auto report = svc.get_report(r.session_id);
    const auto ev = traits::extract_evidence(expected, cat->traits->lexicon, cat->traits->matcher);
    CHECK(report.score.traits == traits::infer_all(cat->traits->model, cat->traits->lexicon, ev));
    CHECK(report.score.traits.size() == 35);
    CHECK(report.persona_id == "kaya");
    std::uint64_t words = 0;
    for (const auto& t : fsm::tokenize(expected)) words += std::isalnum(static_cast<unsigned char>(t[0])) ? 1 : 0;
    CHECK(report.word_count == words);

    // the widget outcomes feed the measures
    CHECK(report.score.im == 14);
    const auto& o = svc.state(r.session_id).outcomes;
    CHECK(report.score == scoring::score_session(r.session_id, o, [&] {
              std::array<bool, scoring::kImItems> rk{};
              for (std::size_t k = 1; k < rk.size(); k += 2) rk[k] = true;
              return rk;
          }(), report.score.traits));
    CHECK(fs::exists(tmp.path / "sessions" / r.session_id / "report.json"));
    Service again(options_for(tmp.path), test_catalog());
    CHECK(again.get_report(r.session_id).to_json() == report.to_json());
}

TEST_CASE("results: sorting matches an independent ordering") {
    TempDir tmp;
    Service svc(options_for(tmp.path, counter_ids("r")), test_catalog());
    const auto cat = test_catalog();
    std::mt19937_64 rng(42);
    for (int k = 0; k < 12; ++k) REQUIRE(simulate(svc, random_user(rng, *cat), "demo").completed);
    // mini sessions have no IM items, and duplicate wc values force ties
    for (int k = 0; k < 4; ++k) {
        const auto id = svc.create_session("mini").session_id;
        finish_mini(svc, id, "M" + std::to_string(k), 1 + k % 3);
    }
    svc.create_session("mini");  // unfinished, never listed

    std::map<std::string, CandidateReport> reports;
    for (const auto& id : svc.session_ids())
        if (svc.meta(id).status == SessionStatus::completed) reports.emplace(id, svc.get_report(id));
    REQUIRE(reports.size() == 16);

    std::vector<std::string> keys = {"im", "wc", "wl"};
    for (const auto& t : reports.begin()->second.score.traits) keys.push_back(t.trait_id);
    auto value = [&](const std::string& id, const std::string& key) -> std::optional<double> {
        const auto& s = reports.at(id).score;
        if (key == "im") return s.im ? std::optional<double>(*s.im) : std::nullopt;
        if (key == "wc") return s.wc;
        if (key == "wl") return s.wl;
        for (const auto& t : s.traits)
            if (t.trait_id == key) return t.theta;
        return std::nullopt;
    };
    std::size_t checked = 0;
    for (const auto& key : keys)
        for (const std::string order : {"asc", "desc"}) {
            const auto rows = svc.list_results(key, order);
            REQUIRE(rows.size() == reports.size());
            // oracle: all orderings by pairwise comparison
            std::vector<std::string> ids;
            for (const auto& [id, _] : reports) ids.push_back(id);
            std::vector<std::string> expect;
            while (!ids.empty()) {
                std::size_t best = 0;
                for (std::size_t i = 1; i < ids.size(); ++i) {
                    const auto a = value(ids[i], key), b = value(ids[best], key);
                    bool better;
                    if (!a || !b) better = a && !b;
                    else if (*a != *b) better = order == "asc" ? *a < *b : *a > *b;
                    else better = ids[i] < ids[best];
                    if (better) best = i;
                }
                expect.push_back(ids[best]);
                ids.erase(ids.begin() + static_cast<long>(best));
            }
            for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i]["session_id"] == expect[i]);
            ++checked;
        }
    CHECK(checked == 2 * (3 + 35));
    const auto by_im = svc.list_results("im", "asc");
    CHECK(by_im.back()["im"].is_null());
    CHECK(svc.list_results("im", "desc").back()["im"].is_null());
}

TEST_CASE("durability: a crash at any write point recovers to a consistent state") {
    const auto cat = test_catalog();
    const auto user = demo_user();
    // reference run without faults
    TempDir ref_dir;
    Service ref(options_for(ref_dir.path, [] { return std::string("crash0"); }), cat);
    const auto ref_run = simulate(ref, user, "demo", "albert");
    REQUIRE(ref_run.completed);
    const auto ref_inputs = log_inputs(ref_dir.path, "crash0");
    const auto ref_view = golden_view(ref, "crash0");

    struct Crash {};
    std::size_t scenarios = 0;
    for (const std::string point : {"before_append", "mid_append", "after_append", "after_snapshot"})
        for (std::size_t at : {std::size_t{1}, std::size_t{7}, std::size_t{30}, ref_inputs.size() - 1}) {
            TempDir tmp;
            const auto opts = options_for(tmp.path, [] { return std::string("crash0"); });
            std::size_t turns_done = 0;
            {
                Service svc(opts, cat);
                svc.create_session("demo", "albert");
                for (std::size_t k = 1; k < at; ++k) feed(svc, "crash0", ref_inputs[k]);
                turns_done = at;
                svc.set_fault_hook([&](std::string_view p) {
                    if (p == point) throw Crash{};
                });
                CHECK_THROWS_AS(feed(svc, "crash0", ref_inputs[at]), Crash);
            }
            const bool durable = point == "after_append" || point == "after_snapshot";
            Service svc(opts, cat);
            const auto st = svc.state("crash0");
            const std::vector<dialogue::UserEvent> prefix(ref_inputs.begin(),
                                                          ref_inputs.begin() + static_cast<long>(turns_done + (durable ? 1 : 0)));
            CHECK_MESSAGE(st == fold(*cat, svc.meta("crash0"), prefix), point << " at " << at);
            CHECK(log_inputs(tmp.path, "crash0").size() == prefix.size());
            CHECK(svc.verify("crash0"));
            // resume: same inputs from there give the reference conversation
            for (std::size_t k = prefix.size(); k < ref_inputs.size(); ++k) feed(svc, "crash0", ref_inputs[k]);
            CHECK(svc.meta("crash0").status == SessionStatus::completed);
            CHECK(golden_view(svc, "crash0") == ref_view);
            ++scenarios;
        }
    CHECK(scenarios == 16);
}

TEST_CASE("durability: every torn tail truncates to the last whole turn") {
    const auto cat = test_catalog();
    TempDir src;
    {
        Service svc(options_for(src.path, [] { return std::string("torn0"); }), cat);
        const auto id = svc.create_session("mini").session_id;
        svc.post_message(id, dialogue::UserEvent::say("thanks a lot"));
        svc.post_message(id, dialogue::UserEvent::say("Kim"));
        svc.post_message(id, dialogue::UserEvent::answer("rate-q", 2));
    }
    const auto full = slurp(src.path / "sessions/torn0/events.jsonl");
    const auto records = log_records(src.path, "torn0");
    // byte offset where each whole batch ends
    std::vector<std::size_t> batch_end;
    std::vector<dialogue::UserEvent> inputs;
    {
        std::size_t pos = 0, left = 0;
        for (const auto& r : records) {
            pos = full.find('\n', pos) + 1;
            if (r["kind"] != "rep_msg") {
                left = r["payload"]["replies"].get<std::size_t>();
                inputs.push_back(dialogue::UserEvent::from_json(r["payload"]["event"]));
            } else {
                --left;
            }
            if (left == 0) batch_end.push_back(pos);
        }
    }
    REQUIRE(batch_end.size() == 4);
    std::size_t cuts = 0;
    for (std::size_t len = 0; len <= full.size(); len += 7) {
        TempDir tmp;
        fs::create_directories(tmp.path / "sessions/torn0");
        fs::copy_file(src.path / "sessions/torn0/meta.json", tmp.path / "sessions/torn0/meta.json");
        {
            std::ofstream(tmp.path / "sessions/torn0/events.jsonl", std::ios::binary) << full.substr(0, len);
        }
        const auto whole = static_cast<std::size_t>(
            std::upper_bound(batch_end.begin(), batch_end.end(), len) - batch_end.begin());
        Service svc(options_for(tmp.path), cat);
        const std::vector<dialogue::UserEvent> prefix(inputs.begin(), inputs.begin() + static_cast<long>(whole));
        CHECK(svc.state("torn0") == fold(*cat, svc.meta("torn0"), prefix));
        CHECK(fs::file_size(tmp.path / "sessions/torn0/events.jsonl") == (whole ? batch_end[whole - 1] : 0));
        CHECK(svc.verify("torn0"));
        ++cuts;
    }
    CHECK(cuts > 40);
}

TEST_CASE("concurrency: parallel sessions and racing writers stay linearizable") {
    TempDir tmp;
    Service svc(options_for(tmp.path, counter_ids("c")), test_catalog());
    const auto user = demo_user();
    std::vector<std::thread> pool;
    std::vector<SimulationResult> runs(6);
    for (std::size_t t = 0; t < runs.size(); ++t)
        pool.emplace_back([&, t] { runs[t] = simulate(svc, user, "demo", t % 2 ? "kaya" : "albert"); });

    // several writers on one session
    const auto shared = svc.create_session("demo").session_id;
    svc.post_message(shared, dialogue::UserEvent::say("Hi, I am Lee."));
    std::mutex seen_m;
    std::vector<std::pair<dialogue::UserEvent, std::vector<ordered_json>>> seen;
    for (int w = 0; w < 4; ++w)
        pool.emplace_back([&, w] {
            for (int k = 0; k < 15; ++k) {
                const auto ev = dialogue::UserEvent::say("writer " + std::to_string(w) + " line " + std::to_string(k) + " about film");
                const auto r = svc.post_message(shared, ev);
                std::lock_guard lock(seen_m);
                seen.emplace_back(ev, r.replies);
            }
        });
    for (auto& th : pool) th.join();

    for (const auto& r : runs) {
        CHECK(r.completed);
        CHECK(svc.verify(r.session_id));
    }
    CHECK(svc.verify(shared));
    // each caller's replies sit directly after its own input in the log
    const auto recs = log_records(tmp.path, shared);
    std::map<std::string, std::vector<json>> by_text;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        CHECK(recs[i]["seq"] == i + 1);
        if (recs[i]["kind"] != "user_msg") continue;
        const auto n = recs[i]["payload"]["replies"].get<std::size_t>();
        std::vector<json> replies;
        for (std::size_t k = 1; k <= n; ++k) {
            REQUIRE(i + k < recs.size());
            CHECK(recs[i + k]["kind"] == "rep_msg");
            replies.push_back(recs[i + k]["payload"]);
        }
        by_text[recs[i]["payload"]["event"]["text"].get<std::string>()] = replies;
    }
    REQUIRE(seen.size() == 60);
    for (const auto& [ev, replies] : seen) {
        const auto& logged = by_text.at(ev.text);
        REQUIRE(logged.size() == replies.size());
        for (std::size_t k = 0; k < replies.size(); ++k) CHECK(json::parse(replies[k].dump()) == logged[k]);
    }
    // and the whole history folds to the live state
    CHECK(svc.state(shared) == fold(*test_catalog(), svc.meta(shared), log_inputs(tmp.path, shared)));
}

TEST_CASE("simulated demo user matches the golden transcripts") {
    for (const std::string persona : {"albert", "kaya"}) {
        TempDir tmp;
        Service svc(options_for(tmp.path, [persona] { return "golden-" + persona; }), test_catalog());
        const auto r = simulate(svc, demo_user(), "demo", persona);
        CHECK(r.completed);
        const auto expected = slurp(kRoot / "tests/golden" / ("demo_" + persona + ".json"));
        CHECK_MESSAGE(golden_view(svc, r.session_id).dump(1) + "\n" == expected, persona);
        CHECK(svc.verify(r.session_id));
    }
}

TEST_CASE("http: routes, statuses and the static client") {
    TempDir tmp;
    TempDir web;
    std::ofstream(web.path / "index.html") << "<!doctype html><title>interview</title>";
    Service svc(options_for(tmp.path, counter_ids("w")), test_catalog());
    httplib::Server server;
    mount_routes(server, svc, web.path);
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    httplib::Client cli("127.0.0.1", port);

    auto health = cli.Get("/healthz");
    REQUIRE(health);
    CHECK(health->status == 200);

    auto page = cli.Get("/index.html");
    REQUIRE(page);
    CHECK(page->status == 200);
    CHECK(page->body.find("interview") != std::string::npos);

    auto created = cli.Post("/sessions", R"({"script_id": "mini", "persona_id": "kaya"})", "application/json");
    REQUIRE(created);
    CHECK(created->status == 201);
    const auto cj = json::parse(created->body);
    const std::string id = cj["session_id"];
    CHECK(cj["persona"]["avatar"] == "/assets/kaya.svg");
    CHECK(cj["replies"][1]["widget"]["question_id"] == "name-q");

    auto status_of = [&](const httplib::Result& r) { return r ? r->status : -1; };
    auto code = [&](const httplib::Result& r) { return r ? json::parse(r->body).value("code", "") : ""; };
    const std::string msgs = "/sessions/" + id + "/messages";

    auto r = cli.Post("/sessions", R"({"script_id": "nope"})", "application/json");
    CHECK(status_of(r) == 404);
    CHECK(code(r) == "unknown_script");
    r = cli.Post(msgs, "not json", "application/json");
    CHECK(status_of(r) == 400);
    r = cli.Post(msgs, R"({"question_id": "name-q"})", "application/json");
    CHECK(status_of(r) == 400);
    r = cli.Post("/sessions/none/messages", R"({"text": "hi"})", "application/json");
    CHECK(status_of(r) == 404);
    CHECK(code(r) == "session_not_found");
    r = cli.Get("/sessions/" + id + "/report");
    CHECK(status_of(r) == 409);
    CHECK(code(r) == "session_not_complete");

    r = cli.Post(msgs, R"({"text": "Jo"})", "application/json");
    REQUIRE(status_of(r) == 200);
    const auto rj = json::parse(r->body);
    const std::string href = rj["replies"][0]["widget"]["href"];
    r = cli.Post(msgs, R"({"question_id": "rate-q", "value": 7})", "application/json");
    CHECK(status_of(r) == 422);
    CHECK(code(r) == "validation_error");

    r = cli.Get(href);
    CHECK(status_of(r) == 302);
    CHECK(r->get_header_value("Location") == "https://example.org/doc");
    r = cli.Get("/r/" + id + "/ffff");
    CHECK(status_of(r) == 404);
    CHECK(code(r) == "unknown_link");

    auto s = cli.Get("/sessions/" + id);
    REQUIRE(status_of(s) == 200);
    CHECK(json::parse(s->body)["pending_question"] == "rate-q");
    CHECK(json::parse(s->body)["status"] == "active");

    r = cli.Post(msgs, R"({"question_id": "rate-q", "value": 2})", "application/json");
    CHECK(status_of(r) == 200);
    CHECK(json::parse(r->body)["status"] == "completed");
    r = cli.Post(msgs, R"({"text": "bye"})", "application/json");
    CHECK(status_of(r) == 409);
    CHECK(code(r) == "session_completed");

    r = cli.Get("/sessions/" + id + "/report");
    REQUIRE(status_of(r) == 200);
    const auto report = json::parse(r->body);
    CHECK(report["wc"] == 0);
    CHECK(report["wl"] == 1);
    CHECK(report["im"].is_null());
    CHECK(report["traits"].size() == 35);

    r = cli.Get("/sessions/" + id + "/transcript");
    REQUIRE(status_of(r) == 200);
    const auto tj = json::parse(r->body);
    CHECK(tj["events"].size() == log_records(tmp.path, id).size());
    CHECK(tj["events"][0]["kind"] == "system");

    r = cli.Get("/results?sort_by=wl&order=asc");
    REQUIRE(status_of(r) == 200);
    CHECK(json::parse(r->body)["results"].size() == 1);
    r = cli.Get("/results?sort_by=shoe_size");
    CHECK(status_of(r) == 400);
    CHECK(code(r) == "unknown_sort_key");

    server.stop();
    th.join();
}

TEST_CASE("http: shipped client page and persona avatars are served") {
    TempDir tmp;
    Service svc(options_for(tmp.path), test_catalog());
    httplib::Server server;
    mount_routes(server, svc, kRoot / "web");
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    httplib::Client cli("127.0.0.1", port);
    auto home = cli.Get("/");
    REQUIRE(home);
    CHECK(home->status == 200);
    CHECK(home->get_header_value("Content-Type").find("text/html") == 0);
    for (const auto& [id, p] : test_catalog()->personas) {
        auto r = cli.Get(p.avatar);
        REQUIRE_MESSAGE(r, id);
        CHECK_MESSAGE(r->status == 200, id);
        CHECK(r->get_header_value("Content-Type") == "image/svg+xml");
    }
    CHECK(cli.Get("/assets/nobody.svg")->status == 404);
    server.stop();
    th.join();
}
