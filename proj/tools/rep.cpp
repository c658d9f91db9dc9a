// Command line front end: pattern compilation and benchmarks, trait model
// fitting and scoring, synthetic corpora, the HTTP server and the demo user.
#include "rep/service/http.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "rep/common/error.hpp"
#include "rep/fsm/synthetic.hpp"
#include "rep/fsm/text.hpp"
#include "rep/service/simulate.hpp"
#include "rep/traits/synthetic.hpp"

using nlohmann::json;
using nlohmann::ordered_json;
using namespace rep;

namespace {

std::string slurp(const std::string& path) {
    if (path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFound("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, std::string_view data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io_error", "cannot write " + path);
    out << data;
}

fsm::CompileOptions compile_options(bool no_insert) {
    fsm::CompileOptions o;
    o.gaps.insert = !no_insert;
    return o;
}

fsm::CompiledMatcher compile_file(const std::string& path, bool no_insert, fsm::CompileStats* stats = nullptr) {
    return fsm::compile(fsm::parse_pattern_lines(slurp(path)), [](std::string_view t) { return fsm::lemmatize(t); },
                        compile_options(no_insert), stats);
}

ordered_json stats_json(const fsm::CompileStats& s) {
    return {{"input_patterns", s.input_patterns}, {"rewritten_patterns", s.rewritten_patterns},
            {"classes", s.classes},               {"nfa_states", s.nfa_states},
            {"dfa_states", s.dfa_states},         {"state_count", s.min_states},
            {"columns", s.columns},               {"edges", s.edges},
            {"seconds", s.seconds}};
}

std::vector<std::string> read_corpus_texts(const std::string& path) {
    std::vector<std::string> texts;
    std::istringstream in(slurp(path));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("text")) throw FormatError("corpus line is not {\"text\": ...}");
        texts.push_back(j["text"].get<std::string>());
    }
    return texts;
}

std::atomic<bool> g_stop{false};
httplib::Server* g_server = nullptr;

void on_signal(int) {
    g_stop = true;
    if (g_server) g_server->stop();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Recruiting interview engine"};
    app.require_subcommand(1);

    std::string patterns_path, out_path, lexicon_path = "data/lexicon/lexicon.tsv",
                                         lexicon_patterns = "data/lexicon/patterns.tsv", model_path = "data/model.json";
    bool no_insert = false;
    std::uint64_t seed = 1;

    auto* c_compile = app.add_subcommand("compile", "Compile a pattern file to a serialized matcher");
    c_compile->add_option("patterns", patterns_path, "<id>\\t<pattern> lines")->required();
    c_compile->add_option("-o,--out", out_path, "Matcher output file");
    c_compile->add_flag("--no-insert", no_insert, "Do not insert implicit gaps");

    std::size_t bench_n = 10000;
    std::size_t bench_words = 1'000'000;
    auto* c_bcomp = app.add_subcommand("bench-compile", "Time compilation of synthetic patterns");
    c_bcomp->add_option("-n,--patterns", bench_n, "Pattern count");
    c_bcomp->add_option("--seed", seed);
    c_bcomp->add_flag("--no-insert", no_insert);

    auto* c_bmatch = app.add_subcommand("bench-match", "Measure matching throughput on a synthetic stream");
    c_bmatch->add_option("-n,--patterns", bench_n, "Pattern count");
    c_bmatch->add_option("-w,--words", bench_words, "Stream length in words");
    c_bmatch->add_option("--seed", seed);
    c_bmatch->add_flag("--no-insert", no_insert);

    std::string corpus_path;
    auto* c_fit = app.add_subcommand("fit", "Fit the trait model on a text corpus");
    c_fit->add_option("corpus", corpus_path, "JSON lines with a \"text\" field")->required();
    c_fit->add_option("-o,--out", model_path, "Model output");
    c_fit->add_option("--lexicon", lexicon_path);
    c_fit->add_option("--lexicon-patterns", lexicon_patterns);

    std::string text_path = "-";
    auto* c_infer = app.add_subcommand("infer", "Score a text on every trait");
    c_infer->add_option("text", text_path, "Text file, or - for stdin");
    c_infer->add_option("--model", model_path);
    c_infer->add_option("--lexicon", lexicon_path);
    c_infer->add_option("--lexicon-patterns", lexicon_patterns);

    std::size_t users = 2000;
    std::uint32_t words = 800;
    out_path.clear();
    auto* c_gen = app.add_subcommand("gen-corpus", "Generate a synthetic corpus over the lexicon cues");
    c_gen->add_option("-o,--out", out_path, "JSON lines output")->required();
    c_gen->add_option("--users", users);
    c_gen->add_option("--words", words, "Words per user");
    c_gen->add_option("--seed", seed);
    c_gen->add_option("--lexicon", lexicon_path);

    std::string data_root = "data", state_dir = "var", web_dir = "web", host = "127.0.0.1";
    int port = 8080;
    std::int64_t ttl_s = 24 * 3600;
    auto* c_serve = app.add_subcommand("serve", "Run the HTTP service");
    c_serve->add_option("--data", data_root, "Scripts, personas, lexicon and model");
    c_serve->add_option("--state", state_dir, "Session storage");
    c_serve->add_option("--web", web_dir, "Static files served under /");
    c_serve->add_option("--host", host);
    c_serve->add_option("--port", port);
    c_serve->add_option("--ttl", ttl_s, "Seconds before an idle session is abandoned");

    std::string profile_path = "data/sim/demo_user.json", script_id, persona_id;
    auto* c_sim = app.add_subcommand("simulate", "Run the scripted demo user through one interview");
    c_sim->add_option("--data", data_root);
    c_sim->add_option("--state", state_dir);
    c_sim->add_option("--profile", profile_path);
    c_sim->add_option("--script", script_id);
    c_sim->add_option("--persona", persona_id);
    std::string fixed_id;
    c_sim->add_option("--session-id", fixed_id, "Use this session id (it also fixes the render seed)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*c_compile) {
            fsm::CompileStats stats;
            const auto m = compile_file(patterns_path, no_insert, &stats);
            if (!out_path.empty()) spit(out_path, m.serialize());
            auto j = stats_json(stats);
            j["state_count"] = m.state_count();
            std::cout << j.dump(2) << "\n";
        } else if (*c_bcomp) {
            fsm::SyntheticPatternOptions o;
            o.count = bench_n;
            o.seed = seed;
            const auto pats = fsm::synthetic_patterns(o);
            fsm::CompileStats stats;
            fsm::compile(pats, [](std::string_view t) { return fsm::lemmatize(t); }, compile_options(no_insert), &stats);
            std::cout << stats_json(stats).dump(2) << "\n";
        } else if (*c_bmatch) {
            fsm::SyntheticPatternOptions o;
            o.count = bench_n;
            o.seed = seed;
            const auto pats = fsm::synthetic_patterns(o);
            const auto m = fsm::compile(pats, [](std::string_view t) { return fsm::lemmatize(t); },
                                        compile_options(no_insert));
            const auto stream = fsm::synthetic_stream(pats, bench_words, o.vocabulary, 0.3, seed + 1);
            const auto syms = m.intern_tokens(stream.words);
            std::uint64_t hits = 0;
            const auto t0 = std::chrono::steady_clock::now();
            for (std::size_t u = 0; u + 1 < stream.utterance_offsets.size(); ++u) {
                const auto b = stream.utterance_offsets[u], e = stream.utterance_offsets[u + 1];
                m.scan(std::span<const fsm::SymbolId>(syms.data() + b, e - b), [&](auto, auto, auto) { ++hits; });
            }
            const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::cout << ordered_json{{"patterns", bench_n}, {"tokens", syms.size()}, {"hits", hits}, {"seconds", sec},
                                      {"tokens_per_second", static_cast<double>(syms.size()) / sec}}
                             .dump(2)
                      << "\n";
        } else if (*c_fit) {
            const auto lex = traits::EvidenceLexicon::load(lexicon_path);
            const auto m = compile_file(lexicon_patterns, false);
            lex.check_against(m);
            std::vector<std::vector<std::uint32_t>> counts;
            std::vector<std::uint32_t> tokens;
            for (const auto& t : read_corpus_texts(corpus_path)) {
                auto ev = traits::extract_evidence(t, lex, m);
                counts.push_back(std::move(ev.counts));
                tokens.push_back(ev.token_count);
            }
            const auto model = traits::fit_model(counts, tokens, lex);
            model.save(model_path);
            ordered_json summary = ordered_json::array();
            for (const auto& f : model.traits)
                summary.push_back({{"trait", f.trait_id}, {"iterations", f.iterations}, {"converged", f.converged},
                                   {"identified", f.identified}, {"log_likelihood", f.log_likelihood}});
            std::cout << ordered_json{{"users", counts.size()}, {"model", model_path}, {"traits", summary}}.dump(2) << "\n";
        } else if (*c_infer) {
            const auto res = service::TraitResources::load(model_path, lexicon_path, lexicon_patterns);
            const auto ev = traits::extract_evidence(slurp(text_path), res->lexicon, res->matcher);
            ordered_json out = ordered_json::array();
            for (const auto& s : traits::infer_all(res->model, res->lexicon, ev))
                out.push_back({{"trait_id", s.trait_id}, {"theta", s.theta}, {"sd", s.sd}, {"evidence_used", s.evidence_used}});
            std::cout << out.dump(2) << "\n";
        } else if (*c_gen) {
            const auto spec = traits::spec_from_lexicon(traits::EvidenceLexicon::load(lexicon_path), seed);
            const auto corpus = traits::generate_synthetic_corpus(spec, users, words, seed + 1, true);
            std::ofstream out(out_path);
            if (!out) throw Error("io_error", "cannot write " + out_path);
            for (std::size_t u = 0; u < corpus.texts.size(); ++u) {
                ordered_json theta;
                for (std::size_t t = 0; t < corpus.trait_ids.size(); ++t)
                    theta[corpus.trait_ids[t]] = corpus.theta(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(t));
                out << ordered_json{{"user", u}, {"theta", theta}, {"text", corpus.texts[u]}}.dump() << "\n";
            }
            std::cerr << "wrote " << corpus.texts.size() << " users to " << out_path << "\n";
        } else if (*c_serve) {
            service::ServiceOptions opts;
            opts.data_dir = state_dir;
            opts.session_ttl_ms = ttl_s * 1000;
            service::Service svc(opts, service::load_catalog(data_root));
            httplib::Server server;
            service::mount_routes(server, svc, web_dir);
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::thread reaper([&] {
                while (!g_stop) {
                    std::this_thread::sleep_for(std::chrono::seconds(1));
                    static int tick = 0;
                    if (++tick % 60 == 0) svc.expire_idle();
                }
            });
            std::cerr << "listening on http://" << host << ":" << port << "\n";
            const bool ok = server.listen(host, port);
            g_stop = true;
            reaper.join();
            if (!ok && !g_server) return 1;
        } else if (*c_sim) {
            service::ServiceOptions opts;
            opts.data_dir = state_dir;
            if (!fixed_id.empty()) opts.new_session_id = [fixed_id] { return fixed_id; };
            service::Service svc(opts, service::load_catalog(data_root));
            const auto r = service::simulate(svc, service::UserProfile::load(profile_path), script_id, persona_id);
            std::cerr << "session " << r.session_id << " after " << r.messages << " messages\n";
            std::cout << service::golden_view(svc, r.session_id).dump(1) << "\n";
            if (!r.completed) return 3;
        }
    } catch (const Error& e) {
        std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
