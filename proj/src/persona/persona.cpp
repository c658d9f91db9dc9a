#include "rep/persona/persona.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rep/common/error.hpp"
#include "rep/fsm/text.hpp"

namespace rep::persona {

namespace {

constexpr std::array<std::string_view, kCueCount> kCueNames = {
    "emoticon",        "exclamation",   "first_person_affective", "question_form",
    "suggestion_form", "third_person_declarative", "terse",       "assertion_form",
};

const std::set<std::string, std::less<>> kFirstPerson = {"i", "i'm", "i've", "i'd", "i'll", "me", "my",
                                                         "mine", "we", "we're", "us", "our"};
const std::set<std::string, std::less<>> kAffect = {
    "love", "loved", "like", "enjoy", "enjoyed", "happy", "glad", "excited", "cry", "feel", "felt",
    "thrilled", "delighted", "wonderful", "amazing", "awesome", "fun", "sad", "sorry", "hope", "wish", "adore"};
const std::set<std::string, std::less<>> kThirdOpeners = {"it", "it's", "this", "that", "that's", "there",
                                                          "these", "those", "he", "she", "they"};
const std::set<std::string, std::less<>> kAssertive = {"must", "should", "need", "needs", "required",
                                                       "expect", "expected", "will", "answer", "state", "proceed"};

const std::vector<std::vector<std::string>> kSuggestionOpeners = {
    {"let's"}, {"how", "about"}, {"why", "not"}, {"maybe"}, {"perhaps"}, {"you", "could"},
    {"you", "might"}, {"would", "you", "like"}, {"feel", "free"}, {"try"},
};

bool is_word(const std::string& t) {
    const auto c = static_cast<unsigned char>(t[0]);
    return std::isalnum(c) || c >= 0x80;
}

struct Sentence {
    std::vector<std::string> words;
    std::string terminator;
};

std::vector<Sentence> sentences_of(const std::vector<std::string>& tokens) {
    std::vector<Sentence> out;
    bool open = false;
    for (const auto& t : tokens) {
        if (t == "." || t == "!" || t == "?") {
            if (open) out.back().terminator = t;
            open = false;
        } else if (is_word(t)) {
            if (!open) out.emplace_back();
            open = true;
            out.back().words.push_back(t);
        }
    }
    return out;
}

bool starts_with(const std::vector<std::string>& words, const std::vector<std::string>& prefix) {
    if (words.size() < prefix.size()) return false;
    return std::equal(prefix.begin(), prefix.end(), words.begin());
}

} // namespace

std::string_view cue_name(Cue c) { return kCueNames[static_cast<std::size_t>(c)]; }

Cue cue_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kCueCount; ++i)
        if (kCueNames[i] == name) return static_cast<Cue>(i);
    throw NotFound("unknown cue class: " + std::string(name));
}

CueCounts detect_cues(std::string_view text) {
    static const std::regex emoticon(R"(^(?:[:;]-?[()dpo/]|<3|:'\()$)");
    CueCounts c{};
    auto at = [&](Cue cue) -> double& { return c[static_cast<std::size_t>(cue)]; };

    const auto tokens = fsm::tokenize(text);
    std::size_t words = 0;
    for (const auto& t : tokens) {
        if (std::regex_match(t, emoticon)) at(Cue::emoticon) += 1;
        else if (t == "!") at(Cue::exclamation) += 1;
        else if (t == "?") at(Cue::question_form) += 1;
        else if (is_word(t)) ++words;
    }
    at(Cue::terse) = static_cast<double>(words >= 12 ? 0 : 12 - words);

    for (const auto& s : sentences_of(tokens)) {
        bool first = false, affect = false, assertive = false;
        for (const auto& w : s.words) {
            first = first || kFirstPerson.count(w) > 0;
            affect = affect || kAffect.count(w) > 0;
            assertive = assertive || kAssertive.count(w) > 0;
        }
        if (first && affect) at(Cue::first_person_affective) += 1;
        for (const auto& p : kSuggestionOpeners)
            if (starts_with(s.words, p)) {
                at(Cue::suggestion_form) += 1;
                break;
            }
        const bool question = s.terminator == "?";
        if (!question && kThirdOpeners.count(s.words.front()) > 0) at(Cue::third_person_declarative) += 1;
        if (!question && assertive) at(Cue::assertion_form) += 1;
    }
    return c;
}

void Persona::validate() const {
    bool positive = false;
    for (const auto& [cue, w] : weights) {
        if (!std::isfinite(w)) throw ValidationError("persona " + id + ": non-finite weight for " + std::string(cue_name(cue)));
        positive = positive || w > 0;
    }
    if (!positive) throw ValidationError("persona " + id + ": no positive cue weight");
}

Persona Persona::from_json_text(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("persona: ") + e.what());
    }
    Persona p;
    try {
        p.id = j.at("id").get<std::string>();
        p.name = j.at("name").get<std::string>();
        p.avatar = j.value("avatar", std::string());
        p.descriptors = j.value("descriptors", std::vector<std::string>{});
        for (const auto& [k, v] : j.at("weights").items()) p.weights[cue_from_name(k)] = v.get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("persona: ") + e.what());
    }
    p.validate();
    return p;
}

namespace {
std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFound("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Calls `slot(name)` for every {name} and `text(piece)` for the rest.
template <class OnText, class OnSlot>
void walk_template(std::string_view t, OnText&& text, OnSlot&& slot) {
    std::size_t i = 0;
    while (i < t.size()) {
        const auto open = t.find('{', i);
        const auto stray = t.find('}', i);
        if (stray < open) throw ValidationError("unbalanced '}' in template: " + std::string(t));
        if (open == std::string_view::npos) {
            text(t.substr(i));
            return;
        }
        const auto close = t.find('}', open);
        if (close == std::string_view::npos) throw ValidationError("unbalanced '{' in template: " + std::string(t));
        text(t.substr(i, open - i));
        slot(t.substr(open + 1, close - open - 1));
        i = close + 1;
    }
}
} // namespace

Persona Persona::load(const std::string& path) { return from_json_text(read_file(path)); }

double style_score(std::string_view text, const Persona& persona) {
    const auto counts = detect_cues(text);
    double s = 0;
    for (const auto& [cue, w] : persona.weights) s += w * counts[static_cast<std::size_t>(cue)];
    return s;
}

std::vector<std::string> ResponseTemplate::slots() const {
    std::set<std::string> names;
    if (!alternatives.empty())
        walk_template(alternatives.front(), [](std::string_view) {}, [&](std::string_view n) { names.emplace(n); });
    return {names.begin(), names.end()};
}

void ResponseTemplate::validate() const {
    if (alternatives.empty()) throw ValidationError("template " + template_id + " has no alternatives");
    const auto expected = slots();
    for (const auto& alt : alternatives) {
        std::set<std::string> names;
        walk_template(alt, [](std::string_view) {}, [&](std::string_view n) { names.emplace(n); });
        if (!std::equal(names.begin(), names.end(), expected.begin(), expected.end()))
            throw ValidationError("template " + template_id + ": alternatives use different slots");
    }
}

std::map<std::string, ResponseTemplate> parse_templates(std::string_view json_text) {
    std::map<std::string, ResponseTemplate> out;
    try {
        const auto j = nlohmann::json::parse(json_text);
        for (const auto& [id, alts] : j.at("templates").items()) {
            ResponseTemplate t{id, alts.get<std::vector<std::string>>()};
            t.validate();
            out.emplace(id, std::move(t));
        }
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("templates: ") + e.what());
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("templates: ") + e.what());
    }
    return out;
}

std::map<std::string, ResponseTemplate> load_templates(const std::string& path) {
    return parse_templates(read_file(path));
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::string render(const ResponseTemplate& tmpl, const Persona& persona, const Slots& slots, std::uint64_t seed) {
    if (tmpl.alternatives.empty()) throw ValidationError("template " + tmpl.template_id + " has no alternatives");
    std::vector<std::string> filled;
    filled.reserve(tmpl.alternatives.size());
    for (const auto& alt : tmpl.alternatives) {
        std::string out;
        walk_template(
            alt, [&](std::string_view piece) { out += piece; },
            [&](std::string_view name) {
                auto it = slots.find(std::string(name));
                if (it == slots.end())
                    throw MissingSlot("template " + tmpl.template_id + " needs slot '" + std::string(name) + "'");
                out += it->second;
            });
        filled.push_back(std::move(out));
    }
    if (filled.size() == 1) return filled.front();

    double best = -INFINITY;
    std::vector<std::size_t> ties;
    for (std::size_t i = 0; i < filled.size(); ++i) {
        const double s = style_score(filled[i], persona);
        if (s > best) {
            best = s;
            ties.assign(1, i);
        } else if (s == best) {
            ties.push_back(i);
        }
    }
    return filled[ties[splitmix64(seed) % ties.size()]];
}

} // namespace rep::persona
