#include "rep/fsm/text.hpp"

#include <algorithm>
#include <array>
#include <unordered_map>

namespace rep::fsm {
namespace {

bool is_word_byte(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '\'' || c >= 0x80;
}

constexpr std::array<std::string_view, 14> kEmoticons = {
    ":-)", ":-(", ":-d", ":-p", ":)", ":(", ":d", ":p", ";)", ";-)", ":/", ":o", "<3", ":'(",
};

// Irregular forms and the -e verbs whose inflections the suffix rules would
// otherwise cut to a non-word stem.
const std::vector<std::pair<std::string_view, std::string_view>> kExceptions = {
    // be / have / do
    {"am", "be"}, {"is", "be"}, {"are", "be"}, {"was", "be"}, {"were", "be"}, {"been", "be"}, {"being", "be"},
    {"has", "have"}, {"had", "have"}, {"having", "have"}, {"does", "do"}, {"did", "do"}, {"done", "do"},
    {"doing", "do"},
    // irregular verbs
    {"went", "go"}, {"gone", "go"}, {"goes", "go"}, {"going", "go"}, {"made", "make"}, {"making", "make"},
    {"took", "take"}, {"taken", "take"}, {"taking", "take"}, {"gave", "give"}, {"given", "give"},
    {"giving", "give"}, {"came", "come"}, {"coming", "come"}, {"saw", "see"}, {"seen", "see"},
    {"knew", "know"}, {"known", "know"}, {"thought", "think"}, {"told", "tell"}, {"said", "say"},
    {"says", "say"}, {"got", "get"}, {"gotten", "get"}, {"getting", "get"}, {"found", "find"},
    {"felt", "feel"}, {"left", "leave"}, {"leaving", "leave"}, {"kept", "keep"}, {"brought", "bring"},
    {"bought", "buy"}, {"taught", "teach"}, {"caught", "catch"}, {"fought", "fight"}, {"ran", "run"},
    {"began", "begin"}, {"begun", "begin"}, {"beginning", "begin"}, {"wrote", "write"}, {"written", "write"},
    {"writing", "write"}, {"spoke", "speak"}, {"spoken", "speak"}, {"chose", "choose"}, {"chosen", "choose"},
    {"choosing", "choose"}, {"became", "become"}, {"becoming", "become"}, {"met", "meet"}, {"sat", "sit"},
    {"stood", "stand"}, {"understood", "understand"}, {"led", "lead"}, {"read", "read"}, {"heard", "hear"},
    {"held", "hold"}, {"lost", "lose"}, {"losing", "lose"}, {"paid", "pay"}, {"sent", "send"},
    {"spent", "spend"}, {"built", "build"}, {"meant", "mean"}, {"ate", "eat"}, {"eaten", "eat"},
    {"drove", "drive"}, {"driven", "drive"}, {"driving", "drive"}, {"grew", "grow"}, {"grown", "grow"},
    {"won", "win"}, {"winning", "win"}, {"fell", "fall"}, {"fallen", "fall"}, {"forgot", "forget"},
    {"forgotten", "forget"}, {"slept", "sleep"}, {"wore", "wear"}, {"worn", "wear"}, {"shown", "show"},
    {"drew", "draw"}, {"drawn", "draw"}, {"flew", "fly"}, {"flown", "fly"}, {"lay", "lie"}, {"lying", "lie"},
    {"dying", "die"}, {"tying", "tie"},
    // -e verbs
    {"liked", "like"}, {"liking", "like"}, {"loved", "love"}, {"loving", "love"}, {"hoped", "hope"},
    {"hoping", "hope"}, {"decided", "decide"}, {"deciding", "decide"}, {"used", "use"}, {"using", "use"},
    {"moved", "move"}, {"moving", "move"}, {"lived", "live"}, {"living", "live"}, {"cared", "care"},
    {"caring", "care"}, {"shared", "share"}, {"sharing", "share"}, {"believed", "believe"},
    {"believing", "believe"}, {"excited", "excite"}, {"exciting", "excite"}, {"closed", "close"},
    {"closing", "close"}, {"changed", "change"}, {"changing", "change"}, {"created", "create"},
    {"creating", "create"}, {"arrived", "arrive"}, {"arriving", "arrive"}, {"managed", "manage"},
    {"managing", "manage"}, {"improved", "improve"}, {"improving", "improve"}, {"achieved", "achieve"},
    {"achieving", "achieve"}, {"prepared", "prepare"}, {"preparing", "prepare"}, {"described", "describe"},
    {"describing", "describe"}, {"involved", "involve"}, {"involving", "involve"}, {"included", "include"},
    {"including", "include"}, {"completed", "complete"}, {"completing", "complete"}, {"continued", "continue"},
    {"continuing", "continue"}, {"served", "serve"}, {"serving", "serve"}, {"solved", "solve"},
    {"solving", "solve"}, {"smiled", "smile"}, {"smiling", "smile"}, {"agreed", "agree"},
    {"agreeing", "agree"}, {"refused", "refuse"}, {"hated", "hate"}, {"hating", "hate"},
    {"danced", "dance"}, {"dancing", "dance"}, {"joked", "joke"}, {"joking", "joke"}, {"imagined", "imagine"},
    {"imagining", "imagine"}, {"organized", "organize"}, {"organizing", "organize"}, {"practiced", "practice"},
    {"practicing", "practice"}, {"scheduled", "schedule"}, {"scheduling", "schedule"}, {"raised", "raise"},
    {"promised", "promise"}, {"argued", "argue"}, {"arguing", "argue"}, {"valued", "value"},
    {"worried", "worry"}, {"worrying", "worry"}, {"applying", "apply"}, {"studying", "study"},
    {"trying", "try"}, {"enjoyed", "enjoy"}, {"played", "play"}, {"stayed", "stay"},
    // nouns
    {"people", "person"}, {"children", "child"}, {"men", "man"}, {"women", "woman"}, {"feet", "foot"},
    {"teeth", "tooth"}, {"mice", "mouse"}, {"lives", "life"}, {"wives", "wife"}, {"knives", "knife"},
    {"leaves", "leaf"}, {"halves", "half"}, {"selves", "self"}, {"themselves", "themselves"},
    {"analyses", "analysis"}, {"crises", "crisis"}, {"criteria", "criterion"}, {"data", "data"},
    {"news", "news"}, {"series", "series"}, {"species", "species"}, {"movies", "movie"}, {"cookies", "cookie"},
    {"ties", "tie"}, {"lies", "lie"}, {"dies", "die"}, {"hundred", "hundred"}, {"wasted", "waste"},
    // -ing and -ed words that are not inflections
    {"something", "something"}, {"nothing", "nothing"}, {"anything", "anything"},
    {"everything", "everything"}, {"morning", "morning"}, {"evening", "evening"}, {"during", "during"},
    {"ceiling", "ceiling"}, {"wedding", "wedding"}, {"interesting", "interesting"}, {"amazing", "amazing"},
    {"boring", "boring"}, {"indeed", "indeed"}, {"sacred", "sacred"},
};

const std::unordered_map<std::string_view, std::string_view>& exception_map() {
    static const auto* map = [] {
        auto* m = new std::unordered_map<std::string_view, std::string_view>();
        for (const auto& [from, to] : kExceptions) m->emplace(from, to);
        return m;
    }();
    return *map;
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y'; }

bool has_vowel(std::string_view s) { return std::any_of(s.begin(), s.end(), is_vowel); }

std::string undouble(std::string_view stem) {
    const std::size_t n = stem.size();
    if (n >= 2 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1]) && stem[n - 1] != 'l' &&
        stem[n - 1] != 's' && stem[n - 1] != 'z')
        return std::string(stem.substr(0, n - 1));
    return std::string(stem);
}

// One application of the exception table or the first matching suffix rule.
std::string lemma_step(std::string_view w) {
    const auto& exc = exception_map();
    if (auto it = exc.find(w); it != exc.end()) return std::string(it->second);
    if (!std::all_of(w.begin(), w.end(), [](char c) { return (c >= 'a' && c <= 'z') || c == '\''; }))
        return std::string(w);
    if (ends_with(w, "'s") && w.size() > 2) return std::string(w.substr(0, w.size() - 2));
    if (w.size() <= 3) return std::string(w);
    if (ends_with(w, "ies") && w.size() > 4) return std::string(w.substr(0, w.size() - 3)) + "y";
    if (ends_with(w, "sses")) return std::string(w.substr(0, w.size() - 2));
    if (ends_with(w, "xes") || ends_with(w, "ches") || ends_with(w, "shes") || ends_with(w, "zzes"))
        return std::string(w.substr(0, w.size() - 2));
    if (ends_with(w, "s")) {
        if (ends_with(w, "ss") || ends_with(w, "us") || ends_with(w, "is")) return std::string(w);
        return std::string(w.substr(0, w.size() - 1));
    }
    if (ends_with(w, "ing")) {
        const auto stem = w.substr(0, w.size() - 3);
        if (stem.size() >= 3 && has_vowel(stem)) return undouble(stem);
        return std::string(w);
    }
    if (ends_with(w, "ied") && w.size() > 4) return std::string(w.substr(0, w.size() - 3)) + "y";
    if (ends_with(w, "eed")) return std::string(w);
    if (ends_with(w, "ed")) {
        const auto stem = w.substr(0, w.size() - 2);
        if (stem.size() >= 3 && has_vowel(stem)) return undouble(stem);
    }
    return std::string(w);
}

} // namespace

std::string to_lower(std::string_view text) {
    std::string out(text);
    for (auto& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

std::vector<std::string> tokenize(std::string_view raw) {
    const std::string text = to_lower(raw);
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        const auto c = static_cast<unsigned char>(text[i]);
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
            ++i;
            continue;
        }
        bool emoticon = false;
        for (auto e : kEmoticons) {
            if (text.compare(i, e.size(), e) == 0) {
                // ":d" must not swallow the start of a word such as ":dog".
                const std::size_t after = i + e.size();
                if ((e.back() == 'd' || e.back() == 'p' || e.back() == 'o') && after < text.size() &&
                    is_word_byte(static_cast<unsigned char>(text[after])))
                    continue;
                tokens.emplace_back(e);
                i = after;
                emoticon = true;
                break;
            }
        }
        if (emoticon) continue;
        if (is_word_byte(c) && c != '\'') {
            std::size_t j = i;
            while (j < text.size() && is_word_byte(static_cast<unsigned char>(text[j]))) ++j;
            // Trailing apostrophes are quotes, not part of the word.
            std::size_t end = j;
            while (end > i + 1 && text[end - 1] == '\'') --end;
            tokens.emplace_back(text.substr(i, end - i));
            for (std::size_t k = end; k < j; ++k) tokens.emplace_back("'");
            i = j;
            continue;
        }
        tokens.emplace_back(1, static_cast<char>(c));
        ++i;
    }
    return tokens;
}

std::string lemmatize(std::string_view token) {
    std::string once = lemma_step(token);
    if (once == token) return once;
    // Only accept a rewrite that is itself a fixed point; this keeps the
    // function idempotent whatever the rule table contains.
    if (lemma_step(once) == once) return once;
    return std::string(token);
}

const std::vector<std::pair<std::string_view, std::string_view>>& lemma_exceptions() { return kExceptions; }

} // namespace rep::fsm
