#include "rep/fsm/pattern.hpp"

#include <regex>

#include "rep/common/error.hpp"
#include "rep/fsm/text.hpp"

namespace rep::fsm {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_special_start(char c) { return c == '[' || c == ']' || c == '|' || c == '"' || c == '/' || c == '\\'; }

void push_merging_gaps(PatternAst& out, Element e) {
    if (auto* g = std::get_if<Gap>(&e.node); g && !out.empty()) {
        if (auto* prev = std::get_if<Gap>(&out.back().node)) {
            prev->min += g->min;
            if (!prev->max || !g->max)
                prev->max.reset();
            else
                *prev->max += *g->max;
            return;
        }
    }
    out.push_back(std::move(e));
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    PatternAst parse() {
        PatternAst out;
        while (true) {
            skip_space();
            if (pos_ >= text_.size()) break;
            push_merging_gaps(out, element());
        }
        if (out.empty()) throw SyntaxError("empty pattern", 0);
        return out;
    }

private:
    void skip_space() {
        while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
    }

    bool at_boundary(std::size_t p) const { return p >= text_.size() || is_space(text_[p]); }

    Element element() {
        const char c = text_[pos_];
        if (c == '[') return alternatives();
        if (c == '"') return literal();
        if (c == '/') return regex();
        if (c == '_' && at_boundary(pos_ + 1)) {
            ++pos_;
            return Element{AnyOne{}};
        }
        if (c == '*' && at_boundary(pos_ + 1)) {
            ++pos_;
            return Element{Gap{0, std::nullopt}};
        }
        if (c == ']' || c == '|') throw SyntaxError(std::string("unexpected '") + c + "'", pos_);
        return Element{Token{bare_word()}};
    }

    // Reads one whitespace-delimited word, honouring a leading backslash
    // escape, and requires it to be a single token.
    std::string bare_word(std::string_view stop = {}) {
        const std::size_t start = pos_;
        std::string raw;
        if (text_[pos_] == '\\') {
            ++pos_;
            if (pos_ >= text_.size() || is_space(text_[pos_])) throw SyntaxError("dangling escape", start);
        }
        while (pos_ < text_.size() && !is_space(text_[pos_]) && stop.find(text_[pos_]) == std::string_view::npos)
            raw.push_back(text_[pos_++]);
        if (raw.empty()) throw SyntaxError("expected a token", start);
        auto toks = tokenize(raw);
        if (toks.size() != 1)
            throw SyntaxError("'" + raw + "' splits into " + std::to_string(toks.size()) +
                                  " tokens; separate them with spaces",
                              start);
        return toks.front();
    }

    Element alternatives() {
        const std::size_t open = pos_++;
        Alternatives alt;
        std::vector<Element> member;
        while (true) {
            skip_space();
            if (pos_ >= text_.size()) throw SyntaxError("unterminated alternatives", open);
            const char c = text_[pos_];
            if (c == '|' || c == ']') {
                if (member.empty()) throw SyntaxError("empty alternative", pos_);
                alt.members.push_back(std::move(member));
                member.clear();
                ++pos_;
                if (c == ']') break;
                continue;
            }
            if (c == '[' || c == '"' || c == '/') throw SyntaxError("alternatives may only contain words", pos_);
            if ((c == '_' || c == '*') && (pos_ + 1 >= text_.size() || is_space(text_[pos_ + 1]) ||
                                           text_[pos_ + 1] == '|' || text_[pos_ + 1] == ']'))
                throw SyntaxError("wildcards are not allowed inside alternatives", pos_);
            member.push_back(Element{Token{bare_word("|]")}});
        }
        return Element{std::move(alt)};
    }

    Element literal() {
        const std::size_t open = pos_++;
        const std::size_t close = text_.find('"', pos_);
        if (close == std::string_view::npos) throw SyntaxError("unterminated string", open);
        auto words = tokenize(text_.substr(pos_, close - pos_));
        if (words.empty()) throw SyntaxError("empty string literal", open);
        pos_ = close + 1;
        if (!at_boundary(pos_)) throw SyntaxError("expected whitespace after string literal", pos_);
        return Element{Literal{std::move(words)}};
    }

    Element regex() {
        const std::size_t open = pos_++;
        std::string expr;
        while (true) {
            if (pos_ >= text_.size()) throw SyntaxError("unterminated regex", open);
            const char c = text_[pos_];
            if (c == '\\' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
                expr.push_back('/');
                pos_ += 2;
                continue;
            }
            if (c == '/') break;
            expr.push_back(c);
            ++pos_;
        }
        ++pos_;
        if (expr.empty()) throw SyntaxError("empty regex", open);
        if (!at_boundary(pos_)) throw SyntaxError("expected whitespace after regex", pos_);
        try {
            std::regex probe(expr, std::regex::ECMAScript);
        } catch (const std::regex_error& e) {
            throw SyntaxError(std::string("invalid regex: ") + e.what(), open);
        }
        return Element{RegexToken{std::move(expr)}};
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

std::vector<Element> lemmatize_member(const std::vector<Element>& member, const Lemmatizer& lemmatizer) {
    std::vector<Element> out;
    out.reserve(member.size());
    for (const auto& e : member) {
        if (const auto* t = std::get_if<Token>(&e.node))
            out.push_back(Element{Token{lemmatizer(t->text)}});
        else
            out.push_back(e);
    }
    return out;
}

std::string escape_word(const std::string& w) {
    if (w.empty()) return w;
    if (is_special_start(w.front()) || ((w == "_" || w == "*"))) return "\\" + w;
    return w;
}

} // namespace

PatternAst parse_pattern(std::string_view text) { return Parser(text).parse(); }

PatternAst normalize(const PatternAst& ast, const Lemmatizer& lemmatizer, const GapPolicy& policy) {
    PatternAst out;
    out.reserve(ast.size() * 2);
    for (const auto& e : ast) {
        Element next = e;
        if (auto* t = std::get_if<Token>(&next.node)) {
            t->text = lemmatizer(t->text);
        } else if (auto* alt = std::get_if<Alternatives>(&next.node)) {
            for (auto& m : alt->members) m = lemmatize_member(m, lemmatizer);
        }
        const bool is_gap = std::holds_alternative<Gap>(next.node);
        if (policy.insert && !is_gap && !out.empty() && !std::holds_alternative<Gap>(out.back().node))
            out.push_back(Element{Gap{0, policy.implicit_max}});
        push_merging_gaps(out, std::move(next));
    }
    return out;
}

std::string to_string(const Element& element) {
    return std::visit(
        [](const auto& n) -> std::string {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Token>) {
                return escape_word(n.text);
            } else if constexpr (std::is_same_v<T, Literal>) {
                std::string s = "\"";
                for (std::size_t i = 0; i < n.words.size(); ++i) s += (i ? " " : "") + n.words[i];
                return s + "\"";
            } else if constexpr (std::is_same_v<T, AnyOne>) {
                return "_";
            } else if constexpr (std::is_same_v<T, Gap>) {
                if (n.min == 0 && !n.max) return "*";
                return "*{" + std::to_string(n.min) + "," + (n.max ? std::to_string(*n.max) : "") + "}";
            } else if constexpr (std::is_same_v<T, Alternatives>) {
                std::string s = "[";
                for (std::size_t i = 0; i < n.members.size(); ++i) {
                    if (i) s += "|";
                    s += to_string(n.members[i]);
                }
                return s + "]";
            } else if constexpr (std::is_same_v<T, RegexToken>) {
                std::string s = "/";
                for (char c : n.expr) {
                    if (c == '/') s += '\\';
                    s += c;
                }
                return s + "/";
            } else {
                return "<class:" + std::to_string(n.class_id) + ">";
            }
        },
        element.node);
}

std::string to_string(const PatternAst& ast) {
    std::string s;
    for (std::size_t i = 0; i < ast.size(); ++i) {
        if (i) s += ' ';
        s += to_string(ast[i]);
    }
    return s;
}

bool is_well_formed(const PatternAst& ast) {
    for (std::size_t i = 0; i < ast.size(); ++i) {
        const auto& e = ast[i];
        if (const auto* g = std::get_if<Gap>(&e.node)) {
            if (g->max && *g->max < g->min) return false;
            if (i > 0 && std::holds_alternative<Gap>(ast[i - 1].node)) return false;
        } else if (const auto* a = std::get_if<Alternatives>(&e.node)) {
            if (a->members.empty()) return false;
            for (const auto& m : a->members)
                if (!is_well_formed(m)) return false;
        }
    }
    return true;
}

} // namespace rep::fsm
