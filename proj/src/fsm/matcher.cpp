#include "rep/fsm/matcher.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "rep/common/error.hpp"
#include "rep/fsm/text.hpp"

namespace rep::fsm {

TokenInterner::TokenInterner() {
    entries_.push_back({Kind::Unk, "<unk>"});
    entries_.push_back({Kind::Any, "<any>"});
}

SymbolId TokenInterner::add(Kind kind, std::string text) {
    if (SymbolId existing = find(kind, text); existing != kUnkSymbol) return existing;
    const auto id = static_cast<SymbolId>(entries_.size());
    switch (kind) {
    case Kind::Literal: literal_index_.emplace(text, id); break;
    case Kind::Lemma: lemma_index_.emplace(text, id); break;
    case Kind::RegexMask: mask_index_.emplace(static_cast<std::uint32_t>(std::stoul(text)), id); break;
    default: break;
    }
    entries_.push_back({kind, std::move(text)});
    return id;
}

SymbolId TokenInterner::find(Kind kind, std::string_view text) const {
    const std::unordered_map<std::string, SymbolId>* index = nullptr;
    if (kind == Kind::Literal) index = &literal_index_;
    if (kind == Kind::Lemma) index = &lemma_index_;
    if (index) {
        auto it = index->find(std::string(text));
        return it == index->end() ? kUnkSymbol : it->second;
    }
    if (kind == Kind::RegexMask) {
        auto it = mask_index_.find(static_cast<std::uint32_t>(std::stoul(std::string(text))));
        return it == mask_index_.end() ? kUnkSymbol : it->second;
    }
    for (SymbolId i = 0; i < entries_.size(); ++i)
        if (entries_[i].kind == kind && entries_[i].text == text) return i;
    return kUnkSymbol;
}

void TokenInterner::set_regexes(std::vector<std::string> exprs) {
    regex_text_ = std::move(exprs);
    regex_.clear();
    for (const auto& e : regex_text_) regex_.emplace_back(e, std::regex::ECMAScript | std::regex::optimize);
}

SymbolId TokenInterner::intern(std::string_view surface, const Lemmatizer& lemmatizer) const {
    if (auto it = literal_index_.find(std::string(surface)); it != literal_index_.end()) return it->second;
    const std::string lemma = lemmatizer(surface);
    if (auto it = lemma_index_.find(lemma); it != lemma_index_.end()) return it->second;
    if (!regex_.empty()) {
        std::uint32_t mask = 0;
        for (std::size_t r = 0; r < regex_.size(); ++r)
            if (std::regex_match(lemma, regex_[r])) mask |= 1u << r;
        if (mask != 0)
            if (auto it = mask_index_.find(mask); it != mask_index_.end()) return it->second;
    }
    return kUnkSymbol;
}

std::int64_t CompiledMatcher::pattern_index(std::string_view id) const {
    auto it = std::lower_bound(pattern_ids_.begin(), pattern_ids_.end(), id,
                               [](const std::string& a, std::string_view b) { return a < b; });
    if (it == pattern_ids_.end() || *it != id) return -1;
    return it - pattern_ids_.begin();
}

std::vector<SymbolId> CompiledMatcher::intern_tokens(const std::vector<std::string>& tokens) const {
    std::vector<SymbolId> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(interner_.intern(t, lemmatizer_));
    return out;
}

std::vector<SymbolId> CompiledMatcher::intern_text(std::string_view text) const {
    return intern_tokens(tokenize(text));
}

std::vector<MatchHit> CompiledMatcher::match_stream(std::span<const SymbolId> tokens) const {
    std::vector<MatchHit> hits;
    scan(tokens, [&](std::uint32_t p, std::uint32_t s, std::uint32_t e) { hits.push_back({p, s, e}); });
    return hits;
}

std::size_t CompiledMatcher::count_hits(std::span<const SymbolId> tokens) const {
    std::size_t n = 0;
    scan(tokens, [&](std::uint32_t, std::uint32_t, std::uint32_t) { ++n; });
    return n;
}

bool CompiledMatcher::operator==(const CompiledMatcher& o) const {
    if (classes_.size() != o.classes_.size()) return false;
    for (std::uint32_t c = 0; c < classes_.size(); ++c)
        if (classes_.members(c) != o.classes_.members(c)) return false;
    return pattern_ids_ == o.pattern_ids_ && interner_.entries() == o.interner_.entries() &&
           interner_.regexes() == o.interner_.regexes() &&
           symbol_column_ == o.symbol_column_ && column_count_ == o.column_count_ && start_ == o.start_ &&
           sink_ == o.sink_ && default_ == o.default_ && edge_offset_ == o.edge_offset_ &&
           edge_column_ == o.edge_column_ && edge_target_ == o.edge_target_ && accept_set_ == o.accept_set_ &&
           accept_offset_ == o.accept_offset_ && accept_items_ == o.accept_items_;
}

// ---------------------------------------------------------------------------
// Binary format

namespace {

constexpr char kMagic[8] = {'R', 'E', 'P', 'F', 'S', 'M', '1', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

class Writer {
public:
    void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    void str(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        out_.append(s);
    }
    void vec(const std::vector<std::uint32_t>& v) {
        u32(static_cast<std::uint32_t>(v.size()));
        for (auto x : v) u32(x);
    }
    void raw(const char* p, std::size_t n) { out_.append(p, n); }
    std::string take() { return std::move(out_); }

private:
    std::string out_;
};

class Reader {
public:
    explicit Reader(std::string_view in) : in_(in) {}
    void need(std::size_t n) const {
        if (pos_ + n > in_.size()) throw FormatError("truncated matcher blob");
    }
    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(in_[pos_++]);
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in_[pos_++])) << (8 * i);
        return v;
    }
    std::string str() {
        const auto n = u32();
        need(n);
        std::string s(in_.substr(pos_, n));
        pos_ += n;
        return s;
    }
    std::vector<std::uint32_t> vec() {
        const auto n = u32();
        need(static_cast<std::size_t>(n) * 4);
        std::vector<std::uint32_t> v(n);
        for (auto& x : v) x = u32();
        return v;
    }
    std::string_view raw(std::size_t n) {
        need(n);
        auto s = in_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == in_.size(); }

private:
    std::string_view in_;
    std::size_t pos_ = 0;
};

} // namespace

std::string CompiledMatcher::serialize() const {
    Writer w;
    w.raw(kMagic, sizeof kMagic);
    w.u32(kFormatVersion);
    w.u32(static_cast<std::uint32_t>(pattern_ids_.size()));
    for (const auto& p : pattern_ids_) w.str(p);
    w.u32(static_cast<std::uint32_t>(interner_.size()));
    for (const auto& e : interner_.entries()) {
        w.u8(static_cast<std::uint8_t>(e.kind));
        w.str(e.text);
    }
    w.u32(static_cast<std::uint32_t>(interner_.regexes().size()));
    for (const auto& r : interner_.regexes()) w.str(r);
    w.u32(static_cast<std::uint32_t>(classes_.size()));
    for (std::uint32_t c = 0; c < classes_.size(); ++c) {
        const auto& members = classes_.members(c);
        w.u32(static_cast<std::uint32_t>(members.size()));
        for (const auto& m : members) w.u32(interner_.find(TokenInterner::Kind::Lemma, m));
    }
    w.u32(column_count_);
    w.vec(symbol_column_);
    w.u32(start_);
    w.u32(sink_);
    w.vec(default_);
    w.vec(edge_offset_);
    w.vec(edge_column_);
    w.vec(edge_target_);
    w.vec(accept_set_);
    w.vec(accept_offset_);
    w.vec(accept_items_);
    return w.take();
}

void CompiledMatcher::build_start_row() {
    start_row_.assign(column_count_, default_.empty() ? kNoState : default_[start_]);
    if (default_.empty()) return;
    for (auto e = edge_offset_[start_]; e < edge_offset_[start_ + 1]; ++e) start_row_[edge_column_[e]] = edge_target_[e];
}

CompiledMatcher CompiledMatcher::deserialize(std::string_view blob) {
    Reader r(blob);
    if (r.raw(sizeof kMagic) != std::string_view(kMagic, sizeof kMagic)) throw FormatError("bad matcher magic");
    if (const auto v = r.u32(); v != kFormatVersion)
        throw FormatError("unsupported matcher format version " + std::to_string(v));
    CompiledMatcher m;
    const auto np = r.u32();
    for (std::uint32_t i = 0; i < np; ++i) m.pattern_ids_.push_back(r.str());
    const auto ns = r.u32();
    if (ns < 2) throw FormatError("interner lacks reserved entries");
    for (std::uint32_t i = 0; i < ns; ++i) {
        const auto kind = static_cast<TokenInterner::Kind>(r.u8());
        auto text = r.str();
        if (i < 2) continue;
        m.interner_.add(kind, std::move(text));
    }
    const auto nr = r.u32();
    std::vector<std::string> regexes;
    for (std::uint32_t i = 0; i < nr; ++i) regexes.push_back(r.str());
    m.interner_.set_regexes(std::move(regexes));
    const auto nc = r.u32();
    for (std::uint32_t c = 0; c < nc; ++c) {
        const auto n = r.u32();
        std::vector<std::string> members;
        for (std::uint32_t i = 0; i < n; ++i) {
            const auto id = r.u32();
            if (id >= m.interner_.size()) throw FormatError("class member out of range");
            members.push_back(m.interner_.entry(id).text);
        }
        m.classes_.intern(std::move(members));
    }
    m.column_count_ = r.u32();
    m.symbol_column_ = r.vec();
    m.start_ = r.u32();
    m.sink_ = r.u32();
    m.default_ = r.vec();
    m.edge_offset_ = r.vec();
    m.edge_column_ = r.vec();
    m.edge_target_ = r.vec();
    m.accept_set_ = r.vec();
    m.accept_offset_ = r.vec();
    m.accept_items_ = r.vec();
    if (!r.done()) throw FormatError("trailing bytes after matcher blob");

    const std::size_t n = m.default_.size();
    bool ok = m.symbol_column_.size() == m.interner_.size() && m.edge_offset_.size() == n + 1 &&
              m.edge_column_.size() == m.edge_target_.size() && m.edge_offset_.back() == m.edge_column_.size() &&
              m.accept_set_.size() == n && m.accept_offset_.size() >= 2 &&
              m.accept_offset_.back() == m.accept_items_.size() && m.start_ < n && (m.sink_ == kNoState || m.sink_ < n);
    for (std::size_t i = 0; ok && i < n; ++i)
        ok = m.default_[i] < n && m.accept_set_[i] + 1 < m.accept_offset_.size() &&
             m.edge_offset_[i] <= m.edge_offset_[i + 1];
    for (std::size_t e = 0; ok && e < m.edge_target_.size(); ++e)
        ok = m.edge_target_[e] < n && m.edge_column_[e] < m.column_count_;
    for (std::size_t i = 0; ok && i < m.symbol_column_.size(); ++i) ok = m.symbol_column_[i] < m.column_count_;
    for (std::size_t i = 0; ok && i < m.accept_items_.size(); ++i) ok = m.accept_items_[i] < np;
    if (!ok) throw FormatError("inconsistent matcher tables");
    m.build_start_row();
    return m;
}

// ---------------------------------------------------------------------------
// Pattern files

std::vector<PatternSource> parse_pattern_lines(std::string_view content) {
    std::vector<PatternSource> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= content.size()) {
        std::size_t eol = content.find('\n', pos);
        if (eol == std::string_view::npos) eol = content.size();
        std::string_view line = content.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') {
            if (eol == content.size()) break;
            continue;
        }
        const auto tab = line.find('\t');
        if (tab == std::string_view::npos || tab == 0)
            throw FormatError("pattern line " + std::to_string(line_no) + ": expected <pattern_id>\\t<dsl>");
        out.push_back({std::string(line.substr(0, tab)), std::string(line.substr(tab + 1))});
        if (eol == content.size()) break;
    }
    return out;
}

std::vector<PatternSource> read_pattern_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io_error", "cannot open pattern file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_pattern_lines(ss.str());
}

} // namespace rep::fsm
