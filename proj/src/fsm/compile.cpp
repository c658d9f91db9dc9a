#include <algorithm>
#include <chrono>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "rep/common/error.hpp"
#include "rep/fsm/matcher.hpp"

namespace rep::fsm {
namespace {

using AtomId = std::uint32_t;
constexpr AtomId kAnyAtom = std::numeric_limits<AtomId>::max();

// ---------------------------------------------------------------------------
// Thompson NFA over atoms. Atoms are the predicates a token can satisfy:
// word (by lemma), literal (by surface), class membership, regex, any.

struct Nfa {
    struct State {
        std::vector<std::uint32_t> eps;
        std::vector<std::pair<AtomId, std::uint32_t>> edges;
        std::vector<std::uint32_t> labels;
    };
    std::vector<State> states;

    std::uint32_t add() {
        states.emplace_back();
        return static_cast<std::uint32_t>(states.size() - 1);
    }
};

struct Vocabulary {
    TokenInterner interner;
    std::vector<std::uint32_t> symbol_column;
    std::uint32_t column_count = 0;
    std::vector<std::vector<std::uint32_t>> atom_columns;
    std::unordered_map<std::string, AtomId> word_atom;
    std::unordered_map<std::string, AtomId> literal_atom;
    std::vector<AtomId> class_atom;
    std::unordered_map<std::string, AtomId> regex_atom;
};

void collect(const std::vector<Element>& seq, std::set<std::string>& words, std::set<std::string>& literals,
             std::set<std::string>& regexes) {
    for (const auto& e : seq) {
        if (const auto* t = std::get_if<Token>(&e.node)) words.insert(t->text);
        if (const auto* l = std::get_if<Literal>(&e.node)) literals.insert(l->words.begin(), l->words.end());
        if (const auto* r = std::get_if<RegexToken>(&e.node)) regexes.insert(r->expr);
        if (const auto* a = std::get_if<Alternatives>(&e.node))
            for (const auto& m : a->members) collect(m, words, literals, regexes);
    }
}

Vocabulary build_vocabulary(const std::vector<RewrittenPattern>& patterns, const ClassTable& classes,
                            const Lemmatizer& lemmatizer, const CompileOptions& options) {
    std::set<std::string> words, literals, regex_set;
    for (const auto& p : patterns) collect(p.ast, words, literals, regex_set);
    if (regex_set.size() > options.max_regexes)
        throw CapacityError("pattern batch uses " + std::to_string(regex_set.size()) +
                            " distinct regex tokens; the limit is " + std::to_string(options.max_regexes));

    std::set<std::string> lemmas = words;
    std::unordered_map<std::string, std::vector<std::uint32_t>> classes_of;
    for (std::uint32_t c = 0; c < classes.size(); ++c)
        for (const auto& m : classes.members(c)) {
            lemmas.insert(m);
            classes_of[m].push_back(c);
        }

    Vocabulary v;
    AtomId next_atom = 0;
    for (const auto& w : words) v.word_atom.emplace(w, next_atom++);
    for (const auto& l : literals) v.literal_atom.emplace(l, next_atom++);
    for (std::uint32_t c = 0; c < classes.size(); ++c) v.class_atom.push_back(next_atom++);
    std::vector<std::string> regexes(regex_set.begin(), regex_set.end());
    std::vector<std::regex> compiled;
    for (const auto& r : regexes) {
        v.regex_atom.emplace(r, next_atom++);
        compiled.emplace_back(r, std::regex::ECMAScript);
    }
    v.atom_columns.resize(next_atom);

    for (const auto& l : literals) v.interner.add(TokenInterner::Kind::Literal, l);
    for (const auto& l : lemmas) v.interner.add(TokenInterner::Kind::Lemma, l);
    for (std::uint32_t c = 0; c < classes.size(); ++c)
        v.interner.add(TokenInterner::Kind::Class, "<class:" + std::to_string(c) + ">");
    const std::uint32_t mask_count = regexes.empty() ? 0 : (1u << regexes.size());
    for (std::uint32_t m = 1; m < mask_count; ++m) v.interner.add(TokenInterner::Kind::RegexMask, std::to_string(m));
    v.interner.set_regexes(regexes);

    // Atom signature of every symbol; identical signatures share a column.
    auto lemma_atoms = [&](const std::string& lemma, std::vector<AtomId>& sig) {
        if (auto it = v.word_atom.find(lemma); it != v.word_atom.end()) sig.push_back(it->second);
        if (auto it = classes_of.find(lemma); it != classes_of.end())
            for (auto c : it->second) sig.push_back(v.class_atom[c]);
        for (std::size_t r = 0; r < compiled.size(); ++r)
            if (std::regex_match(lemma, compiled[r])) sig.push_back(v.regex_atom.at(regexes[r]));
    };

    std::map<std::vector<AtomId>, std::uint32_t> column_of_sig;
    column_of_sig.emplace(std::vector<AtomId>{}, 0);
    v.column_count = 1;
    v.symbol_column.assign(v.interner.size(), 0);
    for (SymbolId s = 0; s < v.interner.size(); ++s) {
        const auto& e = v.interner.entry(s);
        std::vector<AtomId> sig;
        switch (e.kind) {
        case TokenInterner::Kind::Literal:
            sig.push_back(v.literal_atom.at(e.text));
            lemma_atoms(lemmatizer(e.text), sig);
            break;
        case TokenInterner::Kind::Lemma: lemma_atoms(e.text, sig); break;
        case TokenInterner::Kind::RegexMask: {
            const auto mask = static_cast<std::uint32_t>(std::stoul(e.text));
            for (std::size_t r = 0; r < regexes.size(); ++r)
                if (mask & (1u << r)) sig.push_back(v.regex_atom.at(regexes[r]));
            break;
        }
        default: break;
        }
        std::sort(sig.begin(), sig.end());
        sig.erase(std::unique(sig.begin(), sig.end()), sig.end());
        auto [it, inserted] = column_of_sig.emplace(sig, v.column_count);
        if (inserted) {
            for (auto a : sig) v.atom_columns[a].push_back(v.column_count);
            ++v.column_count;
        }
        v.symbol_column[s] = it->second;
    }
    return v;
}

class NfaBuilder {
public:
    NfaBuilder(Nfa& nfa, const Vocabulary& vocab) : nfa_(nfa), vocab_(vocab) {}

    // Compiles `element` starting at `from`. Only adds edges out of `from` and
    // fresh states, so `from` may be shared by several fragments.
    std::uint32_t element(std::uint32_t from, const Element& e) {
        return std::visit([&](const auto& n) { return compile(from, n); }, e.node);
    }

    std::uint32_t sequence(std::uint32_t from, const std::vector<Element>& seq) {
        for (const auto& e : seq) from = element(from, e);
        return from;
    }

private:
    std::uint32_t edge(std::uint32_t from, AtomId atom) {
        const auto to = nfa_.add();
        nfa_.states[from].edges.emplace_back(atom, to);
        return to;
    }

    std::uint32_t compile(std::uint32_t from, const Token& t) { return edge(from, vocab_.word_atom.at(t.text)); }
    std::uint32_t compile(std::uint32_t from, const Literal& l) {
        for (const auto& w : l.words) from = edge(from, vocab_.literal_atom.at(w));
        return from;
    }
    std::uint32_t compile(std::uint32_t from, const AnyOne&) { return edge(from, kAnyAtom); }
    std::uint32_t compile(std::uint32_t from, const RegexToken& r) { return edge(from, vocab_.regex_atom.at(r.expr)); }
    std::uint32_t compile(std::uint32_t from, const ClassRef& c) { return edge(from, vocab_.class_atom.at(c.class_id)); }

    std::uint32_t compile(std::uint32_t from, const Gap& g) {
        const auto entry = nfa_.add();
        nfa_.states[from].eps.push_back(entry);
        std::uint32_t cur = entry;
        for (std::uint32_t i = 0; i < g.min; ++i) cur = edge(cur, kAnyAtom);
        if (!g.max) {
            nfa_.states[cur].edges.emplace_back(kAnyAtom, cur);
            return cur;
        }
        std::vector<std::uint32_t> optional_steps;
        for (std::uint32_t i = g.min; i < *g.max; ++i) {
            optional_steps.push_back(cur);
            cur = edge(cur, kAnyAtom);
        }
        for (auto s : optional_steps) nfa_.states[s].eps.push_back(cur);
        return cur;
    }

    std::uint32_t compile(std::uint32_t from, const Alternatives& a) {
        const auto exit = nfa_.add();
        for (const auto& m : a.members) {
            const auto end = sequence(from, m);
            nfa_.states[end].eps.push_back(exit);
        }
        return exit;
    }

    Nfa& nfa_;
    const Vocabulary& vocab_;
};

// ---------------------------------------------------------------------------
// Subset construction

struct Dfa {
    std::vector<std::uint32_t> default_target;
    std::vector<std::uint32_t> edge_offset{0};
    std::vector<std::uint32_t> edge_column;
    std::vector<std::uint32_t> edge_target;
    std::vector<std::uint32_t> accept_set;
    std::vector<std::vector<std::uint32_t>> accept_sets{{}};
    std::uint32_t sink = kNoState;

    std::size_t size() const { return default_target.size(); }
};

class SetPool {
public:
    SetPool() : index_(16, Hash{this}, Eq{this}) {}

    std::size_t size() const { return offsets_.size() - 1; }
    std::span<const std::uint32_t> get(std::uint32_t id) const {
        return {pool_.data() + offsets_[id], offsets_[id + 1] - offsets_[id]};
    }

    // Returns (id, inserted).
    std::pair<std::uint32_t, bool> intern(const std::vector<std::uint32_t>& set) {
        const auto candidate = static_cast<std::uint32_t>(size());
        pool_.insert(pool_.end(), set.begin(), set.end());
        offsets_.push_back(pool_.size());
        auto [it, inserted] = index_.insert(candidate);
        if (!inserted) {
            pool_.resize(offsets_[candidate]);
            offsets_.pop_back();
        }
        return {*it, inserted};
    }

private:
    struct Hash {
        const SetPool* self;
        std::size_t operator()(std::uint32_t id) const {
            std::uint64_t h = 1469598103934665603ull;
            for (auto x : self->get(id)) h = (h ^ x) * 1099511628211ull;
            return static_cast<std::size_t>(h ^ (h >> 29));
        }
    };
    struct Eq {
        const SetPool* self;
        bool operator()(std::uint32_t a, std::uint32_t b) const {
            auto x = self->get(a);
            auto y = self->get(b);
            return std::equal(x.begin(), x.end(), y.begin(), y.end());
        }
    };

    std::vector<std::uint32_t> pool_;
    std::vector<std::size_t> offsets_{0};
    std::unordered_set<std::uint32_t, Hash, Eq> index_;
};

Dfa determinize(const Nfa& nfa, std::uint32_t nfa_start, const Vocabulary& vocab, std::size_t max_states) {
    Dfa dfa;
    SetPool sets;
    std::vector<std::uint32_t> stamp(nfa.states.size(), 0);
    std::uint32_t epoch = 0;
    std::vector<std::uint32_t> stack;

    std::vector<std::uint32_t> closed;
    auto closure = [&](const std::vector<std::uint32_t>& seeds) -> const std::vector<std::uint32_t>& {
        ++epoch;
        closed.clear();
        stack.clear();
        for (auto s : seeds)
            if (stamp[s] != epoch) {
                stamp[s] = epoch;
                stack.push_back(s);
            }
        while (!stack.empty()) {
            const auto s = stack.back();
            stack.pop_back();
            closed.push_back(s);
            for (auto t : nfa.states[s].eps)
                if (stamp[t] != epoch) {
                    stamp[t] = epoch;
                    stack.push_back(t);
                }
        }
        std::sort(closed.begin(), closed.end());
        return closed;
    };

    std::map<std::vector<std::uint32_t>, std::uint32_t> accept_ids;
    accept_ids.emplace(std::vector<std::uint32_t>{}, 0);

    auto state_for = [&](const std::vector<std::uint32_t>& set) {
        auto [id, inserted] = sets.intern(set);
        if (inserted) {
            if (sets.size() > max_states)
                throw CapacityError("DFA exceeds " + std::to_string(max_states) + " states");
            if (set.empty()) dfa.sink = id;
        }
        return id;
    };

    state_for(closure(std::vector<std::uint32_t>{nfa_start}));

    std::vector<std::vector<std::uint32_t>> bucket(vocab.column_count);
    std::vector<std::uint32_t> touched;
    std::vector<std::uint32_t> any_targets;
    std::vector<std::uint32_t> labels;

    for (std::uint32_t d = 0; d < sets.size(); ++d) {
        any_targets.clear();
        labels.clear();
        touched.clear();
        {
            const auto members = sets.get(d);
            for (auto q : members) {
                const auto& st = nfa.states[q];
                labels.insert(labels.end(), st.labels.begin(), st.labels.end());
                for (const auto& [atom, target] : st.edges) {
                    if (atom == kAnyAtom) {
                        any_targets.push_back(target);
                        continue;
                    }
                    for (auto c : vocab.atom_columns[atom]) {
                        if (bucket[c].empty()) touched.push_back(c);
                        bucket[c].push_back(target);
                    }
                }
            }
        }
        std::sort(labels.begin(), labels.end());
        labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
        if (labels.empty()) {
            dfa.accept_set.push_back(0);
        } else {
            auto [ait, ainserted] = accept_ids.emplace(labels, static_cast<std::uint32_t>(dfa.accept_sets.size()));
            if (ainserted) dfa.accept_sets.push_back(labels);
            dfa.accept_set.push_back(ait->second);
        }

        const auto def = state_for(closure(any_targets));
        dfa.default_target.push_back(def);
        std::sort(touched.begin(), touched.end());
        for (auto c : touched) {
            auto& b = bucket[c];
            b.insert(b.end(), any_targets.begin(), any_targets.end());
            const auto target = state_for(closure(b));
            if (target != def) {
                dfa.edge_column.push_back(c);
                dfa.edge_target.push_back(target);
            }
            b.clear();
        }
        dfa.edge_offset.push_back(static_cast<std::uint32_t>(dfa.edge_column.size()));
    }
    return dfa;
}

// ---------------------------------------------------------------------------
// Hopcroft minimization with default transitions.
//
// The symbol alphabet is the column set. A state's transition on a column
// without an explicit edge equals its default, which is also its transition
// on the UNK column (UNK never carries explicit edges). For a splitter block
// A this gives preds(A, c) = (D \ Ex_c) + {s in Ex_c : delta(s, c) in A},
// with D = preds(A, UNK). Once blocks are split by D, splitting by
// preds(A, c) only needs the states of D whose explicit c-edge leaves A and
// the states outside D whose explicit c-edge enters A.

class RefinablePartition {
public:
    explicit RefinablePartition(std::size_t n) : elems_(n), loc_(n), block_(n, 0) {
        std::iota(elems_.begin(), elems_.end(), 0u);
        std::iota(loc_.begin(), loc_.end(), 0u);
    }

    std::uint32_t add_block(std::uint32_t first, std::uint32_t end) {
        first_.push_back(first);
        end_.push_back(end);
        mid_.push_back(first);
        const auto b = static_cast<std::uint32_t>(first_.size() - 1);
        for (auto i = first; i < end; ++i) block_[elems_[i]] = b;
        return b;
    }

    std::vector<std::uint32_t>& elements() { return elems_; }
    void relocate() {
        for (std::uint32_t i = 0; i < elems_.size(); ++i) loc_[elems_[i]] = i;
    }

    std::size_t block_count() const { return first_.size(); }
    std::uint32_t block_of(std::uint32_t e) const { return block_[e]; }
    std::uint32_t size(std::uint32_t b) const { return end_[b] - first_[b]; }
    std::span<const std::uint32_t> members(std::uint32_t b) const {
        return {elems_.data() + first_[b], end_[b] - first_[b]};
    }

    void mark(std::uint32_t e) {
        const auto b = block_[e];
        const auto i = loc_[e];
        if (i < mid_[b]) return;
        if (mid_[b] == first_[b]) touched_.push_back(b);
        const auto j = mid_[b];
        const auto other = elems_[j];
        elems_[i] = other;
        loc_[other] = i;
        elems_[j] = e;
        loc_[e] = j;
        ++mid_[b];
    }

    template <typename OnSplit>
    void split(OnSplit&& on_split) {
        for (auto b : touched_) {
            if (mid_[b] == end_[b]) {
                mid_[b] = first_[b];
                continue;
            }
            const auto nb = add_block(first_[b], mid_[b]);
            first_[b] = mid_[b];
            on_split(b, nb);
        }
        touched_.clear();
    }

private:
    std::vector<std::uint32_t> elems_, loc_, block_;
    std::vector<std::uint32_t> first_, end_, mid_;
    std::vector<std::uint32_t> touched_;
};

std::vector<std::uint32_t> csr_offsets(std::size_t n, const std::vector<std::uint32_t>& keys) {
    std::vector<std::uint32_t> off(n + 1, 0);
    for (auto k : keys) ++off[k + 1];
    for (std::size_t i = 0; i < n; ++i) off[i + 1] += off[i];
    return off;
}

RefinablePartition hopcroft(const Dfa& dfa) {
    const auto n = static_cast<std::uint32_t>(dfa.size());

    std::vector<std::uint32_t> inv_def_off = csr_offsets(n, dfa.default_target);
    std::vector<std::uint32_t> inv_def(n);
    {
        auto fill = inv_def_off;
        for (std::uint32_t s = 0; s < n; ++s) inv_def[fill[dfa.default_target[s]]++] = s;
    }
    std::vector<std::uint32_t> inv_ex_off = csr_offsets(n, dfa.edge_target);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> inv_ex(dfa.edge_target.size());
    {
        auto fill = inv_ex_off;
        for (std::uint32_t s = 0; s < n; ++s)
            for (auto e = dfa.edge_offset[s]; e < dfa.edge_offset[s + 1]; ++e)
                inv_ex[fill[dfa.edge_target[e]]++] = {s, dfa.edge_column[e]};
    }

    RefinablePartition p(n);
    std::stable_sort(p.elements().begin(), p.elements().end(),
                     [&](std::uint32_t a, std::uint32_t b) { return dfa.accept_set[a] < dfa.accept_set[b]; });
    p.relocate();
    std::vector<std::uint32_t> work;
    std::vector<char> in_work;
    for (std::uint32_t i = 0; i < n;) {
        std::uint32_t j = i;
        const auto label = dfa.accept_set[p.elements()[i]];
        while (j < n && dfa.accept_set[p.elements()[j]] == label) ++j;
        work.push_back(p.add_block(i, j));
        in_work.push_back(1);
        i = j;
    }

    auto on_split = [&](std::uint32_t old_block, std::uint32_t new_block) {
        in_work.push_back(0);
        if (in_work[old_block]) {
            work.push_back(new_block);
            in_work[new_block] = 1;
        } else {
            const auto smaller = p.size(new_block) <= p.size(old_block) ? new_block : old_block;
            work.push_back(smaller);
            in_work[smaller] = 1;
        }
    };

    std::vector<std::uint32_t> in_a(n, 0), in_d(n, 0);
    std::uint32_t epoch = 0;
    std::vector<std::uint32_t> splitter, preds_default;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> column_marks;

    while (!work.empty()) {
        const auto a = work.back();
        work.pop_back();
        in_work[a] = 0;
        ++epoch;
        auto members = p.members(a);
        splitter.assign(members.begin(), members.end());
        for (auto t : splitter) in_a[t] = epoch;

        preds_default.clear();
        for (auto t : splitter)
            for (auto i = inv_def_off[t]; i < inv_def_off[t + 1]; ++i) {
                const auto s = inv_def[i];
                in_d[s] = epoch;
                preds_default.push_back(s);
            }
        for (auto s : preds_default) p.mark(s);
        p.split(on_split);

        column_marks.clear();
        for (auto s : preds_default)
            for (auto e = dfa.edge_offset[s]; e < dfa.edge_offset[s + 1]; ++e)
                if (in_a[dfa.edge_target[e]] != epoch) column_marks.emplace_back(dfa.edge_column[e], s);
        for (auto t : splitter)
            for (auto i = inv_ex_off[t]; i < inv_ex_off[t + 1]; ++i) {
                const auto [s, c] = inv_ex[i];
                if (in_d[s] != epoch) column_marks.emplace_back(c, s);
            }
        std::sort(column_marks.begin(), column_marks.end());
        for (std::size_t i = 0; i < column_marks.size();) {
            std::size_t j = i;
            while (j < column_marks.size() && column_marks[j].first == column_marks[i].first) {
                p.mark(column_marks[j].second);
                ++j;
            }
            p.split(on_split);
            i = j;
        }
    }
    return p;
}

} // namespace

class MatcherBuilder {
public:
    static CompiledMatcher build(const std::vector<std::string>& ids, const std::vector<PatternAst>& asts,
                                 const Lemmatizer& lemmatizer, const CompileOptions& options, CompileStats* stats);
};

CompiledMatcher MatcherBuilder::build(const std::vector<std::string>& ids, const std::vector<PatternAst>& asts,
                                      const Lemmatizer& lemmatizer, const CompileOptions& options,
                                      CompileStats* stats) {
    const auto t0 = std::chrono::steady_clock::now();
    if (ids.size() != asts.size()) throw Error("invalid_argument", "pattern id and AST counts differ");

    // Dense indices follow the lexicographic order of pattern ids.
    std::vector<std::uint32_t> order(ids.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return ids[a] < ids[b]; });
    std::vector<std::string> sorted_ids;
    std::vector<PatternAst> normalized;
    sorted_ids.reserve(ids.size());
    normalized.reserve(ids.size());
    for (auto i : order) {
        if (!sorted_ids.empty() && sorted_ids.back() == ids[i])
            throw Error("duplicate_pattern_id", "duplicate pattern id '" + ids[i] + "'");
        sorted_ids.push_back(ids[i]);
        normalized.push_back(normalize(asts[i], lemmatizer, options.gaps));
    }

    RewriteResult rewritten = rewrite_batch(normalized, options.rewrite);
    const Vocabulary vocab = build_vocabulary(rewritten.patterns, rewritten.classes, lemmatizer, options);

    Nfa nfa;
    const auto nfa_start = nfa.add();
    NfaBuilder builder(nfa, vocab);
    std::unordered_map<std::string, std::uint32_t> trie;
    for (const auto& rp : rewritten.patterns) {
        std::uint32_t cur = nfa_start;
        if (options.prefix_trie) {
            for (const auto& e : rp.ast) {
                const std::string key = std::to_string(cur) + '\x1f' + to_string(e);
                auto it = trie.find(key);
                if (it == trie.end()) it = trie.emplace(key, builder.element(cur, e)).first;
                cur = it->second;
            }
        } else {
            const auto entry = nfa.add();
            nfa.states[nfa_start].eps.push_back(entry);
            cur = builder.sequence(entry, rp.ast);
        }
        auto& labels = nfa.states[cur].labels;
        labels.insert(labels.end(), rp.labels.begin(), rp.labels.end());
    }

    Dfa dfa = determinize(nfa, nfa_start, vocab, options.max_states);

    CompiledMatcher m;
    m.lemmatizer_ = lemmatizer;
    m.pattern_ids_ = std::move(sorted_ids);
    m.interner_ = vocab.interner;
    m.classes_ = rewritten.classes;
    m.symbol_column_ = vocab.symbol_column;
    m.column_count_ = vocab.column_count;

    std::vector<std::uint32_t> accept_remap;  // old accept-set id -> compacted id
    auto emit_accepts = [&](std::uint32_t old_set) {
        if (accept_remap.empty()) accept_remap.assign(dfa.accept_sets.size(), kNoState);
        if (old_set == 0) return 0u;
        if (accept_remap[old_set] == kNoState) {
            const auto& items = dfa.accept_sets[old_set];
            m.accept_items_.insert(m.accept_items_.end(), items.begin(), items.end());
            m.accept_offset_.push_back(static_cast<std::uint32_t>(m.accept_items_.size()));
            accept_remap[old_set] = static_cast<std::uint32_t>(m.accept_offset_.size() - 2);
        }
        return accept_remap[old_set];
    };

    if (!options.minimize) {
        m.start_ = 0;
        m.sink_ = dfa.sink;
        m.default_ = dfa.default_target;
        m.edge_offset_ = dfa.edge_offset;
        m.edge_column_ = dfa.edge_column;
        m.edge_target_ = dfa.edge_target;
        for (auto a : dfa.accept_set) m.accept_set_.push_back(emit_accepts(a));
    } else {
        RefinablePartition part = hopcroft(dfa);
        const auto blocks = part.block_count();
        std::vector<std::uint32_t> rep(blocks, kNoState);
        for (std::uint32_t s = 0; s < dfa.size(); ++s) {
            auto& r = rep[part.block_of(s)];
            r = std::min(r, s);
        }
        // Number blocks in breadth-first order from the start state.
        std::vector<std::uint32_t> new_id(blocks, kNoState);
        std::vector<std::uint32_t> queue{part.block_of(0)};
        new_id[queue[0]] = 0;
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            const auto r = rep[queue[qi]];
            auto visit = [&](std::uint32_t target) {
                const auto b = part.block_of(target);
                if (new_id[b] == kNoState) {
                    new_id[b] = static_cast<std::uint32_t>(queue.size());
                    queue.push_back(b);
                }
            };
            visit(dfa.default_target[r]);
            for (auto e = dfa.edge_offset[r]; e < dfa.edge_offset[r + 1]; ++e) visit(dfa.edge_target[e]);
        }
        m.start_ = 0;
        m.sink_ = dfa.sink == kNoState ? kNoState : new_id[part.block_of(dfa.sink)];
        for (auto b : queue) {
            const auto r = rep[b];
            const auto def = new_id[part.block_of(dfa.default_target[r])];
            m.default_.push_back(def);
            for (auto e = dfa.edge_offset[r]; e < dfa.edge_offset[r + 1]; ++e) {
                const auto t = new_id[part.block_of(dfa.edge_target[e])];
                if (t == def) continue;
                m.edge_column_.push_back(dfa.edge_column[e]);
                m.edge_target_.push_back(t);
            }
            m.edge_offset_.push_back(static_cast<std::uint32_t>(m.edge_column_.size()));
            m.accept_set_.push_back(emit_accepts(dfa.accept_set[r]));
        }
    }

    m.build_start_row();

    if (stats) {
        stats->input_patterns = ids.size();
        stats->rewritten_patterns = rewritten.patterns.size();
        stats->classes = rewritten.classes.size();
        stats->nfa_states = nfa.states.size();
        stats->dfa_states = dfa.size();
        stats->min_states = m.state_count();
        stats->columns = m.column_count();
        stats->edges = m.edge_count();
        stats->seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    return m;
}

CompiledMatcher compile_asts(const std::vector<std::string>& ids, const std::vector<PatternAst>& asts,
                             const Lemmatizer& lemmatizer, const CompileOptions& options, CompileStats* stats) {
    return MatcherBuilder::build(ids, asts, lemmatizer, options, stats);
}

CompiledMatcher compile(const std::vector<PatternSource>& patterns, const Lemmatizer& lemmatizer,
                        const CompileOptions& options, CompileStats* stats) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::string> ids;
    std::vector<PatternAst> asts;
    ids.reserve(patterns.size());
    asts.reserve(patterns.size());
    for (const auto& p : patterns) {
        try {
            asts.push_back(parse_pattern(p.text));
        } catch (const SyntaxError& e) {
            throw SyntaxError("pattern '" + p.pattern_id + "': " + e.detail(), e.offset());
        }
        ids.push_back(p.pattern_id);
    }
    auto m = MatcherBuilder::build(ids, asts, lemmatizer, options, stats);
    if (stats) stats->seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return m;
}

} // namespace rep::fsm
