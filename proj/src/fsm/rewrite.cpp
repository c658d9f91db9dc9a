#include "rep/fsm/rewrite.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

namespace rep::fsm {
namespace {

std::size_t common_prefix(const std::vector<std::vector<Element>>& members) {
    std::size_t n = members.front().size();
    for (const auto& m : members) n = std::min(n, m.size());
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& m : members)
            if (!(m[i] == members.front()[i])) return i;
    return n;
}

std::size_t common_suffix(const std::vector<std::vector<Element>>& members) {
    std::size_t n = members.front().size();
    for (const auto& m : members) n = std::min(n, m.size());
    const auto& ref = members.front();
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& m : members)
            if (!(m[m.size() - 1 - i] == ref[ref.size() - 1 - i])) return i;
    return n;
}

Alternatives retract(const Alternatives& alt, ClassTable& classes, std::uint32_t threshold) {
    std::vector<std::string> words;
    for (const auto& m : alt.members)
        if (m.size() == 1 && std::holds_alternative<Token>(m.front().node))
            words.push_back(std::get<Token>(m.front().node).text);
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
    if (words.size() < threshold) return alt;

    Alternatives out;
    bool placed = false;
    for (const auto& m : alt.members) {
        if (m.size() == 1 && std::holds_alternative<Token>(m.front().node)) {
            if (!placed) out.members.push_back({Element{ClassRef{classes.intern(words)}}});
            placed = true;
        } else {
            out.members.push_back(m);
        }
    }
    return out;
}

} // namespace

std::uint32_t ClassTable::intern(std::vector<std::string> members) {
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    for (std::uint32_t i = 0; i < classes_.size(); ++i)
        if (classes_[i] == members) return i;
    classes_.push_back(std::move(members));
    return static_cast<std::uint32_t>(classes_.size() - 1);
}

std::vector<Element> factor_alternatives(std::vector<std::vector<Element>> members) {
    {
        std::vector<std::vector<Element>> unique;
        for (auto& m : members)
            if (std::find(unique.begin(), unique.end(), m) == unique.end()) unique.push_back(std::move(m));
        members = std::move(unique);
    }
    if (members.size() == 1) return members.front();

    const std::size_t pre = common_prefix(members);
    std::vector<Element> prefix(members.front().begin(), members.front().begin() + static_cast<long>(pre));
    for (auto& m : members) m.erase(m.begin(), m.begin() + static_cast<long>(pre));
    const std::size_t suf = common_suffix(members);
    std::vector<Element> suffix(members.front().end() - static_cast<long>(suf), members.front().end());
    for (auto& m : members) m.erase(m.end() - static_cast<long>(suf), m.end());

    // Trie step: members sharing a first element are grouped and factored.
    std::vector<std::vector<std::vector<Element>>> groups;
    std::vector<std::string> keys;
    for (auto& m : members) {
        const std::string key = m.empty() ? std::string() : to_string(m.front());
        auto it = std::find(keys.begin(), keys.end(), key);
        if (m.empty() || it == keys.end()) {
            keys.push_back(m.empty() ? std::string("\x01") + std::to_string(keys.size()) : key);
            groups.push_back({std::move(m)});
        } else {
            groups[static_cast<std::size_t>(it - keys.begin())].push_back(std::move(m));
        }
    }

    Alternatives alt;
    for (auto& g : groups) {
        if (g.size() == 1) {
            alt.members.push_back(std::move(g.front()));
            continue;
        }
        std::vector<Element> member{g.front().front()};
        std::vector<std::vector<Element>> tails;
        for (auto& m : g) tails.emplace_back(m.begin() + 1, m.end());
        auto rest = factor_alternatives(std::move(tails));
        member.insert(member.end(), rest.begin(), rest.end());
        alt.members.push_back(std::move(member));
    }

    std::vector<Element> out = std::move(prefix);
    if (alt.members.size() == 1)
        out.insert(out.end(), alt.members.front().begin(), alt.members.front().end());
    else
        out.push_back(Element{std::move(alt)});
    out.insert(out.end(), suffix.begin(), suffix.end());
    return out;
}

RewriteResult rewrite_batch(const std::vector<PatternAst>& patterns, const RewriteOptions& options) {
    RewriteResult result;

    // Exact duplicates collapse onto the first occurrence.
    std::unordered_map<std::string, std::size_t> seen;
    for (std::uint32_t i = 0; i < patterns.size(); ++i) {
        if (options.dedup) {
            auto [it, inserted] = seen.emplace(to_string(patterns[i]), result.patterns.size());
            if (!inserted) {
                result.patterns[it->second].labels.push_back(i);
                continue;
            }
        }
        result.patterns.push_back({patterns[i], {i}});
    }

    for (auto& rp : result.patterns) {
        PatternAst out;
        out.reserve(rp.ast.size());
        for (auto& e : rp.ast) {
            auto* alt = std::get_if<Alternatives>(&e.node);
            if (!alt) {
                out.push_back(std::move(e));
                continue;
            }
            Alternatives a = options.retract_alternatives ? retract(*alt, result.classes, options.class_threshold)
                                                          : *alt;
            if (options.factor_alternatives) {
                auto seq = factor_alternatives(std::move(a.members));
                out.insert(out.end(), seq.begin(), seq.end());
            } else {
                out.push_back(Element{std::move(a)});
            }
        }
        rp.ast = std::move(out);
    }
    return result;
}

} // namespace rep::fsm
