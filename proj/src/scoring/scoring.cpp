#include "rep/scoring/scoring.hpp"

#include "rep/common/error.hpp"

namespace rep::scoring {

int score_im(const ImResponses& r) {
    int score = 0;
    for (std::size_t i = 0; i < kImItems; ++i) {
        int v = r.values[i];
        if (v < 1 || v > 7)
            throw ValidationError("im item " + std::to_string(i + 1) + " out of range: " + std::to_string(v));
        if (r.reverse_keyed[i]) v = 8 - v;
        if (v >= 6) ++score;
    }
    return score;
}

int willingness_confide(const ConfideOutcomes& o) {
    int wc = static_cast<int>(o.weakness_rating) * static_cast<int>(o.weakness_action);
    for (const auto& op : o.opinions) wc += static_cast<int>(op.cf) * static_cast<int>(op.action);
    return wc;
}

int willingness_listen(const ListenOutcomes& o) {
    int wl = 0;
    for (bool c : o.clicks) wl += c ? 1 : 0;
    for (const auto& s : o.shares) wl += static_cast<int>(s.rating) * static_cast<int>(s.act);
    return wl;
}

namespace {

std::optional<int> lookup(const Outcomes& o, const std::string& key) {
    auto it = o.find(key);
    if (it == o.end()) return std::nullopt;
    return it->second;
}

int checked(const std::string& key, int v, int lo, int hi) {
    if (v < lo || v > hi)
        throw ValidationError(key + " out of range: " + std::to_string(v));
    return v;
}

// action first; the paired rating only matters when something was shared
template <class R, class A>
void pair_from(const Outcomes& o, const std::string& rating_key, int rating_hi, const std::string& action_key,
               int action_hi, R& rating, A& action) {
    auto a = lookup(o, action_key);
    auto r = lookup(o, rating_key);
    action = static_cast<A>(a ? checked(action_key, *a, 0, action_hi) : 0);
    if (r) {
        rating = static_cast<R>(checked(rating_key, *r, 1, rating_hi));
    } else if (a && *a > 0) {
        throw ValidationError(action_key + " recorded without " + rating_key);
    } else {
        rating = static_cast<R>(1);
    }
}

} // namespace

ConfideOutcomes confide_from(const Outcomes& o) {
    ConfideOutcomes c;
    pair_from(o, "wc.weakness.rating", 3, "wc.weakness.action", 2, c.weakness_rating, c.weakness_action);
    for (int j = 0; j < 2; ++j) {
        std::string base = "wc.opinion" + std::to_string(j + 1);
        pair_from(o, base + ".cf", 3, base + ".action", 1, c.opinions[j].cf, c.opinions[j].action);
    }
    return c;
}

ListenOutcomes listen_from(const Outcomes& o) {
    ListenOutcomes l;
    for (int j = 0; j < 2; ++j) {
        std::string key = "wl.click" + std::to_string(j + 1);
        auto v = lookup(o, key);
        l.clicks[j] = v && checked(key, *v, 0, 1) == 1;
    }
    for (int j = 0; j < 5; ++j) {
        std::string base = "wl.share" + std::to_string(j + 1);
        pair_from(o, base + ".rating", 3, base + ".act", 1, l.shares[j].rating, l.shares[j].act);
    }
    return l;
}

std::optional<ImResponses> im_from(const Outcomes& o, const std::array<bool, kImItems>& reverse_keyed) {
    ImResponses r;
    r.reverse_keyed = reverse_keyed;
    for (std::size_t i = 0; i < kImItems; ++i) {
        auto v = lookup(o, "im." + std::to_string(i + 1));
        if (!v) return std::nullopt;
        r.values[i] = *v;
    }
    return r;
}

nlohmann::ordered_json ScoreReport::to_json() const {
    nlohmann::ordered_json j;
    j["session_id"] = session_id;
    j["im"] = im ? nlohmann::ordered_json(*im) : nlohmann::ordered_json(nullptr);
    j["wc"] = wc;
    j["wl"] = wl;
    auto& t = j["traits"] = nlohmann::ordered_json::array();
    for (const auto& s : traits)
        t.push_back({{"trait_id", s.trait_id}, {"theta", s.theta}, {"sd", s.sd}, {"evidence_used", s.evidence_used}});
    return j;
}

ScoreReport ScoreReport::from_json(const nlohmann::json& j) {
    try {
        ScoreReport r;
        r.session_id = j.at("session_id").get<std::string>();
        if (!j.at("im").is_null()) r.im = j.at("im").get<int>();
        r.wc = j.at("wc").get<int>();
        r.wl = j.at("wl").get<int>();
        for (const auto& s : j.at("traits"))
            r.traits.push_back({s.at("trait_id").get<std::string>(), s.at("theta").get<double>(),
                                s.at("sd").get<double>(), s.at("evidence_used").get<std::uint32_t>()});
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("score report: ") + e.what());
    }
}

ScoreReport score_session(std::string session_id, const Outcomes& outcomes,
                          const std::array<bool, kImItems>& reverse_keyed,
                          std::vector<traits::TraitScore> trait_scores) {
    ScoreReport r;
    r.session_id = std::move(session_id);
    if (auto im = im_from(outcomes, reverse_keyed)) r.im = score_im(*im);
    r.wc = willingness_confide(confide_from(outcomes));
    r.wl = willingness_listen(listen_from(outcomes));
    r.traits = std::move(trait_scores);
    return r;
}

} // namespace rep::scoring
