#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "rep/common/error.hpp"
#include "rep/traits/catalog.hpp"
#include "rep/traits/synthetic.hpp"
#include "support/fsm_oracle.hpp"

using namespace rep::traits;

namespace {

const rep::fsm::Lemmatizer kLemma = [](std::string_view t) { return rep::fsm::lemmatize(t); };

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::ArrayXd da = a.array() - a.mean(), db = b.array() - b.mean();
    return (da * db).sum() / std::sqrt(da.square().sum() * db.square().sum());
}

Eigen::MatrixXd rate_matrix(const SyntheticCorpus& c) {
    Eigen::MatrixXd r(static_cast<Eigen::Index>(c.counts.size()), static_cast<Eigen::Index>(c.counts[0].size()));
    for (std::size_t i = 0; i < c.counts.size(); ++i)
        for (std::size_t j = 0; j < c.counts[i].size(); ++j)
            r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = smooth_rate(c.counts[i][j], c.token_counts[i]);
    return r;
}

std::vector<std::string> ids_of(const SyntheticSpec& spec) {
    std::vector<std::string> ids;
    for (const auto& it : spec.items) ids.push_back(it.evidence_id);
    return ids;
}

// Fits a noise-free logit-normal sample directly, bypassing counts.
Eigen::MatrixXd logistic_sample(const std::vector<ItemParams>& truth, std::size_t n, std::uint64_t seed,
                                Eigen::VectorXd* theta = nullptr) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(truth.size()));
    if (theta) theta->resize(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double t = z(rng);
        if (theta) (*theta)(i) = t;
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            const auto& p = truth[static_cast<std::size_t>(j)];
            const double y = p.mu + p.lambda * t + std::sqrt(p.sigma2) * z(rng);
            x(i, j) = 1.0 / (1.0 + std::exp(-y));
        }
    }
    return x;
}

} // namespace

TEST_CASE("trait catalog") {
    const auto& c = trait_catalog();
    REQUIRE(c.size() == 35);
    std::set<std::string> ids;
    std::map<std::string, int> facets;
    for (const auto& t : c) {
        ids.insert(t.id);
        if (t.id != t.domain) ++facets[t.domain];
    }
    CHECK(ids.size() == 35);
    CHECK(facets.size() == 5);
    for (const auto& [domain, n] : facets) CHECK_MESSAGE(n == 6, domain);
    CHECK(trait_index("openness") == 0);
    CHECK_THROWS_AS(trait_index("charisma"), rep::NotFound);
}

TEST_CASE("smooth_rate") {
    CHECK(smooth_rate(0, 0) == doctest::Approx(0.5));
    CHECK(smooth_rate(0, 999) == doctest::Approx(0.0005));
    CHECK(smooth_rate(10, 990) == doctest::Approx(10.5 / 991.0));
    CHECK(smooth_rate(0, 10'000'000) == doctest::Approx(1e-6));
    CHECK(smooth_rate(5'000'000, 1) == doctest::Approx(1.0 - 1e-6));
    for (std::uint64_t c = 0; c < 50; ++c) CHECK(smooth_rate(c, 100) < smooth_rate(c + 1, 100));
}

TEST_CASE("lexicon files") {
    const auto lex = EvidenceLexicon::parse("# header\nev1\textraversion\texcl\t!\nev2\tanxiety\tworry\tworry words\n");
    REQUIRE(lex.size() == 2);
    CHECK(lex.entries()[1] == LexiconEntry{"ev2", "anxiety", "worry", "worry words"});
    CHECK(lex.index_of("ev2") == 1);
    CHECK(lex.index_of("nope") == -1);
    CHECK(lex.entries_for("extraversion") == std::vector<std::uint32_t>{0});
    CHECK(EvidenceLexicon::parse(lex.to_tsv()).entries() == lex.entries());
    CHECK_THROWS_AS(EvidenceLexicon::parse("ev1\tcharisma\tp\tc\n"), rep::LexiconMismatch);
    CHECK_THROWS_AS(EvidenceLexicon::parse("ev1\topenness\tp\tc\nev1\topenness\tq\tc\n"), rep::LexiconMismatch);
    CHECK_THROWS_AS(EvidenceLexicon::parse("ev1 openness p c\n"), rep::FormatError);
}

TEST_CASE("extract_evidence examples") {
    const auto lex = EvidenceLexicon::parse("excl\textraversion\tp_excl\t!\nexcited\tpositive_emotions\tp_exc\texcited\n"
                                            "dec\tdeliberation\tp_dec\tmake decision\n");
    const auto m = rep::fsm::compile({{"p_excl", "\\!"}, {"p_exc", "excited"}, {"p_dec", "make decision"}}, kLemma);

    const auto ev = extract_evidence("so excited!!", lex, m);
    CHECK(ev.counts[0] == 2);
    CHECK(ev.counts[1] == 1);
    CHECK(ev.token_count == 4);

    const auto empty = extract_evidence("", lex, m);
    CHECK(empty.token_count == 0);
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(empty.counts[j] == 0);
        CHECK(empty.rates[j] == 0.5);
    }

    std::string repeated;
    for (int k = 0; k < 7; ++k) repeated += "excited ";
    CHECK(extract_evidence(repeated, lex, m).counts[1] == 7);
    // Implicit gaps also let "make" reach the next sentence's "decision":
    // 7 direct hits plus 6 that span ". make".
    std::string phrases;
    for (int k = 0; k < 7; ++k) phrases += "make decision. ";
    CHECK(extract_evidence(phrases, lex, m).counts[2] == 13);

    const auto partial = rep::fsm::compile({{"p_excl", "\\!"}}, kLemma);
    CHECK_THROWS_AS(extract_evidence("hi", lex, partial), rep::LexiconMismatch);
    CHECK_THROWS_AS(lex.check_against(partial), rep::LexiconMismatch);
}

TEST_CASE("extract_evidence agrees with a naive pattern count") {
    std::vector<rep::fsm::PatternSource> patterns = {
        {"a", "love"}, {"b", "so [happy|glad]"}, {"c", "\"i am\""}, {"d", "\\!"}, {"e", "feel * good"}, {"f", "_ :)"}};
    std::vector<LexiconEntry> entries;
    for (std::size_t k = 0; k < patterns.size(); ++k)
        entries.push_back({"ev" + std::to_string(k), trait_catalog()[k].id, patterns[k].pattern_id, patterns[k].text});
    entries.push_back({"dup", "warmth", "a", "love again"});
    const EvidenceLexicon lex(entries);
    const auto m = rep::fsm::compile(patterns, kLemma);
    std::vector<std::pair<std::string, rep::fsm::PatternAst>> reference;
    for (const auto& p : patterns) reference.emplace_back(p.pattern_id, normalize(rep::fsm::parse_pattern(p.text), kLemma));

    const std::vector<std::string> words = {"i", "am", "so", "happy", "glad", "love", "loved", "feel", "really",
                                            "good", "!", ":)", "today", "it"};
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
    for (int round = 0; round < 300; ++round) {
        std::vector<std::string> tokens(round % 25);
        for (auto& t : tokens) t = words[pick(rng)];
        const auto ev = extract_evidence(tokens, lex, m);
        std::map<std::string, std::uint32_t> expected;
        for (const auto& h : oracle::naive_match(reference, tokens)) ++expected[h.pattern_id];
        for (std::size_t j = 0; j < lex.size(); ++j) CHECK(ev.counts[j] == expected[lex.entries()[j].pattern_id]);
    }
}

TEST_CASE("infer_theta closed form") {
    const auto lex = EvidenceLexicon::parse("e1\topenness\tp1\tx\ne2\topenness\tp2\ty\n");
    TraitFit fit;
    fit.trait_id = "openness";
    fit.items = {{"e1", 0.0, 0.0, 1.0, false}, {"e2", -1.0, 0.0, 2.0, false}};
    const auto ev = evidence_from_counts({3, 0}, 10);
    auto s = infer_theta(fit, lex, ev);
    CHECK(s.theta == 0.0);
    CHECK(s.sd == 1.0);
    CHECK(s.evidence_used == 1);

    // One item, lambda 1, sigma2 1, y - mu = 2: theta = 2 / 2, sd = 1/sqrt(2).
    auto [theta, sd] = posterior({{"e1", 0.5, 1.0, 1.0, false}}, {2.5});
    CHECK(theta == doctest::Approx(1.0));
    CHECK(sd == doctest::Approx(1.0 / std::sqrt(2.0)));

    // Posterior sd shrinks with every informative item.
    std::vector<ItemParams> items;
    std::vector<double> y;
    double last = 1.0;
    for (int k = 0; k < 10; ++k) {
        items.push_back({"", 0.0, 0.3 + 0.1 * k, 0.5, false});
        y.push_back(0.1 * k);
        const double now = posterior(items, y).second;
        CHECK(now > 0.0);
        CHECK(now < last);
        last = now;
    }

    TraitFit missing = fit;
    missing.items.push_back({"e3", 0.0, 1.0, 1.0, false});
    CHECK_THROWS_AS(infer_theta(missing, lex, ev), rep::LexiconMismatch);
}

TEST_CASE("EM recovers generating loadings") {
    const auto spec = random_synthetic_spec({"openness"}, 50, 31);
    const auto corpus = generate_synthetic_corpus(spec, 500, 2000, 32, false);
    const auto fit = fit_em(rate_matrix(corpus), "openness", ids_of(spec));
    CHECK(fit.converged);
    CHECK(fit.identified);
    Eigen::VectorXd truth(50), got(50);
    for (Eigen::Index j = 0; j < 50; ++j) {
        truth(j) = spec.items[static_cast<std::size_t>(j)].lambda;
        got(j) = fit.items[static_cast<std::size_t>(j)].lambda;
    }
    CHECK(correlation(truth, got) >= 0.95);

    for (std::size_t k = 1; k < fit.trace.size(); ++k) CHECK(fit.trace[k] >= fit.trace[k - 1] - 1e-9);

    const auto lex = spec.lexicon();
    Eigen::VectorXd est(500);
    for (Eigen::Index i = 0; i < 500; ++i)
        est(i) = infer_theta(fit, lex, evidence_from_counts(corpus.counts[static_cast<std::size_t>(i)],
                                                            corpus.token_counts[static_cast<std::size_t>(i)]))
                     .theta;
    CHECK(correlation(est, corpus.theta.col(0)) >= 0.9);
}

TEST_CASE("EM converges to a stationary point") {
    std::vector<ItemParams> truth;
    for (int j = 0; j < 8; ++j) truth.push_back({"e" + std::to_string(j), -2.0 + 0.2 * j, 0.4 + 0.1 * j, 0.3, false});
    const auto x = logistic_sample(truth, 400, 5);
    std::vector<std::string> ids;
    for (const auto& t : truth) ids.push_back(t.evidence_id);
    const auto fit = fit_em(x, "order", ids);
    REQUIRE(fit.converged);
    const auto y = logit(x);
    const double h = 1e-5;
    for (std::size_t j = 0; j < fit.items.size(); ++j)
        for (int which = 0; which < 3; ++which) {
            auto up = fit.items, down = fit.items;
            double* a = which == 0 ? &up[j].mu : which == 1 ? &up[j].lambda : &up[j].sigma2;
            double* b = which == 0 ? &down[j].mu : which == 1 ? &down[j].lambda : &down[j].sigma2;
            *a += h;
            *b -= h;
            const double g = (logit_log_likelihood(y, up) - logit_log_likelihood(y, down)) / (2 * h) / 400.0;
            CHECK(std::abs(g) < 1e-4);
        }
}

TEST_CASE("EM on pure noise keeps loadings near zero") {
    std::vector<ItemParams> noise, signal;
    std::vector<std::string> ids;
    for (int j = 0; j < 10; ++j) {
        noise.push_back({"e" + std::to_string(j), -1.0, 0.0, 1.0, false});
        signal.push_back({"e" + std::to_string(j), -1.0, 1.0, 1.0, false});
        ids.push_back("e" + std::to_string(j));
    }
    // Monte-Carlo standard error of each loading under the null.
    const int replicates = 40;
    std::vector<std::vector<double>> loadings(10);
    for (int r = 0; r < replicates; ++r) {
        const auto fit = fit_em(logistic_sample(noise, 500, 100 + r), "trust", ids);
        for (std::size_t j = 0; j < 10; ++j) loadings[j].push_back(fit.items[j].lambda);
    }
    const auto informative = fit_em(logistic_sample(signal, 500, 7), "trust", ids);
    // On noise the likelihood often peaks at a boundary where one item takes
    // the whole factor, so single loadings can be large; count the rest.
    int inside = 0, total = 0;
    for (std::size_t j = 0; j < 10; ++j) {
        double ms = 0.0;
        for (double l : loadings[j]) ms += l * l / replicates;
        const double se = std::sqrt(ms);
        CHECK(se < 0.5 * informative.items[j].lambda);
        for (double l : loadings[j]) {
            inside += std::abs(l) < 3 * se;
            ++total;
        }
    }
    CHECK(inside >= 0.9 * total);
}

TEST_CASE("EM identifiability boundaries") {
    SUBCASE("single item") {
        Eigen::MatrixXd x(4, 1);
        x << 0.1, 0.2, 0.3, 0.4;
        const auto fit = fit_em(x, "order", {"only"});
        CHECK_FALSE(fit.identified);
        const Eigen::ArrayXd y = logit(x).col(0).array();
        CHECK(fit.items[0].mu == doctest::Approx(y.mean()));
        CHECK(fit.items[0].sigma2 == doctest::Approx((y - y.mean()).square().mean()));
        CHECK(fit.items[0].lambda == 0.0);
    }
    SUBCASE("constant column is dropped, not fatal") {
        std::vector<ItemParams> truth;
        for (int j = 0; j < 4; ++j) truth.push_back({"e" + std::to_string(j), -1.0, 1.0, 0.2, false});
        Eigen::MatrixXd x = logistic_sample(truth, 200, 3);
        x.col(2).setConstant(0.25);
        const auto fit = fit_em(x, "order", {"e0", "e1", "e2", "e3"});
        CHECK(fit.items[2].dropped);
        CHECK(fit.items[2].lambda == 0.0);
        CHECK(fit.items[2].sigma2 > 0.0);
        CHECK_FALSE(fit.warnings.empty());
        CHECK(fit.identified);
        CHECK(fit.items[0].lambda > 0.5);
    }
    SUBCASE("sign convention") {
        std::vector<ItemParams> truth;
        for (int j = 0; j < 6; ++j) truth.push_back({"e" + std::to_string(j), 0.0, -1.0, 0.3, false});
        const auto fit = fit_em(logistic_sample(truth, 300, 9), "order", {"e0", "e1", "e2", "e3", "e4", "e5"});
        double sum = 0;
        for (const auto& it : fit.items) sum += it.lambda;
        CHECK(sum >= 0.0);
    }
    CHECK_THROWS_AS(fit_em(Eigen::MatrixXd::Constant(1, 3, 0.2), "order", {"a", "b", "c"}), rep::DegenerateData);
}

TEST_CASE("cronbach_alpha") {
    Eigen::MatrixXd same(4, 3);
    same << 1, 1, 1, 2, 2, 2, 4, 4, 4, 3, 3, 3;
    CHECK(cronbach_alpha(same) == doctest::Approx(1.0));

    // Item variances 7/3, 1, 7/3; row totals 5, 8, 13 with variance 49/3.
    // alpha = 3/2 * (1 - (17/3) / (49/3)) = 48/49.
    Eigen::MatrixXd hand(3, 3);
    hand << 1, 2, 2, 2, 3, 3, 4, 4, 5;
    CHECK(cronbach_alpha(hand) == doctest::Approx(48.0 / 49.0));

    std::mt19937_64 rng(12);
    std::normal_distribution<double> z(0, 1);
    Eigen::MatrixXd noise(4000, 2);
    for (Eigen::Index i = 0; i < noise.rows(); ++i) noise.row(i) << z(rng), z(rng);
    // Sampling sd of alpha for two independent items is about 2/sqrt(n).
    CHECK(std::abs(cronbach_alpha(noise)) < 4 * 2 / std::sqrt(4000.0));

    CHECK_THROWS_AS(cronbach_alpha(Eigen::MatrixXd::Constant(5, 3, 0.7)), rep::UndefinedAlpha);
    CHECK_THROWS_AS(cronbach_alpha(Eigen::MatrixXd::Ones(5, 1)), rep::UndefinedAlpha);
}

TEST_CASE("model file round trip") {
    const auto spec = random_synthetic_spec({"openness", "anxiety", "warmth"}, 6, 2);
    const auto corpus = generate_synthetic_corpus(spec, 120, 3000, 3, false);
    const auto model = fit_model(corpus.counts, corpus.token_counts, spec.lexicon());
    REQUIRE(model.traits.size() == 3);
    const auto text = model.to_json();
    const auto back = TraitModel::from_json(text);
    CHECK(back == model);
    CHECK(back.to_json() == text);
    CHECK_THROWS_AS(TraitModel::from_json("{\"format\":\"other\"}"), rep::FormatError);
    CHECK_THROWS_AS(TraitModel::from_json("not json"), rep::FormatError);

    const auto scores = infer_all(model, spec.lexicon(), evidence_from_counts(corpus.counts[0], corpus.token_counts[0]));
    REQUIRE(scores.size() == 35);
    for (const auto& s : scores) {
        CHECK(std::isfinite(s.theta));
        CHECK(s.sd > 0.0);
        CHECK(s.sd <= 1.0);
    }
    CHECK(scores[trait_index("fantasy")].sd == 1.0);
}

TEST_CASE("synthetic generator") {
    const auto spec = random_synthetic_spec({"openness", "order"}, 4, 8);
    const auto a = generate_synthetic_corpus(spec, 30, 400, 9);
    const auto b = generate_synthetic_corpus(spec, 30, 400, 9);
    CHECK(a.counts == b.counts);
    CHECK(a.texts == b.texts);
    CHECK(a.theta == b.theta);

    // Texts carry exactly the generated counts.
    const auto lex = spec.lexicon();
    const auto m = rep::fsm::compile(spec.patterns(), kLemma);
    for (std::size_t i = 0; i < a.texts.size(); ++i) {
        const auto ev = extract_evidence(a.texts[i], lex, m);
        CHECK(ev.counts == a.counts[i]);
        CHECK(ev.token_count == a.token_counts[i]);
    }

    SUBCASE("zero loadings carry no signal") {
        auto flat = random_synthetic_spec({"openness"}, 3, 4);
        for (auto& it : flat.items) it.lambda = 0.0;
        const auto c = generate_synthetic_corpus(flat, 4000, 100000, 5, false);
        const auto y = logit(rate_matrix(c));
        for (Eigen::Index j = 0; j < y.cols(); ++j)
            CHECK(std::abs(correlation(y.col(j), c.theta.col(0))) < 4 / std::sqrt(4000.0));
    }
    SUBCASE("moments of the logit rates") {
        const auto c = generate_synthetic_corpus(spec, 3000, 2'000'000, 6, false);
        const auto y = logit(rate_matrix(c));
        for (Eigen::Index j = 0; j < y.cols(); ++j) {
            const auto& it = spec.items[static_cast<std::size_t>(j)];
            const double var = it.lambda * it.lambda + it.sigma2;
            const double mean = y.col(j).mean();
            const double sample_var = (y.col(j).array() - mean).square().sum() / (y.rows() - 1);
            // Binomial noise adds about 1/(n x) to the variance; negligible here.
            CHECK(std::abs(mean - it.mu) < 4 * std::sqrt(var / 3000.0));
            CHECK(std::abs(sample_var - var) < 4 * var * std::sqrt(2.0 / 3000.0));
        }
    }
}

TEST_CASE("reliability curve") {
    const auto spec = strong_signal_spec();
    const auto lex = spec.lexicon();
    const auto m = rep::fsm::compile(spec.patterns(), kLemma);
    const auto model = spec.true_model();
    TextGenerator gen = [&](std::uint32_t words, std::uint64_t seed) {
        return generate_synthetic_corpus(spec, 300, words, seed).texts;
    };
    const auto curve = reliability_curve(model.traits[0], lex, m, gen, {0, 100, 400, 1600, 3200}, 10);
    REQUIRE(curve.size() == 5);
    CHECK_FALSE(curve[0].defined);
    CHECK(curve[1].alpha < curve[3].alpha);
    CHECK(curve[4].alpha >= 0.8);
    CHECK(curve[3].word_count == 1600);
}
