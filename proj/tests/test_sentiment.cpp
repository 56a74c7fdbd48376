#include <doctest.h>

#include <cmath>
#include <limits>

#include "calmdesk/errors.hpp"
#include "calmdesk/sentiment.hpp"
#include "support.hpp"

using namespace calmdesk;
using calmdesk::testing::kAssets;

namespace {

const SentimentEnsemble& ensemble() {
    static const SentimentEnsemble e = SentimentEnsemble::load(kAssets / "sentiment" / "classifiers.json");
    return e;
}

struct Expected {
    const char* text;
    double valence;
    double intensity;
    double density;
};

// Values from tests/oracles/sentiment_oracle.py over the shipped lexica.
constexpr Expected kOracle[] = {
    {"I love this, thank you so much!", 0.7905694150420948, 0.7615941559557649, 0.8571428571428571},
    {"This is terrible and you are useless.", -0.7905694150420948, -0.8853516482022625, -0.8571428571428571},
    {"This is not good at all.", -0.4588314677411235, 0.3799489622552249, 0.375},
    {"The flight was very bad.", -0.5423261445466404, -0.7162978701990245, -0.6},
};

} // namespace

TEST_CASE("the shipped ensemble has three classifiers") {
    CHECK(ensemble().ids() == std::vector<std::string>{"valence", "intensity", "density"});
}

TEST_CASE("classifier polarities match the independent oracle") {
    for (const auto& e : kOracle) {
        CAPTURE(e.text);
        CHECK(ensemble().classify_polarity(e.text, "valence") == doctest::Approx(e.valence).epsilon(1e-12));
        CHECK(ensemble().classify_polarity(e.text, "intensity") == doctest::Approx(e.intensity).epsilon(1e-12));
        CHECK(ensemble().classify_polarity(e.text, "density") == doctest::Approx(e.density).epsilon(1e-12));
    }
}

TEST_CASE("clear positive and negative texts clear 0.3 on every classifier") {
    for (const auto& id : ensemble().ids()) {
        CAPTURE(id);
        CHECK(ensemble().classify_polarity("I love this, thank you so much!", id) > 0.3);
        CHECK(ensemble().classify_polarity("This is terrible and you are useless.", id) < -0.3);
        CHECK(ensemble().classify_polarity("", id) == 0.0);
        CHECK(ensemble().classify_polarity("the table is at the gate", id) == 0.0);
    }
}

TEST_CASE("unknown classifier") {
    CHECK_THROWS_AS(ensemble().classify_polarity("x", "vader"), UnknownClassifierError);
}

TEST_CASE("binning formula") {
    CHECK(sentiment_bin(0.0) == 4);
    CHECK(sentiment_bin(1.0) == 7);
    CHECK(sentiment_bin(-1.0) == 1);
    const double mean = soft_vote(std::vector<double>{0.9, 0.3, 0.0});
    CHECK(mean == doctest::Approx(0.4));
    CHECK(sentiment_bin(mean) == 5);
    CHECK(sentiment_bin(-1.0 + 2.0 / 7.0 - 1e-12) == 1);
    CHECK(sentiment_bin(-1.0 + 2.0 / 7.0 + 1e-12) == 2);
    CHECK_THROWS_AS(sentiment_bin(std::numeric_limits<double>::quiet_NaN()), PreconditionError);
}

TEST_CASE("soft vote of identical values is exact") {
    for (const double v : {0.1, -0.7, 1.0 / 3.0, 0.123456789, -1.0, 1.0}) {
        const std::vector<double> votes(3, v);
        CHECK(soft_vote(votes) == v);
    }
    CHECK_THROWS(soft_vote(std::vector<double>{}));
}

TEST_CASE("label combines the classifiers over the last three client turns") {
    Transcript t;
    t.append(Speaker::client, "This is terrible and you are useless.");
    t.append(Speaker::representative, "I love helping, thank you so much!");
    t.append(Speaker::client, "The flight was very bad.");
    t.append(Speaker::representative, "ok");
    t.append(Speaker::client, "This is not good at all.");
    t.append(Speaker::representative, "ok");
    t.append(Speaker::client, "I love this, thank you so much!");

    CHECK(window_text(t) == "The flight was very bad.\nThis is not good at all.\nI love this, thank you so much!");
    const auto label = ensemble().emo_label(t);
    const auto direct = ensemble().label_text(window_text(t));
    CHECK(label == direct);
    CHECK(label.per_classifier.size() == 3);
    double sum = 0;
    for (const auto& [id, p] : label.per_classifier) sum += p;
    CHECK(label.mean_polarity == doctest::Approx(sum / 3));
    CHECK(label.bin == sentiment_bin(label.mean_polarity));
    CHECK(ensemble().emo_label(t) == label);
}

TEST_CASE("label requires a client turn") {
    CHECK_THROWS_AS(ensemble().emo_label(Transcript{}), PreconditionError);
}

TEST_CASE("classifier ids are unique and manifests list at least three") {
    SentimentEnsemble e;
    lingua::WeightedLexicon lex;
    lex.add("good", 1.0);
    e.add(LexiconClassifier("a", lex, {}));
    CHECK_THROWS(e.add(LexiconClassifier("a", lex, {})));
    e.add(LexiconClassifier("b", lex, {}));
    e.add(LexiconClassifier("c", lex, {}));
    CHECK(e.label_text("good").per_classifier.size() == 3);
    CHECK(e.label_text("good").bin >= 5);

    auto manifest = nlohmann::json::parse(calmdesk::testing::read_file(kAssets / "sentiment" / "classifiers.json"));
    manifest["classifiers"].erase(2);
    CHECK_THROWS_AS(SentimentEnsemble::from_json(manifest, kAssets / "sentiment"), ConfigError);
}

TEST_CASE("negation flips hits inside the window only") {
    lingua::WeightedLexicon lex;
    lex.add("good", 2.0);
    ClassifierRules rules;
    rules.normalization = Normalization::alpha;
    rules.alpha = 15;
    rules.negation_window = 3;
    rules.negators = {"not"};
    LexiconClassifier c("v", lex, rules);
    const double pos = 2.0 / std::sqrt(4.0 + 15.0);
    CHECK(c.polarity("good") == doctest::Approx(pos));
    CHECK(c.polarity("not good") == doctest::Approx(-pos));
    CHECK(c.polarity("not a b good") == doctest::Approx(-pos));
    CHECK(c.polarity("not a b c good") == doctest::Approx(pos));
}
