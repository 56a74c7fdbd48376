#include "calmdesk/sentiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "calmdesk/errors.hpp"
#include "calmdesk/lingua/text.hpp"

namespace calmdesk {

LexiconClassifier::LexiconClassifier(std::string id, lingua::WeightedLexicon lexicon, ClassifierRules rules)
    : id_(std::move(id)), lexicon_(std::move(lexicon)), rules_(std::move(rules)) {
    if (id_.empty()) throw ConfigError("classifier id is empty");
    if (lexicon_.size() == 0) throw ConfigError("classifier " + id_ + " has an empty lexicon");
}

double LexiconClassifier::polarity(std::string_view text) const {
    const auto tokens = lingua::tokenize(text).tokens;
    double sum = 0.0;
    bool any_hit = false;
    std::size_t negation_left = 0;
    double boost = 1.0;
    for (const auto& tok : tokens) {
        if (rules_.negation_window > 0 && rules_.negators.contains(tok)) {
            negation_left = rules_.negation_window;
            boost = 1.0;
            continue;
        }
        if (rules_.intensifiers.contains(tok)) {
            boost = rules_.intensifier_factor;
            if (negation_left > 0) --negation_left;
            continue;
        }
        if (const auto w = lexicon_.lookup(tok)) {
            double v = *w * boost;
            if (negation_left > 0) v = -v;
            sum += v;
            any_hit = true;
        }
        boost = 1.0;
        if (negation_left > 0) --negation_left;
    }
    if (!any_hit || sum == 0.0) return 0.0;

    double p = 0.0;
    switch (rules_.normalization) {
    case Normalization::alpha: p = sum / std::sqrt(sum * sum + rules_.alpha); break;
    case Normalization::tanh: p = std::tanh(sum / rules_.scale); break;
    case Normalization::per_token: p = rules_.gain * sum / static_cast<double>(tokens.size()); break;
    }
    return std::clamp(p, -1.0, 1.0);
}

double soft_vote(std::span<const double> polarities) {
    if (polarities.empty()) throw PreconditionError("soft vote over no classifiers");
    double mean = 0.0;
    std::size_t k = 0;
    for (const double p : polarities) {
        ++k;
        mean += (p - mean) / static_cast<double>(k);
    }
    return mean;
}

int sentiment_bin(double mean_polarity) {
    if (std::isnan(mean_polarity)) throw PreconditionError("polarity is NaN");
    const double raw = 1.0 + std::floor((mean_polarity + 1.0) / (2.0 / 7.0));
    return static_cast<int>(std::clamp(raw, 1.0, 7.0));
}

namespace {

Normalization normalization_from_string(const std::string& s) {
    if (s == "alpha") return Normalization::alpha;
    if (s == "tanh") return Normalization::tanh;
    if (s == "per_token") return Normalization::per_token;
    throw ConfigError("unknown normalization: " + s);
}

ClassifierRules rules_from_json(const nlohmann::json& j) {
    ClassifierRules r;
    r.normalization = normalization_from_string(j.value("normalization", std::string("alpha")));
    r.alpha = j.value("alpha", r.alpha);
    r.scale = j.value("scale", r.scale);
    r.gain = j.value("gain", r.gain);
    r.negation_window = j.value("negation_window", r.negation_window);
    for (const auto& t : j.value("negators", nlohmann::json::array())) r.negators.insert(t.get<std::string>());
    for (const auto& t : j.value("intensifiers", nlohmann::json::array())) r.intensifiers.insert(t.get<std::string>());
    r.intensifier_factor = j.value("intensifier_factor", r.intensifier_factor);
    if (r.alpha <= 0 || r.scale <= 0 || r.gain <= 0) throw ConfigError("classifier normalization constants must be positive");
    return r;
}

} // namespace

SentimentEnsemble SentimentEnsemble::load(const std::filesystem::path& manifest) {
    std::ifstream in(manifest);
    if (!in) throw ConfigError("cannot open classifier manifest " + manifest.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("classifier manifest " + manifest.string() + ": " + e.what());
    }
    return from_json(j, manifest.parent_path());
}

SentimentEnsemble SentimentEnsemble::from_json(const nlohmann::json& manifest, const std::filesystem::path& base_dir) {
    SentimentEnsemble ensemble;
    try {
        for (const auto& c : manifest.at("classifiers")) {
            auto lexicon = lingua::WeightedLexicon::load(base_dir / c.at("lexicon").get<std::string>());
            ensemble.add(LexiconClassifier(c.at("id").get<std::string>(), std::move(lexicon),
                                           rules_from_json(c.value("rules", nlohmann::json::object()))));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("classifier manifest: ") + e.what());
    }
    if (ensemble.classifiers_.size() < 3) throw ConfigError("sentiment ensemble needs at least 3 classifiers");
    return ensemble;
}

void SentimentEnsemble::add(LexiconClassifier classifier) {
    for (const auto& c : classifiers_)
        if (c.id() == classifier.id()) throw ConfigError("duplicate classifier id " + c.id());
    classifiers_.push_back(std::move(classifier));
}

std::vector<std::string> SentimentEnsemble::ids() const {
    std::vector<std::string> out;
    for (const auto& c : classifiers_) out.push_back(c.id());
    return out;
}

double SentimentEnsemble::classify_polarity(std::string_view text, std::string_view classifier_id) const {
    for (const auto& c : classifiers_)
        if (c.id() == classifier_id) return c.polarity(text);
    throw UnknownClassifierError("unknown classifier: " + std::string(classifier_id));
}

SentimentLabel SentimentEnsemble::label_text(std::string_view text) const {
    SentimentLabel label;
    std::vector<double> votes;
    for (const auto& c : classifiers_) {
        votes.push_back(c.polarity(text));
        label.per_classifier.emplace_back(c.id(), votes.back());
    }
    label.mean_polarity = soft_vote(votes);
    label.bin = sentiment_bin(label.mean_polarity);
    return label;
}

std::string window_text(const Transcript& history, std::size_t client_turns) {
    std::vector<std::string_view> picked;
    const auto turns = history.turns();
    for (auto it = turns.rbegin(); it != turns.rend() && picked.size() < client_turns; ++it)
        if (it->speaker == Speaker::client) picked.push_back(it->text);
    std::string out;
    for (auto it = picked.rbegin(); it != picked.rend(); ++it) {
        if (!out.empty()) out += '\n';
        out += *it;
    }
    return out;
}

SentimentLabel SentimentEnsemble::emo_label(const Transcript& history) const {
    if (history.client_turn_count() == 0) throw PreconditionError("sentiment needs at least one client turn");
    return label_text(window_text(history));
}

nlohmann::json to_json(const SentimentLabel& label) {
    nlohmann::json per = nlohmann::json::array();
    for (const auto& [id, p] : label.per_classifier) per.push_back({{"classifier", id}, {"polarity", p}});
    return {{"bin", label.bin}, {"mean_polarity", label.mean_polarity}, {"per_classifier", per}};
}

} // namespace calmdesk
