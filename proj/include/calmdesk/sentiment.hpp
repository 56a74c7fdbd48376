#pragma once

#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "calmdesk/lingua/lexicon.hpp"
#include "calmdesk/transcript.hpp"

namespace calmdesk {

enum class Normalization {
    alpha,      // s / sqrt(s^2 + alpha)
    tanh,       // tanh(s / scale)
    per_token,  // clamp(gain * s / tokens, -1, 1)
};

struct ClassifierRules {
    Normalization normalization = Normalization::alpha;
    double alpha = 15.0;
    double scale = 5.0;
    double gain = 3.0;
    std::size_t negation_window = 0;  // hits within this many tokens after a negator flip sign
    std::set<std::string, std::less<>> negators;
    std::set<std::string, std::less<>> intensifiers;  // scale the token that follows
    double intensifier_factor = 1.0;
};

class LexiconClassifier {
public:
    LexiconClassifier(std::string id, lingua::WeightedLexicon lexicon, ClassifierRules rules);

    const std::string& id() const noexcept { return id_; }
    const ClassifierRules& rules() const noexcept { return rules_; }

    // Polarity in [-1, 1]; 0 when no token hits the lexicon.
    double polarity(std::string_view text) const;

private:
    std::string id_;
    lingua::WeightedLexicon lexicon_;
    ClassifierRules rules_;
};

struct SentimentLabel {
    int bin = 4;  // 1 very negative .. 7 very positive
    double mean_polarity = 0.0;
    std::vector<std::pair<std::string, double>> per_classifier;

    bool operator==(const SentimentLabel&) const = default;
};

// Equal-weight mean, accumulated incrementally so identical votes return the
// shared value exactly.
double soft_vote(std::span<const double> polarities);

// 1 + floor((p + 1) / (2/7)), clamped to [1, 7].
int sentiment_bin(double mean_polarity);

inline constexpr std::size_t kSentimentWindow = 3;  // client turns

class SentimentEnsemble {
public:
    // Manifest: {"classifiers": [{"id", "lexicon", "rules"}]}, lexicon paths
    // relative to the manifest.
    static SentimentEnsemble load(const std::filesystem::path& manifest);
    static SentimentEnsemble from_json(const nlohmann::json& manifest, const std::filesystem::path& base_dir);

    void add(LexiconClassifier classifier);

    std::vector<std::string> ids() const;
    const std::vector<LexiconClassifier>& classifiers() const noexcept { return classifiers_; }

    double classify_polarity(std::string_view text, std::string_view classifier_id) const;

    SentimentLabel label_text(std::string_view text) const;

    // Scores the last kSentimentWindow client turns joined by newlines.
    SentimentLabel emo_label(const Transcript& history) const;

private:
    std::vector<LexiconClassifier> classifiers_;
};

std::string window_text(const Transcript& history, std::size_t client_turns = kSentimentWindow);

nlohmann::json to_json(const SentimentLabel& label);

} // namespace calmdesk
