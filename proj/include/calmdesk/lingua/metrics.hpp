#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "calmdesk/lingua/embedding.hpp"
#include "calmdesk/lingua/lexicon.hpp"
#include "calmdesk/lingua/text.hpp"

namespace calmdesk::lingua {

using CategoryRates = std::map<std::string, double, std::less<>>;

std::size_t verbosity(const TokenizedText& t);

// (tokens - distinct tokens) / tokens
double repeatability(const TokenizedText& t);

struct Readability {
    double letters_per_100_words = 0.0;    // L
    double sentences_per_100_words = 0.0;  // S
    double cli = 0.0;
};

// Coleman-Liau index: 0.0588 L - 0.296 S - 15.8
Readability coleman_liau(const TokenizedText& t);

CategoryRates category_rates(const TokenizedText& t, const CategoryLexicon& lexicon);

// Categorical-dynamic index from per-token rates (fractions, not percents).
double cdi(const CategoryRates& rates);

template <typename Scalar>
std::optional<double> adaptability(std::string_view incident_text, std::string_view message_text,
                                   const BasicEmbeddingTable<Scalar>& table) {
    const auto a = document_vector(tokenize(incident_text).tokens, table);
    const auto b = document_vector(tokenize(message_text).tokens, table);
    if (!a || !b) return std::nullopt;
    return cosine(*a, *b);
}

enum class Source { human, pilot, other };

std::string_view to_string(Source s);
Source source_from_string(std::string_view s);

struct MetricRow {
    std::string message_id;
    Source source = Source::other;
    std::size_t verbosity = 0;
    double repeatability = 0.0;
    double cli = 0.0;
    double cdi = 0.0;
    std::optional<double> adaptability;
    CategoryRates category_rates;
    std::optional<double> external_empathy;
    std::optional<double> external_reactivity;

    bool operator==(const MetricRow&) const = default;
};

struct ExternalScores {
    std::optional<double> empathy;
    std::optional<double> reactivity;
};

struct MetricAssets {
    const CategoryLexicon& lexicon;
    const EmbeddingTable* embeddings = nullptr;
};

MetricRow metric_vector(std::string message_id, Source source, std::string_view message,
                        std::string_view incident_text, const MetricAssets& assets,
                        const ExternalScores& external = {});

nlohmann::json to_json(const MetricRow& row);
MetricRow metric_row_from_json(const nlohmann::json& j);

} // namespace calmdesk::lingua
