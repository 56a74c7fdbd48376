#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "calmdesk/lingua/metrics.hpp"
#include "calmdesk/stats/tests.hpp"

namespace calmdesk::stats {

struct ReportRow {
    std::string metric;  // machine name
    std::string label;   // table label
    double mean_a = 0.0;
    double mean_b = 0.0;
    std::optional<double> diff_percent;  // absent when mean_b == 0
    std::optional<double> d;
    std::optional<double> t;
    std::optional<double> p;
    std::optional<double> p_adjusted;
    std::string stars;
    std::size_t n = 0;
    bool degenerate = false;
};

struct ComparisonReport {
    std::string label_a;
    std::string label_b;
    std::vector<ReportRow> rows;
    std::size_t dropped = 0;  // records without a partner

    const ReportRow* find(std::string_view metric) const;
};

// Builds one row from paired columns. Zero-variance differences yield a row
// flagged degenerate with no t, p or d.
ReportRow compare_columns(std::string metric, std::string label, const Eigen::ArrayXd& a, const Eigen::ArrayXd& b,
                          EffectMode mode = EffectMode::pooled);

using Pairing = std::vector<std::pair<std::string, std::string>>;  // (id in a, id in b)

// Pairs rows sharing a message_id, in the order of rows_a.
Pairing pair_by_id(const std::vector<lingua::MetricRow>& rows_a, const std::vector<lingua::MetricRow>& rows_b);

// Row order: verbosity, repeatability, readability, cdi, external empathy and
// reactivity when present, adaptability, then category rates.
ComparisonReport compare_corpora(const std::vector<lingua::MetricRow>& rows_a,
                                 const std::vector<lingua::MetricRow>& rows_b, const Pairing& pairing,
                                 EffectMode mode = EffectMode::pooled);

// Category rows in table order, followed by any other categories.
std::vector<std::string> category_order(const std::vector<lingua::MetricRow>& rows);
std::string metric_label(std::string_view metric);

// --- ratings -----------------------------------------------------------------

inline constexpr std::array<std::string_view, 5> kSubscales = {"sincerity", "compassion", "warmth", "actionable",
                                                              "relatability"};
inline constexpr int kScaleMin = 1;
inline constexpr int kScaleMax = 7;

struct RatingRecord {
    std::string incident_id;
    std::string rater_id;
    lingua::Source source = lingua::Source::human;
    std::array<int, 5> subscales{};  // kSubscales order

    double total(bool centered = false) const;
    double subscale(std::size_t i, bool centered = false) const;
    void validate() const;
};

// Header: incident_id,rater_id,source,sincerity,compassion,warmth,actionable,relatability
std::vector<RatingRecord> parse_ratings_csv(std::istream& in);
std::vector<RatingRecord> load_ratings_csv(const std::filesystem::path& path);

inline constexpr std::size_t kSubscaleComparisons = 5;

// Pilot (a) against human (b), paired on (incident_id, rater_id). Subscale
// p-values are Bonferroni-adjusted with m = 5. Centered mode maps 1..7 to -3..3.
ComparisonReport compare_ratings(const std::vector<RatingRecord>& records, bool centered = false,
                                 EffectMode mode = EffectMode::pooled);

nlohmann::json to_json(const ComparisonReport& report);

// Aligned columns: metric, mean a, mean b, diff %, d, t, stars.
std::string format_table(const ComparisonReport& report);

} // namespace calmdesk::stats
