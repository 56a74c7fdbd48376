#include "calmdesk/stats/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

namespace calmdesk::stats {

namespace {

constexpr std::array<std::pair<std::string_view, std::string_view>, 22> kLabels = {{
    {"verbosity", "Verbosity"},
    {"repeatability", "Repeatability"},
    {"cli", "Readability"},
    {"cdi", "Categorical Dynamic Index (CDI)"},
    {"external_empathy", "Empathy"},
    {"external_reactivity", "Emotional Reactivity"},
    {"adaptability", "Adaptability"},
    {"pos_affect", "Pos. Affect"},
    {"anger", "Anger"},
    {"sad", "Sad"},
    {"first_singular", "1st P. Sin."},
    {"first_plural", "1st P. Plu."},
    {"second_person", "2nd P."},
    {"third_singular", "3rd P. Sin."},
    {"third_plural", "3rd P. Plu."},
    {"impersonal_pronoun", "Impersonal Prn."},
    {"total", "Total"},
    {"sincerity", "Sincerity"},
    {"compassion", "Compassion"},
    {"warmth", "Warmth"},
    {"actionable", "Actionable"},
    {"relatability", "Relatability"},
}};

constexpr std::array<std::string_view, 9> kTableCategories = {
    "pos_affect",   "anger",          "sad",         "first_singular",     "first_plural",
    "second_person", "third_singular", "third_plural", "impersonal_pronoun",
};

std::optional<double> diff_percent(double mean_a, double mean_b) {
    if (mean_b == 0.0) return std::nullopt;
    return (mean_a - mean_b) / mean_b * 100.0;
}

} // namespace

const ReportRow* ComparisonReport::find(std::string_view metric) const {
    for (const auto& r : rows)
        if (r.metric == metric) return &r;
    return nullptr;
}

std::string metric_label(std::string_view metric) {
    for (const auto& [name, label] : kLabels)
        if (name == metric) return std::string(label);
    return std::string(metric);
}

ReportRow compare_columns(std::string metric, std::string label, const Eigen::ArrayXd& a, const Eigen::ArrayXd& b,
                          EffectMode mode) {
    if (a.size() != b.size()) throw LengthMismatchError("report columns differ in length for " + metric);
    ReportRow row;
    row.metric = std::move(metric);
    row.label = std::move(label);
    row.n = static_cast<std::size_t>(a.size());
    if (a.size() == 0) {
        row.degenerate = true;
        return row;
    }
    row.mean_a = a.mean();
    row.mean_b = b.mean();
    row.diff_percent = diff_percent(row.mean_a, row.mean_b);
    try {
        const auto r = paired_t(a, b, mode);
        row.t = r.statistic;
        row.p = r.p_value;
        row.d = r.effect_size_d;
        row.stars = stars(r.p_value);
    } catch (const DegenerateSampleError&) {
        row.degenerate = true;
    }
    return row;
}

Pairing pair_by_id(const std::vector<lingua::MetricRow>& rows_a, const std::vector<lingua::MetricRow>& rows_b) {
    std::unordered_map<std::string_view, bool> in_b;
    for (const auto& r : rows_b) in_b.emplace(r.message_id, true);
    Pairing out;
    for (const auto& r : rows_a)
        if (in_b.contains(r.message_id)) out.emplace_back(r.message_id, r.message_id);
    return out;
}

std::vector<std::string> category_order(const std::vector<lingua::MetricRow>& rows) {
    std::set<std::string> present;
    for (const auto& r : rows)
        for (const auto& [k, v] : r.category_rates) present.insert(k);
    std::vector<std::string> out;
    for (const auto c : kTableCategories)
        if (present.erase(std::string(c)) != 0) out.emplace_back(c);
    out.insert(out.end(), present.begin(), present.end());
    return out;
}

ComparisonReport compare_corpora(const std::vector<lingua::MetricRow>& rows_a,
                                 const std::vector<lingua::MetricRow>& rows_b, const Pairing& pairing,
                                 EffectMode mode) {
    std::unordered_map<std::string_view, const lingua::MetricRow*> by_a, by_b;
    for (const auto& r : rows_a) by_a.emplace(r.message_id, &r);
    for (const auto& r : rows_b) by_b.emplace(r.message_id, &r);

    std::vector<std::string> missing;
    std::vector<std::pair<const lingua::MetricRow*, const lingua::MetricRow*>> pairs;
    for (const auto& [ia, ib] : pairing) {
        const auto a = by_a.find(ia);
        const auto b = by_b.find(ib);
        if (a == by_a.end()) missing.push_back("a:" + ia);
        if (b == by_b.end()) missing.push_back("b:" + ib);
        if (a != by_a.end() && b != by_b.end()) pairs.emplace_back(a->second, b->second);
    }
    if (!missing.empty()) {
        std::string msg = "pairing ids missing from corpora:";
        for (const auto& m : missing) msg += " " + m;
        throw PairingError(msg);
    }

    ComparisonReport report;
    report.label_a = "a";
    report.label_b = "b";

    // Extracts a column over the pairs where both sides have a value.
    auto column = [&](std::string metric, auto get) {
        std::vector<double> va, vb;
        for (const auto& [a, b] : pairs) {
            const std::optional<double> x = get(*a), y = get(*b);
            if (x && y) {
                va.push_back(*x);
                vb.push_back(*y);
            }
        }
        if (va.empty()) return;
        const Eigen::ArrayXd ea = Eigen::Map<const Eigen::ArrayXd>(va.data(), static_cast<Eigen::Index>(va.size()));
        const Eigen::ArrayXd eb = Eigen::Map<const Eigen::ArrayXd>(vb.data(), static_cast<Eigen::Index>(vb.size()));
        auto label = metric_label(metric);
        report.rows.push_back(compare_columns(std::move(metric), std::move(label), ea, eb, mode));
    };

    using Row = lingua::MetricRow;
    column("verbosity", [](const Row& r) -> std::optional<double> { return static_cast<double>(r.verbosity); });
    column("repeatability", [](const Row& r) -> std::optional<double> { return r.repeatability; });
    column("cli", [](const Row& r) -> std::optional<double> { return r.cli; });
    column("cdi", [](const Row& r) -> std::optional<double> { return r.cdi; });
    column("external_empathy", [](const Row& r) { return r.external_empathy; });
    column("external_reactivity", [](const Row& r) { return r.external_reactivity; });
    column("adaptability", [](const Row& r) { return r.adaptability; });

    std::vector<lingua::MetricRow> all(rows_a);
    all.insert(all.end(), rows_b.begin(), rows_b.end());
    for (const auto& cat : category_order(all)) {
        column(cat, [&cat](const Row& r) -> std::optional<double> {
            const auto it = r.category_rates.find(cat);
            if (it == r.category_rates.end()) return std::nullopt;
            return it->second;
        });
    }
    return report;
}

// --- output ------------------------------------------------------------------

nlohmann::json to_json(const ComparisonReport& report) {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows) {
        rows.push_back({{"metric", r.metric},
                        {"label", r.label},
                        {"mean_a", r.mean_a},
                        {"mean_b", r.mean_b},
                        {"diff_percent", opt(r.diff_percent)},
                        {"d", opt(r.d)},
                        {"t", opt(r.t)},
                        {"p", opt(r.p)},
                        {"p_adjusted", opt(r.p_adjusted)},
                        {"stars", r.stars},
                        {"n", r.n},
                        {"degenerate", r.degenerate}});
    }
    return {{"label_a", report.label_a}, {"label_b", report.label_b}, {"dropped", report.dropped}, {"rows", rows}};
}

std::string format_table(const ComparisonReport& report) {
    auto num = [](const std::optional<double>& v, int prec) {
        return v ? fmt::format("{:.{}f}", *v, prec) : std::string("-");
    };
    std::vector<std::array<std::string, 7>> cells;
    cells.push_back({"Metric", "mean(" + report.label_a + ")", "mean(" + report.label_b + ")", "Diff %", "d", "t", ""});
    for (const auto& r : report.rows) {
        const bool small = std::abs(r.mean_a) < 1.0 && std::abs(r.mean_b) < 1.0;
        cells.push_back({r.label, fmt::format("{:.{}f}", r.mean_a, small ? 3 : 2),
                         fmt::format("{:.{}f}", r.mean_b, small ? 3 : 2), num(r.diff_percent, 2), num(r.d, 2),
                         num(r.t, 2), r.degenerate ? std::string("degenerate") : r.stars});
    }
    std::array<std::size_t, 7> width{};
    for (const auto& row : cells)
        for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());

    std::string out;
    for (const auto& row : cells) {
        std::string line = fmt::format("{:<{}}", row[0], width[0]);
        for (std::size_t i = 1; i < row.size(); ++i) line += fmt::format("  {:>{}}", row[i], width[i]);
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out += line + '\n';
    }
    if (report.dropped > 0) out += fmt::format("dropped unpaired records: {}\n", report.dropped);
    return out;
}

} // namespace calmdesk::stats
