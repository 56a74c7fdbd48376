#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "calmdesk/stats/report.hpp"

namespace calmdesk::stats {

namespace {

constexpr std::array<std::string_view, 8> kHeader = {"incident_id", "rater_id",   "source",     "sincerity",
                                                     "compassion",  "warmth", "actionable", "relatability"};

// Splits one CSV record; double quotes delimit fields that may contain commas.
std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                out.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                out.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.emplace_back();
        } else {
            out.back() += c;
        }
    }
    if (quoted) throw ParseError("unterminated quote in ratings row");
    for (auto& f : out) {
        const auto b = f.find_first_not_of(" \t\r");
        const auto e = f.find_last_not_of(" \t\r");
        f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
    }
    return out;
}

int parse_score(const std::string& s, std::string_view column, std::size_t lineno) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ParseError("ratings line " + std::to_string(lineno) + ": " + std::string(column) + " is not an integer: '" +
                     s + "'");
}

} // namespace

double RatingRecord::subscale(std::size_t i, bool centered) const {
    return static_cast<double>(subscales.at(i)) - (centered ? 4.0 : 0.0);
}

double RatingRecord::total(bool centered) const {
    double t = 0.0;
    for (std::size_t i = 0; i < subscales.size(); ++i) t += subscale(i, centered);
    return t;
}

void RatingRecord::validate() const {
    if (incident_id.empty() || rater_id.empty()) throw ValidationError("rating needs incident_id and rater_id");
    if (source == lingua::Source::other) throw ValidationError("rating source must be human or pilot");
    for (std::size_t i = 0; i < subscales.size(); ++i)
        if (subscales[i] < kScaleMin || subscales[i] > kScaleMax)
            throw RangeError(std::string(kSubscales[i]) + " outside " + std::to_string(kScaleMin) + ".." +
                             std::to_string(kScaleMax));
}

std::vector<RatingRecord> parse_ratings_csv(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") != std::string::npos) break;
    }
    const auto header = split_csv(line);
    if (header.size() != kHeader.size() || !std::equal(header.begin(), header.end(), kHeader.begin()))
        throw ParseError("ratings header must be incident_id,rater_id,source,sincerity,compassion,warmth,actionable,relatability");

    std::vector<RatingRecord> out;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto f = split_csv(line);
        if (f.size() != kHeader.size())
            throw ParseError("ratings line " + std::to_string(lineno) + " has " + std::to_string(f.size()) + " fields");
        RatingRecord r;
        r.incident_id = f[0];
        r.rater_id = f[1];
        r.source = lingua::source_from_string(f[2]);
        for (std::size_t i = 0; i < kSubscales.size(); ++i) r.subscales[i] = parse_score(f[3 + i], kHeader[3 + i], lineno);
        r.validate();
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<RatingRecord> load_ratings_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open ratings file " + path.string());
    return parse_ratings_csv(in);
}

ComparisonReport compare_ratings(const std::vector<RatingRecord>& records, bool centered, EffectMode mode) {
    using Key = std::pair<std::string, std::string>;
    std::map<Key, const RatingRecord*> pilot, human;
    for (const auto& r : records) {
        r.validate();
        auto& side = r.source == lingua::Source::pilot ? pilot : human;
        if (!side.emplace(Key{r.incident_id, r.rater_id}, &r).second)
            throw PairingError("duplicate rating for incident " + r.incident_id + " by rater " + r.rater_id);
    }

    std::vector<std::pair<const RatingRecord*, const RatingRecord*>> pairs;
    for (const auto& [key, p] : pilot)
        if (const auto h = human.find(key); h != human.end()) pairs.emplace_back(p, h->second);
    if (pairs.empty()) throw NoPairsError("no (incident, rater) pair has both a pilot and a human rating");

    ComparisonReport report;
    report.label_a = "pilot";
    report.label_b = "human";
    report.dropped = records.size() - 2 * pairs.size();

    const auto n = static_cast<Eigen::Index>(pairs.size());
    auto build = [&](std::string metric, auto get) {
        Eigen::ArrayXd a(n), b(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            a(i) = get(*pairs[static_cast<std::size_t>(i)].first);
            b(i) = get(*pairs[static_cast<std::size_t>(i)].second);
        }
        auto label = metric_label(metric);
        report.rows.push_back(compare_columns(std::move(metric), std::move(label), a, b, mode));
    };

    build("total", [&](const RatingRecord& r) { return r.total(centered); });
    for (std::size_t i = 0; i < kSubscales.size(); ++i)
        build(std::string(kSubscales[i]), [&, i](const RatingRecord& r) { return r.subscale(i, centered); });

    for (std::size_t i = 1; i < report.rows.size(); ++i) {
        auto& row = report.rows[i];
        if (!row.p) continue;
        const std::array<double, 1> p{*row.p};
        row.p_adjusted = bonferroni(std::span<const double>(p), kSubscaleComparisons).front();
        row.stars = stars(*row.p_adjusted);
    }
    return report;
}

} // namespace calmdesk::stats
