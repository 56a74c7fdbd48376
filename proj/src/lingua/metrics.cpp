#include "calmdesk/lingua/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "calmdesk/errors.hpp"

namespace calmdesk::lingua {

// --- lexica ------------------------------------------------------------------

WeightedLexicon WeightedLexicon::parse(std::istream& in, const std::string& origin) {
    WeightedLexicon lex;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
        const auto start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        line.erase(0, start);

        const auto tab = line.find('\t');
        std::string token = line.substr(0, tab);
        double weight = 1.0;
        if (tab != std::string::npos) {
            const std::string w = line.substr(tab + 1);
            try {
                std::size_t used = 0;
                weight = std::stod(w, &used);
                if (w.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(w);
            } catch (const std::exception&) {
                throw ParseError(origin + ":" + std::to_string(lineno) + ": bad weight '" + w + "'");
            }
        }
        std::transform(token.begin(), token.end(), token.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        lex.add(std::move(token), weight);
    }
    return lex;
}

WeightedLexicon WeightedLexicon::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open lexicon " + path.string());
    return parse(in, path.string());
}

void WeightedLexicon::add(std::string token, double weight) {
    if (token.empty()) return;
    if (token.back() == '*') {
        token.pop_back();
        prefixes_.emplace_back(std::move(token), weight);
        std::stable_sort(prefixes_.begin(), prefixes_.end(),
                         [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
    } else {
        exact_.insert_or_assign(std::move(token), weight);
    }
}

std::optional<double> WeightedLexicon::lookup(std::string_view token) const {
    if (const auto it = exact_.find(std::string(token)); it != exact_.end()) return it->second;
    for (const auto& [prefix, weight] : prefixes_)
        if (token.starts_with(prefix)) return weight;
    return std::nullopt;
}

CategoryLexicon CategoryLexicon::load(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw ConfigError("category lexicon directory not found: " + dir.string());
    CategoryLexicon lex;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        lex.add(entry.path().stem().string(), WeightedLexicon::load(entry.path()));
    }
    lex.validate();
    return lex;
}

void CategoryLexicon::add(std::string category, WeightedLexicon words) {
    categories_.insert_or_assign(std::move(category), std::move(words));
}

void CategoryLexicon::validate() const {
    for (const auto name : kRequiredCategories) {
        const auto it = categories_.find(name);
        if (it == categories_.end() || it->second.size() == 0)
            throw MissingCategoryError("category lexicon lacks " + std::string(name));
    }
}

// --- metrics -----------------------------------------------------------------

std::size_t verbosity(const TokenizedText& t) { return t.token_count(); }

double repeatability(const TokenizedText& t) {
    if (t.tokens.empty()) throw EmptyTextError("repeatability of empty text");
    const std::unordered_set<std::string_view> distinct(t.tokens.begin(), t.tokens.end());
    return static_cast<double>(t.tokens.size() - distinct.size()) / static_cast<double>(t.tokens.size());
}

Readability coleman_liau(const TokenizedText& t) {
    if (t.tokens.empty() || t.sentences.empty()) throw EmptyTextError("readability needs at least one word and sentence");
    const double words = static_cast<double>(t.tokens.size());
    Readability r;
    r.letters_per_100_words = static_cast<double>(t.letter_count) / words * 100.0;
    r.sentences_per_100_words = static_cast<double>(t.sentences.size()) / words * 100.0;
    r.cli = 0.0588 * r.letters_per_100_words - 0.296 * r.sentences_per_100_words - 15.8;
    return r;
}

CategoryRates category_rates(const TokenizedText& t, const CategoryLexicon& lexicon) {
    if (t.tokens.empty()) throw EmptyTextError("category rates of empty text");
    CategoryRates rates;
    const double n = static_cast<double>(t.tokens.size());
    for (const auto& [name, words] : lexicon.categories()) {
        std::size_t hits = 0;
        for (const auto& tok : t.tokens) hits += words.contains(tok);
        rates.emplace(name, static_cast<double>(hits) / n);
    }
    return rates;
}

double cdi(const CategoryRates& rates) {
    auto rate = [&](std::string_view name) {
        const auto it = rates.find(name);
        if (it == rates.end()) throw MissingCategoryError("cdi needs rate for " + std::string(name));
        return it->second;
    };
    const double categorical = rate("article") + rate("preposition");
    const double dynamic = rate("personal_pronoun") + rate("impersonal_pronoun") + rate("aux_verb") +
                           rate("conjunction") + rate("adverb") + rate("negation");
    return 30.0 + 100.0 * (categorical - dynamic);
}

std::string_view to_string(Source s) {
    switch (s) {
    case Source::human: return "human";
    case Source::pilot: return "pilot";
    case Source::other: return "other";
    }
    return "other";
}

Source source_from_string(std::string_view s) {
    if (s == "human") return Source::human;
    if (s == "pilot") return Source::pilot;
    if (s == "other" || s.empty()) return Source::other;
    throw ParseError("unknown source: " + std::string(s));
}

MetricRow metric_vector(std::string message_id, Source source, std::string_view message,
                        std::string_view incident_text, const MetricAssets& assets, const ExternalScores& external) {
    const auto tokens = tokenize(message);
    if (tokens.tokens.empty()) throw EmptyTextError("message " + message_id + " has no words");
    MetricRow row;
    row.message_id = std::move(message_id);
    row.source = source;
    row.verbosity = verbosity(tokens);
    row.repeatability = repeatability(tokens);
    row.cli = coleman_liau(tokens).cli;
    row.category_rates = category_rates(tokens, assets.lexicon);
    row.cdi = cdi(row.category_rates);
    if (assets.embeddings != nullptr) row.adaptability = adaptability(incident_text, message, *assets.embeddings);
    row.external_empathy = external.empathy;
    row.external_reactivity = external.reactivity;
    return row;
}

namespace {

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::optional<double> optional_from(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

} // namespace

nlohmann::json to_json(const MetricRow& row) {
    nlohmann::json rates = nlohmann::json::object();
    for (const auto& [k, v] : row.category_rates) rates[k] = v;
    return {
        {"message_id", row.message_id},
        {"source", to_string(row.source)},
        {"verbosity", row.verbosity},
        {"repeatability", row.repeatability},
        {"cli", row.cli},
        {"cdi", row.cdi},
        {"adaptability", optional_json(row.adaptability)},
        {"category_rates", rates},
        {"external_empathy", optional_json(row.external_empathy)},
        {"external_reactivity", optional_json(row.external_reactivity)},
    };
}

MetricRow metric_row_from_json(const nlohmann::json& j) {
    MetricRow row;
    row.message_id = j.at("message_id").get<std::string>();
    row.source = source_from_string(j.value("source", std::string("other")));
    row.verbosity = j.at("verbosity").get<std::size_t>();
    row.repeatability = j.at("repeatability").get<double>();
    row.cli = j.at("cli").get<double>();
    row.cdi = j.at("cdi").get<double>();
    row.adaptability = optional_from(j, "adaptability");
    for (const auto& [k, v] : j.at("category_rates").items()) row.category_rates.emplace(k, v.get<double>());
    row.external_empathy = optional_from(j, "external_empathy");
    row.external_reactivity = optional_from(j, "external_reactivity");
    return row;
}

} // namespace calmdesk::lingua
