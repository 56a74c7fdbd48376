#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace calmdesk::lingua {

// Weighted word list read from "token<TAB>weight" lines ('#' starts a comment;
// a missing weight means 1). A trailing '*' makes the entry a prefix match.
class WeightedLexicon {
public:
    static WeightedLexicon parse(std::istream& in, const std::string& origin = "<stream>");
    static WeightedLexicon load(const std::filesystem::path& path);

    void add(std::string token, double weight);
    std::optional<double> lookup(std::string_view token) const;
    bool contains(std::string_view token) const { return lookup(token).has_value(); }
    std::size_t size() const noexcept { return exact_.size() + prefixes_.size(); }

private:
    std::unordered_map<std::string, double> exact_;
    std::vector<std::pair<std::string, double>> prefixes_;  // longest first
};

inline constexpr std::string_view kRequiredCategories[] = {
    "article",       "preposition", "personal_pronoun", "impersonal_pronoun", "aux_verb",     "conjunction",
    "adverb",        "negation",    "first_singular",   "first_plural",       "second_person", "third_singular",
    "third_plural",  "pos_affect",  "anger",            "sad",
};

inline constexpr std::string_view kCdiCategories[] = {
    "article", "preposition", "personal_pronoun", "impersonal_pronoun", "aux_verb", "conjunction", "adverb", "negation",
};

class CategoryLexicon {
public:
    // One <category>.txt file per category in dir, each in WeightedLexicon
    // format (weights ignored).
    static CategoryLexicon load(const std::filesystem::path& dir);

    void add(std::string category, WeightedLexicon words);
    void validate() const;  // every required category present and non-empty

    const std::map<std::string, WeightedLexicon, std::less<>>& categories() const noexcept { return categories_; }

private:
    std::map<std::string, WeightedLexicon, std::less<>> categories_;
};

} // namespace calmdesk::lingua
