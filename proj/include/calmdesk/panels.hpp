#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "calmdesk/prompts.hpp"
#include "calmdesk/transcript.hpp"

namespace calmdesk {

struct ReframeBundle {
    std::string situation;
    std::string thought;
    std::string thought_paraphrase;
    std::string reframe;
    std::string reframe_paraphrase;

    bool operator==(const ReframeBundle&) const = default;
};

inline constexpr std::array<std::string_view, 3> kParaphraseStarters = {
    "You might be thinking",
    "It might seem like",
    "It could be that you are feeling",
};

inline constexpr std::array<std::string_view, 5> kReframeSteps = {
    "situation", "thought", "thought_paraphrase", "reframe", "reframe_paraphrase",
};

// Empty when the bundle meets every structural contract; otherwise one
// message per violation.
std::vector<std::string> bundle_violations(const ReframeBundle& bundle);

// Five completions on the happy path: situation, thought, thought paraphrase,
// reframe, reframe paraphrase. Each step is retried once on a blank completion.
ReframeBundle emo_reframe(const Transcript& history, const ChainEnv& env);

inline constexpr std::size_t kMinGuideSteps = 3;
inline constexpr std::size_t kMaxGuideSteps = 6;
inline constexpr std::size_t kMaxGuideStepWords = 30;

struct GuideSteps {
    std::vector<std::string> steps;

    bool operator==(const GuideSteps&) const = default;
};

// Numbered or bulleted lines, first kMaxGuideSteps kept, each cut to
// kMaxGuideStepWords words. nullopt when fewer than kMinGuideSteps are found.
std::optional<GuideSteps> parse_guide(std::string_view completion);

GuideSteps info_guide(const Transcript& history, const ChainEnv& env);

nlohmann::json to_json(const ReframeBundle& bundle);
ReframeBundle reframe_bundle_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GuideSteps& guide);

} // namespace calmdesk
