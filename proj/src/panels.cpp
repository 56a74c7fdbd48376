#include "calmdesk/panels.hpp"

#include <algorithm>
#include <sstream>

#include "calmdesk/errors.hpp"
#include "calmdesk/lingua/text.hpp"
#include "calmdesk/simulant.hpp"

namespace calmdesk {

namespace {

struct HistoryView {
    std::span<const ChatTurn> before;
    std::string latest;
};

// Turns preceding the most recent client turn, and that turn's text.
HistoryView latest_client_view(const Transcript& history) {
    const auto turns = history.turns();
    for (std::size_t i = turns.size(); i-- > 0;)
        if (turns[i].speaker == Speaker::client) return {turns.first(i), turns[i].text};
    throw PreconditionError("history has no client turn");
}

std::string run_step(const ChainEnv& env, const std::string& prompt, std::string_view step) {
    for (int attempt = 0; attempt < 2; ++attempt) {
        auto out = trim(complete_prompt(env, prompt));
        if (!out.empty()) return out;
    }
    throw EmptyStepError(std::string(step));
}

// Text after a list marker, or nullopt when the line carries none.
std::optional<std::string_view> strip_marker(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    s.remove_prefix(i);
    if (s.starts_with("- ") || s.starts_with("* ")) return s.substr(2);
    if (s.starts_with("•")) return s.substr(3);
    std::size_t j = 0;
    while (j < s.size() && s[j] >= '0' && s[j] <= '9') ++j;
    if (j > 0 && j < s.size() && (s[j] == '.' || s[j] == ')')) return s.substr(j + 1);
    return std::nullopt;
}

} // namespace

std::vector<std::string> bundle_violations(const ReframeBundle& b) {
    std::vector<std::string> out;
    const std::array<const std::string*, 5> fields = {&b.situation, &b.thought, &b.thought_paraphrase, &b.reframe,
                                                      &b.reframe_paraphrase};
    for (std::size_t i = 0; i < fields.size(); ++i)
        if (trim(*fields[i]).empty()) out.push_back(std::string(kReframeSteps[i]) + " is empty");

    bool starter = false;
    const auto para = trim(b.thought_paraphrase);
    for (const auto s : kParaphraseStarters) starter = starter || para.starts_with(s);
    if (!starter) out.emplace_back("thought_paraphrase does not open with a starter phrase");

    const auto tokens = lingua::tokenize(b.reframe_paraphrase).tokens;
    if (std::find(tokens.begin(), tokens.end(), "you") == tokens.end())
        out.emplace_back("reframe_paraphrase does not address \"you\"");
    return out;
}

ReframeBundle emo_reframe(const Transcript& history, const ChainEnv& env) {
    const auto view = latest_client_view(history);
    const auto& reg = env.kit.registry;
    ReframeBundle b;
    b.situation = run_step(env, with_history(reg.render(TemplateId::situation, {}), view.before, "Latest input", view.latest),
                           kReframeSteps[0]);
    b.thought = run_step(env,
                         reg.render(TemplateId::thought, {{"situation", b.situation},
                                                          {"examples", format_examples(env.kit.thoughts.examples)}}),
                         kReframeSteps[1]);
    b.thought_paraphrase = run_step(env, reg.render(TemplateId::thought_paraphrase, {{"thought", b.thought}}),
                                    kReframeSteps[2]);
    b.reframe = run_step(env,
                         reg.render(TemplateId::reframe, {{"situation", b.situation},
                                                          {"thought", b.thought},
                                                          {"examples", format_examples(env.kit.reframes.examples)}}),
                         kReframeSteps[3]);
    b.reframe_paraphrase = run_step(env, reg.render(TemplateId::reframe_paraphrase, {{"reframe", b.reframe}}),
                                    kReframeSteps[4]);
    return b;
}

std::optional<GuideSteps> parse_guide(std::string_view completion) {
    GuideSteps guide;
    std::istringstream in{std::string(completion)};
    for (std::string line; std::getline(in, line);) {
        const auto body = strip_marker(line);
        if (!body) continue;
        auto step = trim(*body);
        if (step.empty()) continue;
        if (guide.steps.size() < kMaxGuideSteps) guide.steps.push_back(first_words(step, kMaxGuideStepWords));
    }
    if (guide.steps.size() < kMinGuideSteps) return std::nullopt;
    return guide;
}

GuideSteps info_guide(const Transcript& history, const ChainEnv& env) {
    const auto view = latest_client_view(history);
    const auto prompt =
        with_history(env.kit.registry.render(TemplateId::info_guide, {}), view.before, "Latest input", view.latest);
    for (int attempt = 0; attempt < 2; ++attempt)
        if (auto guide = parse_guide(complete_prompt(env, prompt))) return *guide;
    throw GuideParseError("completion did not contain 3-6 steps");
}

nlohmann::json to_json(const ReframeBundle& b) {
    return {{"situation", b.situation},
            {"thought", b.thought},
            {"thought_paraphrase", b.thought_paraphrase},
            {"reframe", b.reframe},
            {"reframe_paraphrase", b.reframe_paraphrase}};
}

ReframeBundle reframe_bundle_from_json(const nlohmann::json& j) {
    return {j.at("situation").get<std::string>(), j.at("thought").get<std::string>(),
            j.at("thought_paraphrase").get<std::string>(), j.at("reframe").get<std::string>(),
            j.at("reframe_paraphrase").get<std::string>()};
}

nlohmann::json to_json(const GuideSteps& guide) { return {{"steps", guide.steps}}; }

} // namespace calmdesk
