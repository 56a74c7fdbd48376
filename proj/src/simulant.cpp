#include "calmdesk/simulant.hpp"

#include <array>
#include <sstream>

#include "calmdesk/errors.hpp"

namespace calmdesk {

namespace {

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view s, const std::array<Enum, N>& all, const char* what) {
    for (const auto e : all)
        if (to_string(e) == s) return e;
    throw ParseError(std::string("unknown ") + what + ": " + std::string(s));
}

constexpr std::array kBehaviorals = {Behavioral::focused, Behavioral::stressed, Behavioral::bored};
constexpr std::array kPersonalities = {Personality::resilient, Personality::undercontrolled,
                                       Personality::overcontrolled};
constexpr std::array kPersonas = {Persona::civil, Persona::uncivil};
constexpr std::array kCloseReasons = {CloseReason::sentinel, CloseReason::turn_cap, CloseReason::resolved};

} // namespace

std::string_view to_string(Domain d) {
    switch (d) {
    case Domain::airlines: return "airlines";
    case Domain::hotels: return "hotels";
    case Domain::mobile: return "mobile";
    }
    return "airlines";
}

std::string_view to_string(Category c) {
    switch (c) {
    case Category::service_quality: return "service_quality";
    case Category::product_issues: return "product_issues";
    case Category::pricing_charges: return "pricing_charges";
    case Category::policy: return "policy";
    case Category::resolution: return "resolution";
    }
    return "service_quality";
}

std::string_view display_name(Domain d) {
    switch (d) {
    case Domain::airlines: return "Airline";
    case Domain::hotels: return "Hotel";
    case Domain::mobile: return "Mobile Network";
    }
    return "Airline";
}

std::string_view display_name(Category c) {
    switch (c) {
    case Category::service_quality: return "Service Quality";
    case Category::product_issues: return "Product Issues";
    case Category::pricing_charges: return "Pricing and Charges";
    case Category::policy: return "Policy";
    case Category::resolution: return "Resolution";
    }
    return "Service Quality";
}

Domain domain_from_string(std::string_view s) { return parse_enum(s, kAllDomains, "domain"); }
Category category_from_string(std::string_view s) { return parse_enum(s, kAllCategories, "category"); }

std::string_view to_string(Behavioral b) {
    switch (b) {
    case Behavioral::focused: return "focused";
    case Behavioral::stressed: return "stressed";
    case Behavioral::bored: return "bored";
    }
    return "focused";
}

std::string_view to_string(Personality p) {
    switch (p) {
    case Personality::resilient: return "resilient";
    case Personality::undercontrolled: return "undercontrolled";
    case Personality::overcontrolled: return "overcontrolled";
    }
    return "resilient";
}

Behavioral behavioral_from_string(std::string_view s) { return parse_enum(s, kBehaviorals, "behavioral context"); }
Personality personality_from_string(std::string_view s) { return parse_enum(s, kPersonalities, "personality"); }

std::string_view context_text(Behavioral b) {
    switch (b) {
    case Behavioral::focused:
        return "The conversation takes place about 2 hours into the work shift. The representative has already "
               "addressed a few customer complaints before the following incident.";
    case Behavioral::stressed:
        return "The conversation takes place in the second half of the work shift. The representative has been "
               "working longer hours over the past few days and has not been taking breaks.";
    case Behavioral::bored:
        return "The conversation takes place in the middle of the work shift. The representative has been spending "
               "minimal time on tasks and has been regularly checking their personal messages.";
    }
    return {};
}

std::string_view context_text(Personality p) {
    switch (p) {
    case Personality::resilient:
        return "They are organized and dependable. They tend to remain composed when facing challenges, but are "
               "prone to setting unrealistic expectations.";
    case Personality::undercontrolled:
        return "They are outgoing, competitive, and high energy. They tend to work on impulse, but are also prone "
               "to frustration.";
    case Personality::overcontrolled:
        return "They are detail-oriented and reliable but might appear distant. They tend to work carefully, but "
               "are prone to overthinking.";
    }
    return {};
}

std::string_view to_string(Persona p) { return p == Persona::civil ? "civil" : "uncivil"; }

std::string_view to_string(CloseReason r) {
    switch (r) {
    case CloseReason::sentinel: return "sentinel";
    case CloseReason::turn_cap: return "turn_cap";
    case CloseReason::resolved: return "resolved";
    }
    return "sentinel";
}

Persona persona_from_string(std::string_view s) { return parse_enum(s, kPersonas, "persona"); }
CloseReason close_reason_from_string(std::string_view s) { return parse_enum(s, kCloseReasons, "close reason"); }

// --- text helpers -----------------------------------------------------------

std::size_t word_count(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::size_t n = 0;
    for (std::string w; in >> w;) ++n;
    return n;
}

std::string first_words(std::string_view text, std::size_t n) {
    std::istringstream in{std::string(text)};
    std::string out;
    std::size_t k = 0;
    for (std::string w; k < n && in >> w; ++k) {
        if (!out.empty()) out += ' ';
        out += w;
    }
    return out;
}

SentinelSplit split_sentinel(std::string_view completion) {
    const auto pos = completion.find(kSentinel);
    if (pos == std::string_view::npos) return {trim(completion), false};
    return {trim(completion.substr(0, pos)), true};
}

// --- incidents ---------------------------------------------------------------

std::vector<ComplaintSpec> incident_matrix(int seeds) {
    std::vector<ComplaintSpec> out;
    for (const auto d : kAllDomains)
        for (const auto c : kAllCategories)
            for (int s = 0; s < seeds; ++s) out.push_back({d, c, s});
    return out;
}

namespace {

constexpr std::size_t kComplaintExamples = 5;

ChainEnv seeded(const ChainEnv& env, std::int64_t seed) {
    ChainEnv out = env;
    out.params.seed = seed;
    return out;
}

std::string representative_reply(std::span<const ChatTurn> history, const std::string& latest, const ChainEnv& env) {
    const auto question = contextualize_history(history, latest, env);
    const std::array<PromptMessage, 2> messages{
        PromptMessage{Role::system, env.kit.registry.render(TemplateId::representative_reply, {})},
        PromptMessage{Role::user, question},
    };
    auto reply = split_sentinel(complete(messages, env.params, env.backend)).text;
    if (reply.empty()) throw StructureError("representative reply was blank");
    return reply;
}

// Client reply inside a generated incident; a sentinel-only completion is
// regenerated once.
std::string incident_client_reply(std::span<const ChatTurn> history, const std::string& latest, const ChainEnv& env) {
    const auto question = contextualize_history(history, latest, env);
    const auto prompt = env.kit.registry.render(TemplateId::uncivil_reply, {{"question", question}});
    for (int attempt = 0; attempt < 2; ++attempt) {
        auto reply = split_sentinel(complete_prompt(env, prompt)).text;
        if (!reply.empty()) return reply;
    }
    throw StructureError("client closed the incident before turn " + std::to_string(kIncidentTurns));
}

} // namespace

std::string generate_complaint(const ComplaintSpec& spec, const ChainEnv& env) {
    ExamplePool pool = env.kit.complaints;
    pool.selection_seed = env.kit.complaints.selection_seed * 1000003ULL + static_cast<std::uint64_t>(spec.seed) * 131ULL +
                          static_cast<std::uint64_t>(spec.domain) * 7ULL + static_cast<std::uint64_t>(spec.category);
    const auto examples = sample_examples(pool, std::min(kComplaintExamples, pool.examples.size()));
    const auto prompt = env.kit.registry.render(TemplateId::complaint_init, {
                                                                                {"domain", std::string(display_name(spec.domain))},
                                                                                {"category", std::string(display_name(spec.category))},
                                                                                {"examples", format_examples(examples)},
                                                                            });
    auto complaint = split_sentinel(complete_prompt(seeded(env, spec.seed), prompt)).text;
    if (complaint.empty()) throw StructureError("generated complaint was blank");
    return complaint;
}

Incident create_incident(const ComplaintSpec& spec, const ChainEnv& base_env) {
    const ChainEnv env = seeded(base_env, spec.seed);
    Incident incident{spec, {}, std::nullopt};
    auto& t = incident.transcript;
    t.append(Speaker::client, generate_complaint(spec, env));
    while (t.size() < kIncidentTurns) {
        const auto history = t.turns().first(t.size() - 1);
        const auto& latest = t.back().text;
        if (t.next_speaker() == Speaker::representative)
            t.append(Speaker::representative, representative_reply(history, latest, env));
        else
            t.append(Speaker::client, incident_client_reply(history, latest, env));
    }
    return incident;
}

Incident apply_variation(const Incident& incident, std::optional<Behavioral> behavioral,
                         std::optional<Personality> personality) {
    if (!behavioral && !personality) throw NoContextError("a behavioral or personality context is required");
    ContextVariation v{behavioral, personality, {}};
    if (behavioral) v.rendered_text = context_text(*behavioral);
    if (personality) {
        if (!v.rendered_text.empty()) v.rendered_text += ' ';
        v.rendered_text += context_text(*personality);
    }
    Incident out = incident;
    out.variation = std::move(v);
    return out;
}

// --- live conversation -------------------------------------------------------

ConversationState open_conversation(std::string complaint, Persona persona, std::int64_t timestamp_ms) {
    ConversationState state;
    state.persona = persona;
    state.transcript.append(Speaker::client, std::move(complaint), timestamp_ms);
    return state;
}

ClientTurnResult client_turn(ConversationState state, const std::string& csr_message, const ChainEnv& env,
                             std::int64_t timestamp_ms) {
    if (state.closed) throw ClosedSessionError("conversation is closed");
    if (trim(csr_message).empty()) throw PreconditionError("representative message must be non-empty");

    state.transcript.append(Speaker::representative, csr_message, timestamp_ms);
    const auto history = state.transcript.turns().first(state.transcript.size() - 1);
    const auto question = contextualize_history(history, csr_message, env);
    const auto id = state.persona == Persona::uncivil ? TemplateId::uncivil_reply : TemplateId::civil_reply;
    const auto prompt = env.kit.registry.render(id, {{"question", question}});

    SentinelSplit split = split_sentinel(complete_prompt(env, prompt));
    if (!split.found && split.text.empty()) split = split_sentinel(complete_prompt(env, prompt));
    if (!split.found && split.text.empty()) throw StructureError("client reply was blank");

    ClientTurnResult result;
    if (!split.text.empty()) {
        state.transcript.append(Speaker::client, split.text, timestamp_ms);
        result.reply = std::move(split.text);
    }
    ++state.exchange_count;
    if (split.found) {
        state.closed = true;
        state.close_reason = CloseReason::sentinel;
    } else if (state.exchange_count >= kMaxExchanges) {
        state.closed = true;
        state.close_reason = CloseReason::turn_cap;
    }
    result.state = std::move(state);
    return result;
}

std::vector<std::string> parse_cues(std::string_view completion) {
    std::vector<std::string> cues;
    std::istringstream in{std::string(completion)};
    for (std::string line; std::getline(in, line);) {
        std::string_view s = line;
        std::size_t i = 0;
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        if (i < s.size() && (s[i] == '-' || s[i] == '*')) {
            ++i;
        } else if (s.substr(i).starts_with("•")) {
            i += 3;
        } else {
            std::size_t j = i;
            while (j < s.size() && s[j] >= '0' && s[j] <= '9') ++j;
            if (j > i && j < s.size() && (s[j] == '.' || s[j] == ')')) i = j + 1;
        }
        auto cue = trim(s.substr(i));
        if (cue.size() >= 2 && cue.front() == '"' && cue.back() == '"') cue = trim(std::string_view(cue).substr(1, cue.size() - 2));
        if (cue.empty()) continue;
        cues.push_back(first_words(cue, 12));
        if (cues.size() == 3) break;
    }
    return cues;
}

std::vector<std::string> generate_cues(const ConversationState& state, const ChainEnv& env) {
    if (state.closed) throw ClosedSessionError("conversation is closed");
    const auto& t = state.transcript;
    if (t.empty()) throw PreconditionError("conversation has no turns");
    const auto history = t.turns().first(t.size() - 1);
    const auto latest = contextualize_history(history, t.back().text, env);
    const auto prompt = with_history(env.kit.registry.render(TemplateId::response_cues, {}), history, "Latest input", latest);
    for (int attempt = 0; attempt < 2; ++attempt) {
        auto cues = parse_cues(complete_prompt(env, prompt));
        if (cues.size() >= 2) return cues;
    }
    throw CueParseError("completion did not contain 2-3 cue lines");
}

// --- JSON --------------------------------------------------------------------

nlohmann::json to_json(const ComplaintSpec& spec) {
    return {{"domain", to_string(spec.domain)}, {"category", to_string(spec.category)}, {"seed", spec.seed}};
}

ComplaintSpec complaint_spec_from_json(const nlohmann::json& j) {
    return {domain_from_string(j.at("domain").get<std::string>()),
            category_from_string(j.at("category").get<std::string>()), j.value("seed", std::int64_t{0})};
}

nlohmann::json to_json(const Incident& incident) {
    nlohmann::json j;
    j["spec"] = to_json(incident.spec);
    if (incident.variation) {
        const auto& v = *incident.variation;
        j["variation"] = {
            {"behavioral", v.behavioral ? nlohmann::json(to_string(*v.behavioral)) : nlohmann::json(nullptr)},
            {"personality", v.personality ? nlohmann::json(to_string(*v.personality)) : nlohmann::json(nullptr)},
            {"rendered_text", v.rendered_text},
        };
    } else {
        j["variation"] = nullptr;
    }
    j["turns"] = to_json(incident.transcript);
    return j;
}

Incident incident_from_json(const nlohmann::json& j) {
    Incident incident;
    incident.spec = complaint_spec_from_json(j.at("spec"));
    incident.transcript = transcript_from_json(j.at("turns"));
    if (j.contains("variation") && !j.at("variation").is_null()) {
        const auto& v = j.at("variation");
        ContextVariation cv;
        if (v.contains("behavioral") && !v.at("behavioral").is_null())
            cv.behavioral = behavioral_from_string(v.at("behavioral").get<std::string>());
        if (v.contains("personality") && !v.at("personality").is_null())
            cv.personality = personality_from_string(v.at("personality").get<std::string>());
        cv.rendered_text = v.value("rendered_text", std::string());
        incident.variation = std::move(cv);
    }
    return incident;
}

nlohmann::json to_json(const ConversationState& state) {
    return {
        {"turns", to_json(state.transcript)},
        {"persona", to_string(state.persona)},
        {"exchange_count", state.exchange_count},
        {"closed", state.closed},
        {"close_reason", state.close_reason ? nlohmann::json(to_string(*state.close_reason)) : nlohmann::json(nullptr)},
    };
}

ConversationState conversation_from_json(const nlohmann::json& j) {
    ConversationState s;
    s.transcript = transcript_from_json(j.at("turns"));
    s.persona = persona_from_string(j.at("persona").get<std::string>());
    s.exchange_count = j.at("exchange_count").get<int>();
    s.closed = j.at("closed").get<bool>();
    if (!j.at("close_reason").is_null()) s.close_reason = close_reason_from_string(j.at("close_reason").get<std::string>());
    return s;
}

} // namespace calmdesk
