#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "calmdesk/prompts.hpp"
#include "calmdesk/transcript.hpp"

namespace calmdesk {

inline constexpr std::string_view kSentinel = "FINISH:999";
inline constexpr int kMaxExchanges = 12;
inline constexpr std::size_t kIncidentTurns = 5;

enum class Domain { airlines, hotels, mobile };
enum class Category { service_quality, product_issues, pricing_charges, policy, resolution };

inline constexpr std::array kAllDomains = {Domain::airlines, Domain::hotels, Domain::mobile};
inline constexpr std::array kAllCategories = {Category::service_quality, Category::product_issues,
                                              Category::pricing_charges, Category::policy,
                                              Category::resolution};

std::string_view to_string(Domain d);
std::string_view to_string(Category c);
std::string_view display_name(Domain d);
std::string_view display_name(Category c);
Domain domain_from_string(std::string_view s);
Category category_from_string(std::string_view s);

struct ComplaintSpec {
    Domain domain = Domain::airlines;
    Category category = Category::service_quality;
    std::int64_t seed = 0;

    bool operator==(const ComplaintSpec&) const = default;
};

enum class Behavioral { focused, stressed, bored };
enum class Personality { resilient, undercontrolled, overcontrolled };

std::string_view to_string(Behavioral b);
std::string_view to_string(Personality p);
Behavioral behavioral_from_string(std::string_view s);
Personality personality_from_string(std::string_view s);

// Context sentences shown with an incident.
std::string_view context_text(Behavioral b);
std::string_view context_text(Personality p);

struct ContextVariation {
    std::optional<Behavioral> behavioral;
    std::optional<Personality> personality;
    std::string rendered_text;

    bool operator==(const ContextVariation&) const = default;
};

struct Incident {
    ComplaintSpec spec;
    Transcript transcript;
    std::optional<ContextVariation> variation;

    bool operator==(const Incident&) const = default;
};

enum class Persona { civil, uncivil };
enum class CloseReason { sentinel, turn_cap, resolved };

std::string_view to_string(Persona p);
std::string_view to_string(CloseReason r);
Persona persona_from_string(std::string_view s);
CloseReason close_reason_from_string(std::string_view s);

struct ConversationState {
    Transcript transcript;
    Persona persona = Persona::uncivil;
    int exchange_count = 0;
    bool closed = false;
    std::optional<CloseReason> close_reason;

    bool operator==(const ConversationState&) const = default;
};

// Opens a live conversation with the complaint as the first client turn.
ConversationState open_conversation(std::string complaint, Persona persona, std::int64_t timestamp_ms = 0);

struct ClientTurnResult {
    std::optional<std::string> reply;
    ConversationState state;
};

struct SentinelSplit {
    std::string text;  // trimmed text preceding the sentinel, or the whole text
    bool found = false;
};

SentinelSplit split_sentinel(std::string_view completion);

// Generates the complaint for spec via the few-shot complaint prompt.
std::string generate_complaint(const ComplaintSpec& spec, const ChainEnv& env);

Incident create_incident(const ComplaintSpec& spec, const ChainEnv& env);

// Every (domain, category, seed) combination for seeds [0, seeds).
std::vector<ComplaintSpec> incident_matrix(int seeds = 3);

Incident apply_variation(const Incident& incident, std::optional<Behavioral> behavioral,
                         std::optional<Personality> personality);

ClientTurnResult client_turn(ConversationState state, const std::string& csr_message, const ChainEnv& env,
                             std::int64_t timestamp_ms = 0);

std::vector<std::string> parse_cues(std::string_view completion);
std::vector<std::string> generate_cues(const ConversationState& state, const ChainEnv& env);

nlohmann::json to_json(const ComplaintSpec& spec);
ComplaintSpec complaint_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Incident& incident);
Incident incident_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ConversationState& state);
ConversationState conversation_from_json(const nlohmann::json& j);

std::size_t word_count(std::string_view text);
std::string first_words(std::string_view text, std::size_t n);

} // namespace calmdesk
