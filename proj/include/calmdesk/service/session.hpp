#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "calmdesk/simulant.hpp"

namespace calmdesk::service {

enum class PanelId { info_guide, emo_label, emo_reframe };

inline constexpr std::array kAllPanels = {PanelId::info_guide, PanelId::emo_label, PanelId::emo_reframe};

std::string_view to_string(PanelId p);
PanelId panel_from_string(std::string_view s);

struct Stage {
    Persona persona = Persona::civil;
    std::set<PanelId> panels;
    bool warmup = false;

    bool operator==(const Stage&) const = default;
};

struct StudyFlow {
    std::vector<Stage> stages;

    // Warm-up civil with the guide, civil with the guide, uncivil with the
    // guide, uncivil with every panel.
    static StudyFlow default_flow();
    void validate() const;

    bool operator==(const StudyFlow&) const = default;
};

inline constexpr int kRatingMin = 1;
inline constexpr int kRatingMax = 7;

inline constexpr std::array<std::string_view, 8> kSupportItems = {
    "effective", "helpful", "beneficial", "adequate", "sensitive", "caring", "understanding", "supportive",
};

struct SurveyResponse {
    std::string phase;  // "pre" or "post_stage_<k>", k the zero-based stage index
    int q1_polite = 0, q1_dignity = 0, q1_respect = 0;  // 1..7
    int q2_demands = 0, q2_resources = 0;              // 1..5
    int q3_pleasure = 0, q3_energy = 0;                // 1..5
    std::optional<std::map<std::string, int>> q4_support;  // kSupportItems -> 1..5

    // Scale bounds and q4 item names.
    void validate() const;
    // nullopt for "pre".
    std::optional<std::size_t> post_stage() const;

    bool operator==(const SurveyResponse&) const = default;
};

std::string post_stage_phase(std::size_t stage);

enum class EventKind { session_created, csr_message, client_reply, panel_update, rating, survey, stage_advanced, closed };

std::string_view to_string(EventKind k);
EventKind event_kind_from_string(std::string_view s);

struct Event {
    std::uint64_t seq = 0;     // 0-based, contiguous per session
    std::int64_t at = 0;       // ms since epoch, strictly increasing per session
    std::uint64_t batch = 0;   // events written together share a batch
    std::uint32_t batch_size = 1;
    EventKind kind = EventKind::session_created;
    nlohmann::json payload;

    bool operator==(const Event&) const = default;
};

nlohmann::json to_json(const Event& e);
Event event_from_json(const nlohmann::json& j);

// Closed stage kept for export.
struct StageRecord {
    std::size_t stage = 0;
    ComplaintSpec spec;
    ConversationState conversation;

    bool operator==(const StageRecord&) const = default;
};

struct SessionState {
    std::string id;
    StudyFlow flow;
    ComplaintSpec spec;
    std::size_t stage_index = 0;
    ConversationState conversation;
    std::set<PanelId> pending_ratings;
    std::map<PanelId, nlohmann::json> panels;  // latest payload per panel
    std::map<std::string, SurveyResponse> surveys;
    std::vector<StageRecord> finished_stages;
    bool complete = false;
    std::size_t event_count = 0;
    std::int64_t last_at = 0;

    const Stage& stage() const { return flow.stages.at(stage_index); }
    bool any_message() const;

    bool operator==(const SessionState&) const = default;
};

// Applies one event; events must arrive in seq order.
void apply(SessionState& state, const Event& e);

// State reconstructed from a full event log.
SessionState replay(const std::vector<Event>& events);

nlohmann::json to_json(const StudyFlow& flow);
StudyFlow study_flow_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SurveyResponse& s);
SurveyResponse survey_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SessionState& s);

// Spec of the complaint opening stage k: same domain, category rotated by k,
// seed offset by k.
ComplaintSpec stage_spec(const ComplaintSpec& base, std::size_t stage);

} // namespace calmdesk::service
