#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "calmdesk/prompts.hpp"
#include "calmdesk/sentiment.hpp"
#include "calmdesk/service/session.hpp"
#include "calmdesk/service/store.hpp"

namespace calmdesk::service {

struct StudyOptions {
    StudyFlow flow = StudyFlow::default_flow();
    std::uint64_t seed = 0;  // session ids and default complaint specs
    bool cues = true;
    // Text of the single helpfulness item shown with each panel.
    std::map<PanelId, std::string> rating_labels = {
        {PanelId::info_guide, "How helpful was this guidance?"},
        {PanelId::emo_label, "How helpful was this emotion label?"},
        {PanelId::emo_reframe, "How helpful was this reframing message?"},
    };
};

struct MessageResult {
    std::optional<std::string> client_reply;
    bool closed = false;
    bool stage_advanced = false;
    bool session_complete = false;
    std::size_t stage_index = 0;
    std::map<PanelId, nlohmann::json> panels;
    std::vector<std::string> cues;
};

struct ExportFilter {
    std::optional<std::string> source;  // "simulant", "pilot" or "participant"
    std::optional<std::string> session_id;
};

// Orchestrates live study sessions over an event store. Calls for one session
// are serialized; calls for different sessions run concurrently.
class StudyService {
public:
    using Clock = std::function<std::int64_t()>;

    StudyService(const PromptKit& kit, const Backend& backend, CompletionParams params,
                 const SentimentEnsemble& sentiment, EventStore& store, StudyOptions options = {},
                 Clock clock = {});

    // Rebuilds every session from the store.
    std::size_t recover();

    SessionState create_session(std::optional<StudyFlow> flow = std::nullopt,
                                std::optional<ComplaintSpec> spec = std::nullopt);
    MessageResult post_message(const std::string& session_id, const std::string& text);
    std::set<PanelId> post_rating(const std::string& session_id, PanelId panel, int score);
    void post_survey(const std::string& session_id, const SurveyResponse& response);

    SessionState get(const std::string& session_id) const;
    std::vector<std::string> session_ids() const;

    // Records derived from the event logs, one JSON object each.
    std::vector<nlohmann::json> export_corpus(const ExportFilter& filter = {});

    const StudyOptions& options() const noexcept { return options_; }

private:
    struct Slot {
        mutable std::mutex mutex;
        SessionState state;
    };

    std::shared_ptr<Slot> slot(const std::string& session_id) const;
    ChainEnv env_for(const ComplaintSpec& spec) const;
    std::vector<Event> commit(Slot& slot, std::vector<std::pair<EventKind, nlohmann::json>> pending);
    std::map<PanelId, nlohmann::json> compute_panels(const Stage& stage, const Transcript& transcript,
                                                     const ChainEnv& env) const;
    std::string new_id();

    const PromptKit& kit_;
    const Backend& backend_;
    CompletionParams params_;
    const SentimentEnsemble& sentiment_;
    EventStore& store_;
    StudyOptions options_;
    Clock clock_;

    mutable std::mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<Slot>> sessions_;
    std::mt19937_64 rng_;
};

std::vector<nlohmann::json> export_records(const std::map<std::string, std::vector<Event>>& logs,
                                           const ExportFilter& filter = {});

} // namespace calmdesk::service
