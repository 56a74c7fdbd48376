#include "calmdesk/service/study.hpp"

#include <chrono>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "calmdesk/errors.hpp"
#include "calmdesk/panels.hpp"

namespace calmdesk::service {

namespace {

std::int64_t system_now() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

bool exposes_emo_panels(const Stage& stage) {
    return stage.panels.contains(PanelId::emo_label) || stage.panels.contains(PanelId::emo_reframe);
}

} // namespace

StudyService::StudyService(const PromptKit& kit, const Backend& backend, CompletionParams params,
                           const SentimentEnsemble& sentiment, EventStore& store, StudyOptions options, Clock clock)
    : kit_(kit),
      backend_(backend),
      params_(std::move(params)),
      sentiment_(sentiment),
      store_(store),
      options_(std::move(options)),
      clock_(clock ? std::move(clock) : Clock(system_now)),
      rng_(options_.seed != 0 ? options_.seed : std::random_device{}()) {
    options_.flow.validate();
}

std::size_t StudyService::recover() {
    auto logs = store_.load_all();
    std::lock_guard lock(sessions_mutex_);
    for (auto& [id, events] : logs) {
        auto slot = std::make_shared<Slot>();
        slot->state = replay(events);
        sessions_.insert_or_assign(id, std::move(slot));
    }
    return logs.size();
}

std::shared_ptr<StudyService::Slot> StudyService::slot(const std::string& session_id) const {
    std::lock_guard lock(sessions_mutex_);
    const auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw NotFoundError("no session " + session_id);
    return it->second;
}

ChainEnv StudyService::env_for(const ComplaintSpec& spec) const {
    ChainEnv env{kit_, backend_, params_};
    env.params.seed = spec.seed;
    return env;
}

std::string StudyService::new_id() {
    std::lock_guard lock(sessions_mutex_);
    for (;;) {
        auto id = fmt::format("{:016x}", rng_());
        if (!sessions_.contains(id)) return id;
    }
}

std::vector<Event> StudyService::commit(Slot& slot, std::vector<std::pair<EventKind, nlohmann::json>> pending) {
    std::vector<Event> events;
    const auto first = static_cast<std::uint64_t>(slot.state.event_count);
    std::int64_t last = slot.state.event_count == 0 ? std::numeric_limits<std::int64_t>::min() : slot.state.last_at;
    for (std::size_t i = 0; i < pending.size(); ++i) {
        Event e;
        e.seq = first + i;
        e.at = std::max(clock_(), last + 1);
        last = e.at;
        e.batch = first;
        e.batch_size = static_cast<std::uint32_t>(pending.size());
        e.kind = pending[i].first;
        e.payload = std::move(pending[i].second);
        events.push_back(std::move(e));
    }
    SessionState next = slot.state;
    for (const auto& e : events) apply(next, e);
    store_.append(next.id, events);
    slot.state = std::move(next);
    return events;
}

std::map<PanelId, nlohmann::json> StudyService::compute_panels(const Stage& stage, const Transcript& transcript,
                                                               const ChainEnv& env) const {
    std::map<PanelId, nlohmann::json> out;
    for (const auto p : stage.panels) {
        switch (p) {
        case PanelId::info_guide: out[p] = to_json(info_guide(transcript, env)); break;
        case PanelId::emo_label: out[p] = to_json(sentiment_.emo_label(transcript)); break;
        case PanelId::emo_reframe: out[p] = to_json(emo_reframe(transcript, env)); break;
        }
    }
    return out;
}

SessionState StudyService::create_session(std::optional<StudyFlow> flow, std::optional<ComplaintSpec> spec) {
    StudyFlow f = flow ? std::move(*flow) : options_.flow;
    f.validate();
    if (!spec) {
        std::lock_guard lock(sessions_mutex_);
        ComplaintSpec s;
        s.domain = rng_() % 2 == 0 ? Domain::airlines : Domain::hotels;
        s.category = kAllCategories[rng_() % kAllCategories.size()];
        s.seed = static_cast<std::int64_t>(rng_() % 1000000);
        spec = s;
    }
    const auto id = new_id();
    const auto env = env_for(*spec);
    const auto complaint = generate_complaint(stage_spec(*spec, 0), env);
    const auto opening = open_conversation(complaint, f.stages.front().persona);
    const auto panels = compute_panels(f.stages.front(), opening.transcript, env);

    std::vector<std::pair<EventKind, nlohmann::json>> pending;
    pending.emplace_back(EventKind::session_created,
                         nlohmann::json{{"id", id}, {"flow", to_json(f)}, {"spec", to_json(*spec)}, {"complaint", complaint}});
    for (const auto& [p, payload] : panels)
        pending.emplace_back(EventKind::panel_update, nlohmann::json{{"panel", to_string(p)}, {"payload", payload}});

    auto slot = std::make_shared<Slot>();
    std::lock_guard slot_lock(slot->mutex);
    commit(*slot, std::move(pending));
    {
        std::lock_guard lock(sessions_mutex_);
        sessions_.emplace(id, slot);
    }
    spdlog::info("session {} created: {} stages, domain {}", id, f.stages.size(), to_string(spec->domain));
    return slot->state;
}

MessageResult StudyService::post_message(const std::string& session_id, const std::string& text) {
    const auto s = slot(session_id);
    std::lock_guard lock(s->mutex);
    const auto& state = s->state;
    if (state.complete || state.conversation.closed) throw ClosedSessionError("session " + session_id + " is closed");
    if (!state.pending_ratings.empty()) {
        std::string which;
        for (const auto p : state.pending_ratings) which += (which.empty() ? "" : ", ") + std::string(to_string(p));
        throw RatingPendingError("rate every panel before continuing: " + which);
    }
    if (trim(text).empty()) throw ValidationError("message text is empty");

    const auto env = env_for(stage_spec(state.spec, state.stage_index));
    const auto turn = client_turn(state.conversation, text, env);

    std::vector<std::pair<EventKind, nlohmann::json>> pending;
    pending.emplace_back(EventKind::csr_message, nlohmann::json{{"text", text}});
    const auto& conv = turn.state;
    pending.emplace_back(EventKind::client_reply,
                         nlohmann::json{{"text", turn.reply ? nlohmann::json(*turn.reply) : nlohmann::json(nullptr)},
                                        {"exchange_count", conv.exchange_count},
                                        {"closed", conv.closed},
                                        {"close_reason", conv.close_reason ? nlohmann::json(to_string(*conv.close_reason))
                                                                           : nlohmann::json(nullptr)}});

    MessageResult result;
    result.client_reply = turn.reply;
    result.closed = conv.closed;
    if (!conv.closed) {
        result.panels = compute_panels(state.stage(), conv.transcript, env);
        if (options_.cues) {
            try {
                result.cues = generate_cues(conv, env);
            } catch (const CueParseError& e) {
                spdlog::debug("session {}: cues omitted: {}", session_id, e.what());
            }
        }
    } else if (state.stage_index + 1 < state.flow.stages.size()) {
        const auto next = state.stage_index + 1;
        const auto next_spec = stage_spec(state.spec, next);
        const auto next_env = env_for(next_spec);
        const auto complaint = generate_complaint(next_spec, next_env);
        const auto& stage = state.flow.stages[next];
        result.panels = compute_panels(stage, open_conversation(complaint, stage.persona).transcript, next_env);
        pending.emplace_back(EventKind::stage_advanced, nlohmann::json{{"stage_index", next}, {"complaint", complaint}});
        result.stage_advanced = true;
    } else {
        pending.emplace_back(EventKind::closed, nlohmann::json{{"reason", to_string(*conv.close_reason)}});
        result.session_complete = true;
    }
    for (const auto& [p, payload] : result.panels)
        pending.emplace_back(EventKind::panel_update, nlohmann::json{{"panel", to_string(p)}, {"payload", payload}});

    commit(*s, std::move(pending));
    result.stage_index = s->state.stage_index;
    return result;
}

std::set<PanelId> StudyService::post_rating(const std::string& session_id, PanelId panel, int score) {
    const auto s = slot(session_id);
    std::lock_guard lock(s->mutex);
    if (score < kRatingMin || score > kRatingMax) throw RangeError("rating must be in 1..7");
    if (!s->state.pending_ratings.contains(panel))
        throw NotPendingError(std::string(to_string(panel)) + " has no pending rating");
    commit(*s, {{EventKind::rating, nlohmann::json{{"panel", to_string(panel)}, {"score", score}}}});
    return s->state.pending_ratings;
}

void StudyService::post_survey(const std::string& session_id, const SurveyResponse& response) {
    const auto s = slot(session_id);
    std::lock_guard lock(s->mutex);
    response.validate();
    const auto& state = s->state;
    if (state.surveys.contains(response.phase)) throw DuplicateError("survey " + response.phase + " already submitted");
    if (const auto k = response.post_stage()) {
        if (*k >= state.flow.stages.size()) throw PhaseError("no stage " + std::to_string(*k));
        if (*k >= state.finished_stages.size()) throw PhaseError("stage " + std::to_string(*k) + " has not finished");
        if (response.q4_support && !exposes_emo_panels(state.flow.stages[*k]))
            throw ValidationError("q4_support applies only after stages with emotion panels");
    } else if (state.any_message()) {
        throw PhaseError("the pre survey must precede the first message");
    }
    commit(*s, {{EventKind::survey, to_json(response)}});
}

SessionState StudyService::get(const std::string& session_id) const {
    const auto s = slot(session_id);
    std::lock_guard lock(s->mutex);
    return s->state;
}

std::vector<std::string> StudyService::session_ids() const {
    std::lock_guard lock(sessions_mutex_);
    std::vector<std::string> out;
    for (const auto& [id, slot] : sessions_) out.push_back(id);
    return out;
}

std::vector<nlohmann::json> StudyService::export_corpus(const ExportFilter& filter) {
    // Holding every session lock gives a consistent snapshot.
    std::vector<std::shared_ptr<Slot>> slots;
    {
        std::lock_guard lock(sessions_mutex_);
        for (const auto& [id, slot] : sessions_)
            if (!filter.session_id || *filter.session_id == id) slots.push_back(slot);
    }
    std::vector<std::unique_lock<std::mutex>> locks;
    for (const auto& s : slots) locks.emplace_back(s->mutex);
    std::map<std::string, std::vector<Event>> logs;
    for (const auto& s : slots) logs.emplace(s->state.id, store_.load(s->state.id));
    return export_records(logs, filter);
}

std::vector<nlohmann::json> export_records(const std::map<std::string, std::vector<Event>>& logs,
                                           const ExportFilter& filter) {
    std::vector<nlohmann::json> out;
    auto emit = [&](nlohmann::json record) {
        if (filter.source && record.at("source").get<std::string>() != *filter.source) return;
        out.push_back(std::move(record));
    };
    for (const auto& [id, events] : logs) {
        if (filter.session_id && *filter.session_id != id) continue;
        SessionState state;
        for (const auto& e : events) {
            const auto before_stage = state.stage_index;
            apply(state, e);
            switch (e.kind) {
            case EventKind::stage_advanced:
            case EventKind::closed: {
                const auto& done = state.finished_stages.back();
                emit({{"type", "incident"},
                      {"source", "simulant"},
                      {"session_id", id},
                      {"stage", done.stage},
                      {"spec", to_json(done.spec)},
                      {"persona", to_string(done.conversation.persona)},
                      {"close_reason", done.conversation.close_reason
                                           ? nlohmann::json(to_string(*done.conversation.close_reason))
                                           : nlohmann::json(nullptr)},
                      {"transcript", to_json(done.conversation.transcript)}});
                break;
            }
            case EventKind::panel_update:
                if (e.payload.at("panel") == "emo_reframe") {
                    const auto& bundle = e.payload.at("payload");
                    emit({{"type", "reframe"},
                          {"source", "pilot"},
                          {"session_id", id},
                          {"stage", state.stage_index},
                          {"message_id", fmt::format("{}-{}", id, e.seq)},
                          {"text", bundle.at("reframe_paraphrase")},
                          {"incident", state.conversation.transcript.joined_text()},
                          {"bundle", bundle}});
                }
                break;
            case EventKind::rating:
                emit({{"type", "rating"},
                      {"source", "participant"},
                      {"session_id", id},
                      {"stage", before_stage},
                      {"panel", e.payload.at("panel")},
                      {"score", e.payload.at("score")}});
                break;
            case EventKind::survey: {
                nlohmann::json record = e.payload;
                record["type"] = "survey";
                record["source"] = "participant";
                record["session_id"] = id;
                emit(std::move(record));
                break;
            }
            default: break;
            }
        }
    }
    return out;
}

} // namespace calmdesk::service
