#include "calmdesk/service/session.hpp"

#include <algorithm>

#include "calmdesk/errors.hpp"

namespace calmdesk::service {

std::string_view to_string(PanelId p) {
    switch (p) {
    case PanelId::info_guide: return "info_guide";
    case PanelId::emo_label: return "emo_label";
    case PanelId::emo_reframe: return "emo_reframe";
    }
    return "info_guide";
}

PanelId panel_from_string(std::string_view s) {
    for (const auto p : kAllPanels)
        if (to_string(p) == s) return p;
    throw ValidationError("unknown panel: " + std::string(s));
}

StudyFlow StudyFlow::default_flow() {
    return {{
        {Persona::civil, {PanelId::info_guide}, true},
        {Persona::civil, {PanelId::info_guide}, false},
        {Persona::uncivil, {PanelId::info_guide}, false},
        {Persona::uncivil, {PanelId::info_guide, PanelId::emo_label, PanelId::emo_reframe}, false},
    }};
}

void StudyFlow::validate() const {
    if (stages.empty()) throw ValidationError("study flow needs at least one stage");
}

namespace {

void check_scale(int v, int lo, int hi, std::string_view name) {
    if (v < lo || v > hi)
        throw RangeError(std::string(name) + " must be in " + std::to_string(lo) + ".." + std::to_string(hi));
}

constexpr std::string_view kPostPrefix = "post_stage_";

} // namespace

std::string post_stage_phase(std::size_t stage) { return std::string(kPostPrefix) + std::to_string(stage); }

std::optional<std::size_t> SurveyResponse::post_stage() const {
    if (phase == "pre") return std::nullopt;
    if (!phase.starts_with(kPostPrefix)) throw ValidationError("unknown survey phase: " + phase);
    const auto digits = phase.substr(kPostPrefix.size());
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos || digits.size() > 6)
        throw ValidationError("unknown survey phase: " + phase);
    return static_cast<std::size_t>(std::stoul(digits));
}

void SurveyResponse::validate() const {
    (void)post_stage();
    check_scale(q1_polite, 1, 7, "q1_polite");
    check_scale(q1_dignity, 1, 7, "q1_dignity");
    check_scale(q1_respect, 1, 7, "q1_respect");
    check_scale(q2_demands, 1, 5, "q2_demands");
    check_scale(q2_resources, 1, 5, "q2_resources");
    check_scale(q3_pleasure, 1, 5, "q3_pleasure");
    check_scale(q3_energy, 1, 5, "q3_energy");
    if (q4_support) {
        if (phase == "pre") throw ValidationError("q4_support is not asked before the task");
        if (q4_support->size() != kSupportItems.size()) throw ValidationError("q4_support needs all 8 items");
        for (const auto item : kSupportItems) {
            const auto it = q4_support->find(std::string(item));
            if (it == q4_support->end()) throw ValidationError("q4_support lacks " + std::string(item));
            check_scale(it->second, 1, 5, "q4_support." + std::string(item));
        }
    }
}

std::string_view to_string(EventKind k) {
    switch (k) {
    case EventKind::session_created: return "session_created";
    case EventKind::csr_message: return "csr_message";
    case EventKind::client_reply: return "client_reply";
    case EventKind::panel_update: return "panel_update";
    case EventKind::rating: return "rating";
    case EventKind::survey: return "survey";
    case EventKind::stage_advanced: return "stage_advanced";
    case EventKind::closed: return "closed";
    }
    return "closed";
}

EventKind event_kind_from_string(std::string_view s) {
    for (const auto k : {EventKind::session_created, EventKind::csr_message, EventKind::client_reply,
                         EventKind::panel_update, EventKind::rating, EventKind::survey, EventKind::stage_advanced,
                         EventKind::closed})
        if (to_string(k) == s) return k;
    throw ParseError("unknown event kind: " + std::string(s));
}

nlohmann::json to_json(const Event& e) {
    return {{"seq", e.seq},   {"at", e.at},         {"batch", e.batch}, {"batch_size", e.batch_size},
            {"kind", to_string(e.kind)}, {"payload", e.payload}};
}

Event event_from_json(const nlohmann::json& j) {
    Event e;
    e.seq = j.at("seq").get<std::uint64_t>();
    e.at = j.at("at").get<std::int64_t>();
    e.batch = j.at("batch").get<std::uint64_t>();
    e.batch_size = j.at("batch_size").get<std::uint32_t>();
    e.kind = event_kind_from_string(j.at("kind").get<std::string>());
    e.payload = j.at("payload");
    return e;
}

bool SessionState::any_message() const {
    if (!finished_stages.empty()) return true;
    return conversation.transcript.size() > 1;
}

ComplaintSpec stage_spec(const ComplaintSpec& base, std::size_t stage) {
    ComplaintSpec s = base;
    const auto cat = (static_cast<std::size_t>(base.category) + stage) % kAllCategories.size();
    s.category = kAllCategories[cat];
    s.seed = base.seed + static_cast<std::int64_t>(stage);
    return s;
}

namespace {

void finish_stage(SessionState& s) {
    s.finished_stages.push_back({s.stage_index, stage_spec(s.spec, s.stage_index), s.conversation});
    s.pending_ratings.clear();
    s.panels.clear();
}

} // namespace

void apply(SessionState& s, const Event& e) {
    if (e.seq != s.event_count)
        throw ParseError("event seq " + std::to_string(e.seq) + " out of order, expected " +
                         std::to_string(s.event_count));
    if (e.seq > 0 && e.at <= s.last_at) throw ParseError("event time not strictly increasing at seq " + std::to_string(e.seq));
    const auto& p = e.payload;
    switch (e.kind) {
    case EventKind::session_created:
        s.id = p.at("id").get<std::string>();
        s.flow = study_flow_from_json(p.at("flow"));
        s.spec = complaint_spec_from_json(p.at("spec"));
        s.stage_index = 0;
        s.conversation = open_conversation(p.at("complaint").get<std::string>(), s.stage().persona, e.at);
        break;
    case EventKind::csr_message:
        s.conversation.transcript.append(Speaker::representative, p.at("text").get<std::string>(), e.at);
        break;
    case EventKind::client_reply: {
        if (!p.at("text").is_null()) s.conversation.transcript.append(Speaker::client, p.at("text").get<std::string>(), e.at);
        s.conversation.exchange_count = p.at("exchange_count").get<int>();
        s.conversation.closed = p.at("closed").get<bool>();
        if (!p.at("close_reason").is_null())
            s.conversation.close_reason = close_reason_from_string(p.at("close_reason").get<std::string>());
        s.pending_ratings.clear();
        break;
    }
    case EventKind::panel_update: {
        const auto panel = panel_from_string(p.at("panel").get<std::string>());
        s.panels[panel] = p.at("payload");
        s.pending_ratings.insert(panel);
        break;
    }
    case EventKind::rating:
        s.pending_ratings.erase(panel_from_string(p.at("panel").get<std::string>()));
        break;
    case EventKind::survey: {
        auto survey = survey_from_json(p);
        s.surveys.insert_or_assign(survey.phase, std::move(survey));
        break;
    }
    case EventKind::stage_advanced:
        finish_stage(s);
        s.stage_index = p.at("stage_index").get<std::size_t>();
        s.conversation = open_conversation(p.at("complaint").get<std::string>(), s.stage().persona, e.at);
        break;
    case EventKind::closed:
        finish_stage(s);
        s.complete = true;
        break;
    }
    ++s.event_count;
    s.last_at = e.at;
}

SessionState replay(const std::vector<Event>& events) {
    if (events.empty() || events.front().kind != EventKind::session_created)
        throw ParseError("event log must start with session_created");
    SessionState s;
    for (const auto& e : events) apply(s, e);
    return s;
}

nlohmann::json to_json(const StudyFlow& flow) {
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& st : flow.stages) {
        nlohmann::json panels = nlohmann::json::array();
        for (const auto p : st.panels) panels.push_back(to_string(p));
        stages.push_back({{"persona", to_string(st.persona)}, {"panels", panels}, {"warmup", st.warmup}});
    }
    return {{"stages", stages}};
}

StudyFlow study_flow_from_json(const nlohmann::json& j) {
    StudyFlow flow;
    try {
        const auto& stages = j.is_array() ? j : j.at("stages");
        for (const auto& st : stages) {
            Stage stage;
            stage.persona = persona_from_string(st.at("persona").get<std::string>());
            for (const auto& p : st.value("panels", nlohmann::json::array()))
                stage.panels.insert(panel_from_string(p.get<std::string>()));
            stage.warmup = st.value("warmup", false);
            flow.stages.push_back(std::move(stage));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed study flow: ") + e.what());
    } catch (const ParseError& e) {
        throw ValidationError(std::string("malformed study flow: ") + e.what());
    }
    flow.validate();
    return flow;
}

nlohmann::json to_json(const SurveyResponse& s) {
    nlohmann::json j = {{"phase", s.phase},           {"q1_polite", s.q1_polite},     {"q1_dignity", s.q1_dignity},
                        {"q1_respect", s.q1_respect}, {"q2_demands", s.q2_demands},   {"q2_resources", s.q2_resources},
                        {"q3_pleasure", s.q3_pleasure}, {"q3_energy", s.q3_energy}};
    j["q4_support"] = s.q4_support ? nlohmann::json(*s.q4_support) : nlohmann::json(nullptr);
    return j;
}

SurveyResponse survey_from_json(const nlohmann::json& j) {
    SurveyResponse s;
    try {
        s.phase = j.at("phase").get<std::string>();
        s.q1_polite = j.at("q1_polite").get<int>();
        s.q1_dignity = j.at("q1_dignity").get<int>();
        s.q1_respect = j.at("q1_respect").get<int>();
        s.q2_demands = j.at("q2_demands").get<int>();
        s.q2_resources = j.at("q2_resources").get<int>();
        s.q3_pleasure = j.at("q3_pleasure").get<int>();
        s.q3_energy = j.at("q3_energy").get<int>();
        if (j.contains("q4_support") && !j.at("q4_support").is_null())
            s.q4_support = j.at("q4_support").get<std::map<std::string, int>>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed survey: ") + e.what());
    }
    return s;
}

nlohmann::json to_json(const SessionState& s) {
    nlohmann::json pending = nlohmann::json::array();
    for (const auto p : s.pending_ratings) pending.push_back(to_string(p));
    nlohmann::json panels = nlohmann::json::object();
    for (const auto& [k, v] : s.panels) panels[std::string(to_string(k))] = v;
    nlohmann::json surveys = nlohmann::json::object();
    for (const auto& [k, v] : s.surveys) surveys[k] = to_json(v);
    nlohmann::json finished = nlohmann::json::array();
    for (const auto& f : s.finished_stages)
        finished.push_back({{"stage", f.stage}, {"spec", to_json(f.spec)}, {"conversation", to_json(f.conversation)}});
    return {
        {"id", s.id},
        {"flow", to_json(s.flow)},
        {"spec", to_json(s.spec)},
        {"stage_index", s.stage_index},
        {"stage_spec", to_json(stage_spec(s.spec, s.stage_index))},
        {"conversation", to_json(s.conversation)},
        {"pending_ratings", pending},
        {"panels", panels},
        {"surveys", surveys},
        {"finished_stages", finished},
        {"complete", s.complete},
        {"event_count", s.event_count},
    };
}

} // namespace calmdesk::service
