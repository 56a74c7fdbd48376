#include <doctest.h>

#include <fstream>

#include "calmdesk/errors.hpp"
#include "calmdesk/service/config.hpp"
#include "study_fixture.hpp"

using namespace calmdesk;
using namespace calmdesk::service;
using calmdesk::testing::StudyHarness;
using calmdesk::testing::survey;

namespace {

StudyFlow single_stage(Persona persona, std::set<PanelId> panels) { return StudyFlow{{Stage{persona, panels, false}}}; }

std::size_t count_kind(const std::vector<nlohmann::json>& records, const std::string& type) {
    return static_cast<std::size_t>(std::count_if(records.begin(), records.end(),
                                                  [&](const auto& r) { return r.at("type") == type; }));
}

} // namespace

TEST_CASE("default flow") {
    const auto f = StudyFlow::default_flow();
    REQUIRE(f.stages.size() == 4);
    CHECK(f.stages[0].warmup);
    CHECK(f.stages[0].persona == Persona::civil);
    CHECK(f.stages[0].panels == std::set<PanelId>{PanelId::info_guide});
    CHECK(f.stages[1].persona == Persona::civil);
    CHECK(f.stages[2].persona == Persona::uncivil);
    CHECK(f.stages[2].panels == std::set<PanelId>{PanelId::info_guide});
    CHECK(f.stages[3].persona == Persona::uncivil);
    CHECK(f.stages[3].panels.size() == 3);
    CHECK(study_flow_from_json(to_json(f)) == f);
    CHECK_THROWS_AS(StudyFlow{}.validate(), ValidationError);
}

TEST_CASE("create_session without arguments") {
    EventStore store;
    StudyHarness h(store);
    std::set<Domain> domains;
    for (int i = 0; i < 20; ++i) {
        const auto s = h.service.create_session();
        CHECK(s.flow == StudyFlow::default_flow());
        CHECK(s.stage_index == 0);
        CHECK(s.conversation.transcript.size() == 1);
        CHECK(s.conversation.transcript[0].speaker == Speaker::client);
        CHECK(s.pending_ratings == std::set<PanelId>{PanelId::info_guide});
        CHECK(s.panels.size() == 1);
        domains.insert(s.spec.domain);
    }
    CHECK(domains == std::set<Domain>{Domain::airlines, Domain::hotels});
}

TEST_CASE("create_session honors an explicit spec and rejects an empty flow") {
    EventStore store;
    StudyHarness h(store);
    const ComplaintSpec spec{Domain::mobile, Category::policy, 3};
    CHECK(h.service.create_session(std::nullopt, spec).spec == spec);
    CHECK_THROWS_AS(h.service.create_session(StudyFlow{}), ValidationError);
    CHECK_THROWS_AS(h.service.get("missing"), NotFoundError);
}

TEST_CASE("stage specs rotate the category and keep the domain") {
    const ComplaintSpec base{Domain::hotels, Category::resolution, 10};
    const auto s1 = stage_spec(base, 1);
    CHECK(s1.domain == Domain::hotels);
    CHECK(s1.category == Category::service_quality);
    CHECK(s1.seed == 11);
    CHECK(stage_spec(base, 0) == base);
}

TEST_CASE("messages are gated on pending ratings") {
    EventStore store;
    StudyHarness h(store);
    const auto id = h.service.create_session(single_stage(Persona::uncivil, {PanelId::emo_reframe})).id;
    CHECK_THROWS_AS(h.service.post_message(id, "Hello"), RatingPendingError);
    h.service.post_rating(id, PanelId::emo_reframe, 6);
    const auto r = h.service.post_message(id, "Hello, how can I help?");
    REQUIRE(r.client_reply);
    CHECK(r.panels.size() == 1);
    CHECK(r.panels.count(PanelId::emo_reframe) == 1);
    CHECK(r.cues.size() == 2);
    CHECK_THROWS_AS(h.service.post_message(id, "Anything else?"), RatingPendingError);
    h.rate_all(id);
    CHECK_THROWS_AS(h.service.post_message(id, "   "), ValidationError);
}

TEST_CASE("an info-guide stage returns exactly one panel") {
    EventStore store;
    StudyHarness h(store);
    const auto id = h.service.create_session().id;
    h.rate_all(id);
    const auto r = h.service.post_message(id, "Hello, how can I help?");
    CHECK(r.panels.size() == 1);
    CHECK(r.panels.at(PanelId::info_guide).at("steps").size() == 3);
}

TEST_CASE("rating removes exactly the rated panel") {
    EventStore store;
    StudyHarness h(store);
    const auto id =
        h.service.create_session(single_stage(Persona::uncivil, {PanelId::emo_label, PanelId::emo_reframe})).id;
    CHECK(h.service.get(id).pending_ratings == std::set<PanelId>{PanelId::emo_label, PanelId::emo_reframe});
    CHECK(h.service.post_rating(id, PanelId::emo_label, 5) == std::set<PanelId>{PanelId::emo_reframe});
    CHECK_THROWS_AS(h.service.post_rating(id, PanelId::emo_label, 5), NotPendingError);
    CHECK_THROWS_AS(h.service.post_rating(id, PanelId::info_guide, 5), NotPendingError);
    CHECK_THROWS_AS(h.service.post_rating(id, PanelId::emo_reframe, 9), RangeError);
    CHECK_THROWS_AS(h.service.post_rating(id, PanelId::emo_reframe, 0), RangeError);
}

TEST_CASE("surveys follow the study phases") {
    EventStore store;
    StudyHarness h(store);
    const auto id = h.service.create_session().id;
    CHECK_THROWS_AS(h.service.post_survey(id, survey("post_stage_0")), PhaseError);
    h.service.post_survey(id, survey("pre"));
    CHECK_THROWS_AS(h.service.post_survey(id, survey("pre")), DuplicateError);

    auto bad = survey("post_stage_0");
    bad.q2_demands = 6;
    CHECK_THROWS_AS(h.service.post_survey(id, bad), RangeError);
    CHECK_THROWS_AS(h.service.post_survey(id, survey("pre", true)), ValidationError);
    CHECK_THROWS_AS(h.service.post_survey(id, survey("middle")), ValidationError);

    const auto r = h.finish_stage(id);
    CHECK(r.closed);
    CHECK(r.stage_advanced);
    CHECK_THROWS_AS(h.service.post_survey(id, survey("post_stage_0", true)), ValidationError);
    h.service.post_survey(id, survey("post_stage_0"));
    CHECK_THROWS_AS(h.service.post_survey(id, survey("post_stage_1")), PhaseError);
    CHECK_THROWS_AS(h.service.post_survey(id, survey("post_stage_9")), PhaseError);

    const auto other = h.service.create_session().id;
    h.rate_all(other);
    h.service.post_message(other, "Hello");
    CHECK_THROWS_AS(h.service.post_survey(other, survey("pre")), PhaseError);
}

TEST_CASE("turn cap closes the stage and advances") {
    EventStore store;
    StudyHarness h(store);
    const auto id = h.service.create_session(StudyFlow{{Stage{Persona::civil, {PanelId::info_guide}, false},
                                                        Stage{Persona::uncivil, {PanelId::emo_label}, false}}})
                        .id;
    MessageResult last;
    for (int i = 1; i <= kMaxExchanges; ++i) {
        h.rate_all(id);
        last = h.service.post_message(id, "Let me check on that.");
        CHECK(last.closed == (i == kMaxExchanges));
    }
    CHECK(last.stage_advanced);
    CHECK(last.stage_index == 1);
    CHECK(last.panels.count(PanelId::emo_label) == 1);
    const auto s = h.service.get(id);
    REQUIRE(s.finished_stages.size() == 1);
    CHECK(s.finished_stages[0].conversation.close_reason == CloseReason::turn_cap);
    CHECK(s.conversation.transcript.size() == 1);
    CHECK_FALSE(s.conversation.closed);
    CHECK(s.pending_ratings == std::set<PanelId>{PanelId::emo_label});
}

TEST_CASE("closing the final stage completes the session") {
    EventStore store;
    StudyHarness h(store);
    const auto id = h.service.create_session(single_stage(Persona::civil, {PanelId::info_guide})).id;
    const auto r = h.finish_stage(id, 2);
    CHECK(r.closed);
    CHECK(r.session_complete);
    CHECK_FALSE(r.stage_advanced);
    REQUIRE(r.client_reply);
    CHECK(r.client_reply->find("FINISH") == std::string::npos);
    CHECK(h.service.get(id).complete);
    CHECK_THROWS_AS(h.service.post_message(id, "Hello?"), ClosedSessionError);
}

TEST_CASE("state survives a restart from disk") {
    const auto dir = calmdesk::testing::temp_dir("replay");
    std::string id;
    SessionState before;
    {
        EventStore store(dir);
        StudyHarness h(store);
        id = h.service.create_session().id;
        h.service.post_survey(id, survey("pre"));
        h.finish_stage(id, 2);
        h.rate_all(id);
        h.service.post_message(id, "How can I help?");
        before = h.service.get(id);
    }
    EventStore store(dir);
    StudyHarness h(store);
    CHECK(h.service.recover() == 1);
    CHECK(h.service.get(id) == before);
    std::filesystem::remove_all(dir);
}

TEST_CASE("an interrupted trailing write is dropped on recovery") {
    const auto dir = calmdesk::testing::temp_dir("crash");
    std::string id;
    SessionState before;
    std::size_t lines_before = 0;
    {
        EventStore store(dir);
        StudyHarness h(store);
        id = h.service.create_session().id;
        h.rate_all(id);
        before = h.service.get(id);
        lines_before = before.event_count;
        h.service.post_message(id, "How can I help?");
    }
    const auto file = dir / (id + ".jsonl");
    std::vector<std::string> lines;
    {
        std::ifstream in(file);
        for (std::string l; std::getline(in, l);) lines.push_back(l);
    }
    REQUIRE(lines.size() > lines_before + 1);

    SUBCASE("partial line") {
        std::ofstream out(file, std::ios::trunc);
        for (std::size_t i = 0; i < lines_before; ++i) out << lines[i] << '\n';
        out << lines[lines_before].substr(0, lines[lines_before].size() / 2);
    }
    SUBCASE("batch cut short") {
        std::ofstream out(file, std::ios::trunc);
        for (std::size_t i = 0; i < lines_before + 1; ++i) out << lines[i] << '\n';
    }

    EventStore store(dir);
    StudyHarness h(store);
    h.service.recover();
    CHECK(h.service.get(id) == before);
    // The repaired log accepts new batches.
    h.service.post_message(id, "How can I help?");
    EventStore again(dir);
    StudyHarness h2(again);
    h2.service.recover();
    CHECK(h2.service.get(id) == h.service.get(id));
    std::filesystem::remove_all(dir);
}

TEST_CASE("a corrupt line before the tail is an error") {
    std::istringstream in("not json\n{\"also\": 1}\n");
    CHECK_THROWS_AS(parse_event_log(in, "x"), ParseError);
}

TEST_CASE("session ids are validated by the store") {
    const auto dir = calmdesk::testing::temp_dir("ids");
    EventStore store(dir);
    CHECK_THROWS(store.append("../escape", {Event{}}));
    std::filesystem::remove_all(dir);
}

TEST_CASE("event JSON round-trips") {
    Event e;
    e.seq = 3;
    e.at = 99;
    e.batch = 2;
    e.batch_size = 2;
    e.kind = EventKind::rating;
    e.payload = {{"panel", "emo_label"}, {"score", 4}};
    CHECK(event_from_json(to_json(e)) == e);
}

TEST_CASE("log invariants: panels follow replies and messages need no pending ratings") {
    const auto dir = calmdesk::testing::temp_dir("invariants");
    EventStore store(dir);
    StudyHarness h(store);
    const auto id = h.service.create_session(StudyFlow{{Stage{Persona::uncivil, {PanelId::emo_label, PanelId::emo_reframe}, false},
                                                        Stage{Persona::civil, {PanelId::info_guide}, false}}})
                        .id;
    h.finish_stage(id, 3);
    h.finish_stage(id, 1);
    const auto events = store.load(id);

    SessionState s;
    std::optional<std::set<std::string>> awaiting;
    for (const auto& e : events) {
        if (e.kind == EventKind::csr_message) {
            CHECK(s.pending_ratings.empty());
            CHECK_FALSE(awaiting);
        }
        apply(s, e);
        if (e.kind == EventKind::client_reply && !e.payload.at("closed").get<bool>()) {
            awaiting.emplace();
            for (const auto p : s.stage().panels) awaiting->insert(std::string(to_string(p)));
        }
        if (e.kind == EventKind::panel_update && awaiting) awaiting->erase(e.payload.at("panel").get<std::string>());
        if (awaiting && awaiting->empty()) awaiting.reset();
    }
    CHECK(s.complete);
    std::filesystem::remove_all(dir);
}

TEST_CASE("export") {
    EventStore empty_store;
    StudyHarness empty(empty_store);
    CHECK(empty.service.export_corpus().empty());

    EventStore store;
    StudyHarness h(store);
    const auto id = h.service.create_session(single_stage(Persona::uncivil, {PanelId::emo_reframe, PanelId::emo_label})).id;
    h.service.post_survey(id, survey("pre"));
    h.finish_stage(id, 2);
    h.service.post_survey(id, survey("post_stage_0", true));
    h.service.create_session();

    const auto all = h.service.export_corpus({std::nullopt, id});
    CHECK(count_kind(all, "incident") == 1);
    CHECK(count_kind(all, "reframe") == 3);
    CHECK(count_kind(all, "rating") == 6);
    CHECK(count_kind(all, "survey") == 2);

    const auto pilot = h.service.export_corpus({std::string("pilot"), std::nullopt});
    CHECK(pilot.size() == 3);
    for (const auto& r : pilot) {
        CHECK(r.at("type") == "reframe");
        CHECK(r.at("text") == r.at("bundle").at("reframe_paraphrase"));
        CHECK(r.at("message_id").get<std::string>().starts_with(id + "-"));
    }
    CHECK(h.service.export_corpus() == h.service.export_corpus());
    CHECK(export_records({{id, store.load(id)}}) == all);
}

TEST_CASE("service config resolves paths against its file") {
    const auto dir = calmdesk::testing::temp_dir("config");
    calmdesk::testing::write_file(dir / "script.json", R"({"rules":[{"match":"x","response":"y"}]})");
    calmdesk::testing::write_file(dir / "flow.json", to_json(StudyFlow::default_flow()).dump());
    calmdesk::testing::write_file(dir / "config.json", R"({
        "backend": {"kind": "scripted", "script": "script.json"},
        "params": {"temperature": 0.2, "retries": 1},
        "assets": "assets", "data_dir": "data", "flow": "flow.json",
        "port": 9000, "seed": 5, "cues": false,
        "rating_labels": {"emo_label": "Was this label useful?"}
    })");
    const auto c = load_service_config(dir / "config.json");
    CHECK(c.backend.script->size() == 1);
    CHECK(c.params.temperature == doctest::Approx(0.2));
    CHECK(c.assets_dir == dir / "assets");
    CHECK(*c.data_dir == dir / "data");
    CHECK(c.port == 9000);
    CHECK(c.study.seed == 5);
    CHECK_FALSE(c.study.cues);
    CHECK(c.study.rating_labels.at(PanelId::emo_label) == "Was this label useful?");
    CHECK(c.study.flow == StudyFlow::default_flow());

    CHECK_THROWS_AS(parse_service_config(nlohmann::json::parse(R"({"backend":{"kind":"remote"}})"), dir), ConfigError);
    CHECK_THROWS_AS(parse_service_config(nlohmann::json::parse(R"({"port":70000})"), dir), ConfigError);
    std::filesystem::remove_all(dir);
}
