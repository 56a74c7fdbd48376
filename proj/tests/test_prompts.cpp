#include <doctest.h>

#include <set>

#include "calmdesk/errors.hpp"
#include "calmdesk/prompts.hpp"
#include "support.hpp"

using namespace calmdesk;
using calmdesk::testing::kAssets;
using calmdesk::testing::kGolden;
using calmdesk::testing::read_file;

namespace {

const PromptKit& kit() {
    static const PromptKit k = PromptKit::load(kAssets);
    return k;
}

std::string replace_once(std::string s, const std::string& from, const std::string& to) {
    const auto at = s.find(from);
    REQUIRE(at != std::string::npos);
    return s.replace(at, from.size(), to);
}

} // namespace

TEST_CASE("template bodies without exemplars match the golden files byte for byte") {
    for (const auto id : {TemplateId::uncivil_reply, TemplateId::history_contextualize, TemplateId::situation,
                          TemplateId::thought_paraphrase, TemplateId::reframe_paraphrase}) {
        const std::string name(to_string(id));
        CAPTURE(name);
        CHECK(kit().registry.get(id).body() == read_file(kGolden / (name + ".txt")));
    }
}

TEST_CASE("complaint template equals the golden listing with its exemplar block lifted out") {
    const auto body = kit().registry.get(TemplateId::complaint_init).body();
    const auto examples = read_file(kGolden / "complaint_init.examples.txt");
    CHECK(replace_once(body, "{examples}", examples) == read_file(kGolden / "complaint_init.txt"));
}

TEST_CASE("thought and reframe templates with the shipped pools in file order match the golden listings") {
    const auto thought = replace_once(kit().registry.get(TemplateId::thought).body(), "{examples}",
                                      format_examples(kit().thoughts.examples));
    CHECK(thought == read_file(kGolden / "thought.txt"));
    const auto reframe = replace_once(kit().registry.get(TemplateId::reframe).body(), "{examples}",
                                      format_examples(kit().reframes.examples));
    CHECK(reframe == read_file(kGolden / "reframe.txt"));
}

TEST_CASE("templates carry the sentinel and the role instruction") {
    const auto& body = kit().registry.get(TemplateId::uncivil_reply).body();
    CHECK(body.find("FINISH:999") != std::string::npos);
    CHECK(body.find("Do NOT reveal your role") != std::string::npos);
    const auto& civil = kit().registry.get(TemplateId::civil_reply).body();
    CHECK(civil.find("FINISH:999") != std::string::npos);
    CHECK(civil.find("POLITE") != std::string::npos);
    CHECK(civil.find("UNCIVIL") == std::string::npos);
}

TEST_CASE("required bindings equal the placeholders in the body") {
    for (const auto id : kAllTemplates) {
        const auto& t = kit().registry.get(id);
        CHECK(t.required_bindings() == placeholders_in(t.body()));
    }
    CHECK(placeholders_in("a {x} b {y_1} {x} {not a placeholder}") == std::set<std::string, std::less<>>{"x", "y_1"});
}

TEST_CASE("render complaint_init names the domain and category") {
    const auto text = kit().registry.render(TemplateId::complaint_init,
                                            {{"domain", "Airline"}, {"category", "Policy"}, {"examples", "E"}});
    CHECK(text.find("Domain: Airline") != std::string::npos);
    CHECK(text.find("Category: Policy") != std::string::npos);
    CHECK(text.find("{") == std::string::npos);
}

TEST_CASE("render without placeholders is the identity") {
    const auto& body = kit().registry.get(TemplateId::situation).body();
    REQUIRE(kit().registry.get(TemplateId::situation).required_bindings().empty());
    CHECK(kit().registry.render(TemplateId::situation, {}) == body);
}

TEST_CASE("render reports the missing binding by name") {
    try {
        kit().registry.render(TemplateId::reframe, {{"situation", "S"}, {"examples", "E"}});
        FAIL("expected MissingBindingError");
    } catch (const MissingBindingError& e) {
        CHECK(e.placeholder() == "thought");
    }
}

TEST_CASE("render substitutes in one pass without rescanning values") {
    PromptTemplate t(TemplateId::situation, "[{a}] [{b}] [{a}]");
    CHECK(t.render({{"a", "{b}"}, {"b", "x"}}) == "[{b}] [x] [{b}]");
}

TEST_CASE("render is injective over distinct bindings") {
    PromptTemplate t(TemplateId::situation, "S: {s} T: {t}");
    std::set<std::string> seen;
    for (const auto* s : {"one", "two", "three"})
        for (const auto* u : {"red", "green"}) seen.insert(t.render({{"s", s}, {"t", u}}));
    CHECK(seen.size() == 6);
}

TEST_CASE("unknown template names are rejected") {
    CHECK_THROWS_AS(template_id_from_string("nope"), UnknownTemplateError);
    PromptRegistry empty;
    CHECK_THROWS_AS(empty.get(TemplateId::thought), UnknownTemplateError);
}

TEST_CASE("sampling is deterministic for a fixed seed") {
    ExamplePool pool = kit().complaints;
    pool.selection_seed = 7;
    const auto a = sample_examples(pool, 3);
    const auto b = sample_examples(pool, 3);
    REQUIRE(a.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(a[i].source_id == b[i].source_id);
}

TEST_CASE("five complaint examples cover all five categories for seeds 0..99") {
    std::set<std::string> all;
    for (const auto& e : kit().complaints.examples) all.insert(e.field("category"));
    REQUIRE(all.size() == 5);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        ExamplePool pool = kit().complaints;
        pool.selection_seed = seed;
        std::set<std::string> got;
        for (const auto& e : sample_examples(pool, 5)) got.insert(e.field("category"));
        CAPTURE(seed);
        CHECK(got.size() == 5);
    }
}

TEST_CASE("sampling more than the pool holds fails") {
    ExamplePool pool = kit().complaints;
    CHECK_THROWS_AS(sample_examples(pool, pool.examples.size() + 5), InsufficientExamplesError);
    const std::vector<FieldConstraint> c = {{"category", "no such category"}};
    CHECK_THROWS_AS(sample_examples(pool, 1, c), InsufficientExamplesError);
}

TEST_CASE("constraints filter the candidate set") {
    const auto& first = kit().complaints.examples.front();
    const std::vector<FieldConstraint> c = {{"category", first.field("category")}};
    for (const auto& e : sample_examples(kit().complaints, 1, c)) CHECK(e.field("category") == first.field("category"));
}

TEST_CASE("example payloads must carry exactly the fields of their kind") {
    FewShotExample e{ExampleKind::thought, {{"situation", "s"}}, "x"};
    CHECK_THROWS(e.validate());
    e.payload["thought"] = "t";
    CHECK_NOTHROW(e.validate());
    e.payload["extra"] = "?";
    CHECK_THROWS(e.validate());
    FewShotExample blank{ExampleKind::thought, {{"situation", "s"}, {"thought", ""}}, "y"};
    CHECK_THROWS(blank.validate());
}

TEST_CASE("contextualize_history with empty history returns the input without a call") {
    ScriptedBackend inner(std::vector<ScriptRule>{{"[\\s\\S]+", "rewritten"}});
    calmdesk::testing::CountingBackend backend(inner);
    const ChainEnv env{kit(), backend, {}};
    CHECK(contextualize_history({}, "What is your confirmation number?", env) == "What is your confirmation number?");
    CHECK(backend.calls() == 0);
}

TEST_CASE("contextualize_history rewrites against the history") {
    ScriptedBackend inner(std::vector<ScriptRule>{{"formulate a standalone question[\\s\\S]*missed my flight[\\s\\S]*confirmation number",
                            "what is the confirmation number of the flight you missed?"}});
    calmdesk::testing::CountingBackend backend(inner);
    const ChainEnv env{kit(), backend, {}};
    Transcript t;
    t.append(Speaker::client, "I missed my flight because your gate agent sent me to the wrong terminal.");
    CHECK(contextualize_history(t.turns(), "what is your confirmation number?", env) ==
          "what is the confirmation number of the flight you missed?");
    CHECK(backend.calls() == 1);
}

TEST_CASE("contextualize_history rejects an empty latest message") {
    ScriptedBackend backend(std::vector<ScriptRule>{});
    const ChainEnv env{kit(), backend, {}};
    CHECK_THROWS_AS(contextualize_history({}, "", env), PreconditionError);
}
