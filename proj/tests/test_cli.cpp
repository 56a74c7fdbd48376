#include <doctest.h>

#include <sstream>

#include "calmdesk/cli.hpp"
#include "support.hpp"

using namespace calmdesk;
using calmdesk::testing::kData;
using calmdesk::testing::read_file;
using calmdesk::testing::write_file;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);)
        if (!l.empty()) out.push_back(l);
    return out;
}

const std::string kScript = (kData / "study_script.json").string();

} // namespace

TEST_CASE("usage errors exit 1") {
    CHECK(run({}).code == cli::kExitUsage);
    CHECK(run({"frobnicate"}).code == cli::kExitUsage);
    const auto r = run({"forge", "--no-such-flag"});
    CHECK(r.code == cli::kExitUsage);
    CHECK_FALSE(r.err.empty());
    CHECK(run({"metrics", "--in", "only-one.jsonl"}).code == cli::kExitUsage);
    CHECK(run({"forge", "--backend", "psychic"}).code == cli::kExitUsage);
    CHECK(run({"--help"}).code == cli::kExitOk);
}

TEST_CASE("forge --all writes 45 five-turn incidents, byte-identical on rerun") {
    const auto dir = calmdesk::testing::temp_dir("forge");
    const auto path = (dir / "incidents.jsonl").string();
    REQUIRE(run({"forge", "--all", "--backend", "scripted", "--script", kScript, "--out", path}).code == cli::kExitOk);
    const auto first = read_file(path);
    const auto lines = lines_of(first);
    CHECK(lines.size() == 45);
    for (const auto& l : lines) {
        const auto j = nlohmann::json::parse(l);
        CHECK(j.at("turns").size() == 5);
        CHECK(j.at("turns").back().at("speaker") == "client");
    }
    REQUIRE(run({"forge", "--all", "--script", kScript, "--out", path}).code == cli::kExitOk);
    CHECK(read_file(path) == first);
    CHECK(std::filesystem::directory_iterator(dir) != std::filesystem::directory_iterator());
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++files;
    CHECK(files == 1);
    std::filesystem::remove_all(dir);
}

TEST_CASE("forge with a context variation and count") {
    const auto r = run({"forge", "--count", "2", "--script", kScript, "--behavioral", "focused"});
    REQUIRE(r.code == cli::kExitOk);
    const auto lines = lines_of(r.out);
    CHECK(lines.size() == 2);
    CHECK(nlohmann::json::parse(lines[0]).at("variation").at("behavioral") == "focused");
}

TEST_CASE("reframe turns incidents into bundles and reports malformed lines") {
    const auto dir = calmdesk::testing::temp_dir("reframe");
    const auto incidents = (dir / "incidents.jsonl").string();
    REQUIRE(run({"forge", "--count", "3", "--script", kScript, "--out", incidents}).code == cli::kExitOk);
    const auto r = run({"reframe", "--in", incidents, "--script", kScript, "--jobs", "2"});
    REQUIRE(r.code == cli::kExitOk);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 3);
    for (const auto& l : lines) {
        const auto j = nlohmann::json::parse(l);
        CHECK(j.at("source") == "pilot");
        CHECK(j.at("text") == j.at("bundle").at("reframe_paraphrase"));
    }

    const auto bad = (dir / "bad.jsonl").string();
    write_file(bad, read_file(incidents) + "{\"spec\": oops\n");
    const auto e = run({"reframe", "--in", bad, "--script", kScript});
    CHECK(e.code == cli::kExitRuntime);
    CHECK(e.err.find(":4") != std::string::npos);

    const auto missing = run({"reframe", "--in", (dir / "absent.jsonl").string(), "--script", kScript});
    CHECK(missing.code == cli::kExitRuntime);
    std::filesystem::remove_all(dir);
}

TEST_CASE("metrics on two identical files reports zero diffs") {
    const auto dir = calmdesk::testing::temp_dir("metrics");
    const auto corpus = (dir / "a.jsonl").string();
    write_file(corpus,
               R"({"message_id":"1","source":"pilot","text":"You might be thinking they blame you.","incident":"bag lost"})"
               "\n"
               R"({"message_id":"2","source":"pilot","text":"Remember, their anger is about the delay, not you.","incident":"late"})"
               "\n"
               R"({"message_id":"3","source":"pilot","text":"Stay calm. You are doing well.","incident":"rude"})"
               "\n");
    const auto copy = (dir / "b.jsonl").string();
    write_file(copy, read_file(corpus));
    const auto report = (dir / "report.json").string();
    const auto r = run({"metrics", "--in", corpus, "--in", copy, "--out", report});
    REQUIRE(r.code == cli::kExitOk);
    CHECK(r.out.find("Verbosity") != std::string::npos);
    const auto j = nlohmann::json::parse(read_file(report));
    CHECK_FALSE(j.at("rows").empty());
    for (const auto& row : j.at("rows")) {
        CHECK(row.at("mean_a") == row.at("mean_b"));
        CHECK(row.at("degenerate") == true);
    }

    const auto other = (dir / "c.jsonl").string();
    write_file(other, R"({"message_id":"x","text":"hello"})" "\n");
    CHECK(run({"metrics", "--in", corpus, "--in", other}).code == cli::kExitRuntime);
    std::filesystem::remove_all(dir);
}

TEST_CASE("ratings command") {
    const auto dir = calmdesk::testing::temp_dir("ratings");
    const auto csv = (dir / "r.csv").string();
    write_file(csv,
               "incident_id,rater_id,source,sincerity,compassion,warmth,actionable,relatability\n"
               "i1,r1,pilot,6,6,5,6,5\ni1,r1,human,4,3,4,5,4\n"
               "i2,r1,pilot,7,6,6,5,6\ni2,r1,human,3,4,4,4,3\n"
               "i1,r2,pilot,5,6,7,6,5\ni1,r2,human,4,5,3,4,4\n");
    const auto r = run({"ratings", "--in", csv, "--out", (dir / "out.json").string()});
    REQUIRE(r.code == cli::kExitOk);
    const auto j = nlohmann::json::parse(read_file(dir / "out.json"));
    CHECK(j.at("rows").at(0).at("metric") == "total");
    CHECK(j.at("rows").size() == 6);
    write_file(csv, "wrong,header\n");
    CHECK(run({"ratings", "--in", csv}).code == cli::kExitRuntime);
    std::filesystem::remove_all(dir);
}
