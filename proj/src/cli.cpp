#include "calmdesk/cli.hpp"

#include <algorithm>
#include <csignal>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "calmdesk/assets.hpp"
#include "calmdesk/errors.hpp"
#include "calmdesk/panels.hpp"
#include "calmdesk/service/config.hpp"
#include "calmdesk/service/server.hpp"
#include "calmdesk/simulant.hpp"
#include "calmdesk/stats/report.hpp"

namespace calmdesk::cli {

namespace {

struct BackendFlags {
    std::string kind = "scripted";
    std::string script;
    std::string endpoint;
    std::string api_key_env = "OPENAI_API_KEY";
    std::string model = "gpt-4o";
    double temperature = 0.7;
    int max_tokens = 512;

    void attach(CLI::App& cmd) {
        cmd.add_option("--backend", kind, "Completion backend")->check(CLI::IsMember({"remote", "scripted"}));
        cmd.add_option("--script", script, "Scripted backend rules (JSON)");
        cmd.add_option("--endpoint", endpoint, "Chat completions URL for the remote backend");
        cmd.add_option("--api-key-env", api_key_env, "Environment variable holding the API key");
        cmd.add_option("--model", model, "Remote model name");
        cmd.add_option("--temperature", temperature, "Sampling temperature")->check(CLI::Range(0.0, 2.0));
        cmd.add_option("--max-tokens", max_tokens, "Completion token limit")->check(CLI::PositiveNumber);
    }

    BackendConfig config() const {
        BackendConfig c;
        if (kind == "remote") {
            c.kind = BackendConfig::Kind::remote;
            if (!endpoint.empty()) c.endpoint_url = endpoint;
            c.api_key_env = api_key_env;
            c.model = model;
        } else {
            c.kind = BackendConfig::Kind::scripted;
            if (script.empty()) throw ConfigError("--backend scripted requires --script FILE");
            c.script = load_script(script);
        }
        c.validate();
        return c;
    }

    CompletionParams params() const {
        CompletionParams p;
        p.temperature = temperature;
        p.max_tokens = max_tokens;
        return p;
    }
};

class Output {
public:
    Output(const std::string& path, std::ostream& fallback) {
        if (!path.empty() && path != "-") {
            file_.open(path, std::ios::trunc);
            if (!file_) throw ConfigError("cannot write " + path);
        }
        stream_ = file_.is_open() ? static_cast<std::ostream*>(&file_) : &fallback;
    }
    std::ostream& operator*() { return *stream_; }

private:
    std::ofstream file_;
    std::ostream* stream_;
};

// Non-blank lines of a JSONL file as (line number, parsed object).
std::vector<std::pair<std::size_t, nlohmann::json>> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::vector<std::pair<std::size_t, nlohmann::json>> out;
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.emplace_back(lineno, nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

// Applies f to every index with at most `jobs` running at once; results keep
// input order.
template <typename R, typename F>
std::vector<R> parallel_map(std::size_t n, std::size_t jobs, F f) {
    std::vector<std::optional<R>> results(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                results[i] = f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::max<std::size_t>(1, std::min(jobs, n)); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::vector<R> out;
    out.reserve(n);
    for (auto& r : results) out.push_back(std::move(*r));
    return out;
}

stats::EffectMode effect_mode(const std::string& s) {
    return s == "paired" ? stats::EffectMode::paired : stats::EffectMode::pooled;
}

// --- forge -------------------------------------------------------------------

struct ForgeArgs {
    BackendFlags backend;
    std::string assets;
    std::string out;
    std::int64_t seed = 0;
    int seeds = 3;
    bool all = false;
    std::optional<std::size_t> count;
    std::string behavioral;
    std::string personality;
};

int forge(const ForgeArgs& a, std::ostream& out) {
    const auto assets = Assets::load(a.assets, static_cast<std::uint64_t>(a.seed));
    const auto backend = make_backend(a.backend.config());
    const ChainEnv env{assets.kit, *backend, a.backend.params()};

    auto specs = incident_matrix(a.seeds);
    for (auto& s : specs) s.seed += a.seed;
    if (!a.all && a.count && *a.count < specs.size()) specs.resize(*a.count);

    std::optional<Behavioral> behavioral;
    std::optional<Personality> personality;
    if (!a.behavioral.empty()) behavioral = behavioral_from_string(a.behavioral);
    if (!a.personality.empty()) personality = personality_from_string(a.personality);

    Output sink(a.out, out);
    for (const auto& spec : specs) {
        auto incident = create_incident(spec, env);
        if (behavioral || personality) incident = apply_variation(incident, behavioral, personality);
        *sink << to_json(incident).dump() << '\n';
    }
    spdlog::info("forged {} incidents", specs.size());
    return kExitOk;
}

// --- reframe -----------------------------------------------------------------

struct ReframeArgs {
    BackendFlags backend;
    std::string assets;
    std::string in;
    std::string out;
    std::int64_t seed = 0;
    std::size_t jobs = 4;
};

int reframe(const ReframeArgs& a, std::ostream& out) {
    const auto assets = Assets::load(a.assets, static_cast<std::uint64_t>(a.seed));
    const auto backend = make_backend(a.backend.config());
    auto params = a.backend.params();
    params.seed = a.seed;
    const ChainEnv env{assets.kit, *backend, params};

    std::vector<std::pair<std::size_t, Incident>> incidents;
    for (const auto& [lineno, j] : read_jsonl(a.in)) {
        try {
            incidents.emplace_back(lineno, incident_from_json(j));
        } catch (const std::exception& e) {
            throw ParseError(a.in + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    const auto bundles = parallel_map<ReframeBundle>(incidents.size(), a.jobs, [&](std::size_t i) {
        return emo_reframe(incidents[i].second.transcript, env);
    });

    Output sink(a.out, out);
    for (std::size_t i = 0; i < bundles.size(); ++i) {
        const auto& incident = incidents[i].second;
        nlohmann::json record = {{"message_id", "line-" + std::to_string(incidents[i].first)},
                                 {"source", "pilot"},
                                 {"spec", to_json(incident.spec)},
                                 {"text", bundles[i].reframe_paraphrase},
                                 {"incident", incident.transcript.joined_text()},
                                 {"bundle", to_json(bundles[i])}};
        *sink << record.dump() << '\n';
    }
    return kExitOk;
}

// --- metrics -----------------------------------------------------------------

struct MetricsArgs {
    std::vector<std::string> in;
    std::string assets;
    std::string embeddings;
    std::string pairing;
    std::string out;
    std::string table;
    std::string d_mode = "pooled";
    std::size_t jobs = 4;
};

std::vector<lingua::MetricRow> metric_rows(const std::string& path, const Assets& assets,
                                           const lingua::EmbeddingTable* embeddings, std::size_t jobs) {
    const auto lines = read_jsonl(path);
    const lingua::MetricAssets ma{assets.categories, embeddings};
    return parallel_map<lingua::MetricRow>(lines.size(), jobs, [&](std::size_t i) {
        const auto& [lineno, j] = lines[i];
        try {
            lingua::ExternalScores ext;
            if (j.contains("external_empathy") && !j.at("external_empathy").is_null())
                ext.empathy = j.at("external_empathy").get<double>();
            if (j.contains("external_reactivity") && !j.at("external_reactivity").is_null())
                ext.reactivity = j.at("external_reactivity").get<double>();
            return lingua::metric_vector(j.at("message_id").get<std::string>(),
                                         lingua::source_from_string(j.value("source", std::string("other"))),
                                         j.at("text").get<std::string>(), j.value("incident", std::string()), ma, ext);
        } catch (const std::exception& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    });
}

int metrics(const MetricsArgs& a, std::ostream& out) {
    const auto assets = Assets::load(a.assets);
    std::optional<lingua::EmbeddingTable> embeddings;
    if (!a.embeddings.empty()) embeddings = lingua::EmbeddingTable::load(a.embeddings);
    const auto* table = embeddings ? &*embeddings : nullptr;

    const auto rows_a = metric_rows(a.in[0], assets, table, a.jobs);
    const auto rows_b = metric_rows(a.in[1], assets, table, a.jobs);

    stats::Pairing pairing;
    if (a.pairing.empty()) {
        pairing = stats::pair_by_id(rows_a, rows_b);
    } else {
        std::ifstream in(a.pairing);
        if (!in) throw ConfigError("cannot open " + a.pairing);
        for (const auto& [k, v] : nlohmann::json::parse(in).items()) pairing.emplace_back(k, v.get<std::string>());
    }
    if (pairing.empty()) throw PairingError("no message_id is shared by both corpora");

    auto report = stats::compare_corpora(rows_a, rows_b, pairing, effect_mode(a.d_mode));
    report.label_a = std::filesystem::path(a.in[0]).stem().string();
    report.label_b = std::filesystem::path(a.in[1]).stem().string();

    if (!a.out.empty()) {
        Output sink(a.out, out);
        *sink << stats::to_json(report).dump(2) << '\n';
    }
    Output text(a.table, out);
    *text << stats::format_table(report);
    return kExitOk;
}

// --- ratings -----------------------------------------------------------------

struct RatingsArgs {
    std::string in;
    std::string out;
    std::string table;
    bool centered = false;
    std::string d_mode = "pooled";
};

int ratings(const RatingsArgs& a, std::ostream& out) {
    const auto records = stats::load_ratings_csv(a.in);
    const auto report = stats::compare_ratings(records, a.centered, effect_mode(a.d_mode));
    if (!a.out.empty()) {
        Output sink(a.out, out);
        *sink << stats::to_json(report).dump(2) << '\n';
    }
    Output text(a.table, out);
    *text << stats::format_table(report);
    return kExitOk;
}

// --- serve -------------------------------------------------------------------

struct ServeArgs {
    BackendFlags backend;
    std::string config;
    std::string assets;
    std::string flow;
    std::string data;
    std::string static_dir;
    std::string host;
    std::optional<int> port;
    std::optional<std::uint64_t> seed;
};

service::HttpServer* g_server = nullptr;

extern "C" void on_signal(int) {
    if (g_server != nullptr) g_server->stop();
}

int serve(const ServeArgs& a, const CLI::App& cmd) {
    service::ServiceConfig cfg;
    if (!a.config.empty()) cfg = service::load_service_config(a.config);
    else cfg.assets_dir = default_assets_dir();
    if (!a.config.empty() && cmd.count("--backend") == 0 && cmd.count("--script") == 0) {
        cfg.backend.validate();
    } else {
        cfg.backend = a.backend.config();
    }
    if (!a.assets.empty()) cfg.assets_dir = a.assets;
    if (!a.flow.empty()) cfg.study.flow = service::load_flow(a.flow);
    if (!a.data.empty()) cfg.data_dir = a.data;
    if (!a.static_dir.empty()) cfg.static_dir = a.static_dir;
    if (!a.host.empty()) cfg.host = a.host;
    if (a.port) cfg.port = *a.port;
    if (a.seed) cfg.study.seed = *a.seed;

    const auto assets = Assets::load(cfg.assets_dir, cfg.study.seed);
    const auto backend = make_backend(cfg.backend);
    service::EventStore store = cfg.data_dir ? service::EventStore(*cfg.data_dir) : service::EventStore();
    service::StudyService study(assets.kit, *backend, cfg.params, assets.sentiment, store, cfg.study);
    const auto recovered = study.recover();

    service::HttpServer server(study, cfg.static_dir);
    const int port = server.bind(cfg.host, cfg.port);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    spdlog::info("serving on {}:{} ({} sessions recovered)", cfg.host, port, recovered);
    server.listen();
    g_server = nullptr;
    return kExitOk;
}

void route_logs_to_stderr() {
    if (spdlog::get("calmdesk")) return;
    auto logger = spdlog::stderr_logger_mt("calmdesk");
    spdlog::set_default_logger(logger);
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    route_logs_to_stderr();

    CLI::App app{"Simulated incivility conversations, reframing panels and corpus statistics", "calmdesk"};
    app.require_subcommand(1);
    std::string log_level = "warn";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

    ForgeArgs fa;
    fa.assets = default_assets_dir().string();
    auto* forge_cmd = app.add_subcommand("forge", "Generate incidents as JSONL");
    fa.backend.attach(*forge_cmd);
    forge_cmd->add_option("--assets", fa.assets, "Assets directory");
    forge_cmd->add_option("--out", fa.out, "Output JSONL (stdout when absent)");
    forge_cmd->add_option("--seed", fa.seed, "Seed offset for every incident");
    forge_cmd->add_option("--seeds", fa.seeds, "Seeds per (domain, category)")->check(CLI::PositiveNumber);
    forge_cmd->add_flag("--all", fa.all, "Full domain x category x seed matrix");
    forge_cmd->add_option("--count", fa.count, "Emit only the first N incidents of the matrix");
    forge_cmd->add_option("--behavioral", fa.behavioral, "Behavioral context")
        ->check(CLI::IsMember({"focused", "stressed", "bored"}));
    forge_cmd->add_option("--personality", fa.personality, "Personality context")
        ->check(CLI::IsMember({"resilient", "undercontrolled", "overcontrolled"}));

    ReframeArgs ra;
    ra.assets = default_assets_dir().string();
    auto* reframe_cmd = app.add_subcommand("reframe", "Run the reframing chain over incident JSONL");
    ra.backend.attach(*reframe_cmd);
    reframe_cmd->add_option("--assets", ra.assets, "Assets directory");
    reframe_cmd->add_option("--in", ra.in, "Incident JSONL")->required();
    reframe_cmd->add_option("--out", ra.out, "Output JSONL (stdout when absent)");
    reframe_cmd->add_option("--seed", ra.seed, "Completion seed");
    reframe_cmd->add_option("--jobs", ra.jobs, "Incidents processed at once")->check(CLI::PositiveNumber);

    MetricsArgs ma;
    ma.assets = default_assets_dir().string();
    auto* metrics_cmd = app.add_subcommand("metrics", "Compare two message corpora");
    metrics_cmd->add_option("--in", ma.in, "Message JSONL for corpus a, then corpus b")->required()->expected(2);
    metrics_cmd->add_option("--assets", ma.assets, "Assets directory");
    metrics_cmd->add_option("--embeddings", ma.embeddings, "Word vectors for adaptability");
    metrics_cmd->add_option("--pairing", ma.pairing, "JSON object mapping ids in a to ids in b");
    metrics_cmd->add_option("--out", ma.out, "Report JSON");
    metrics_cmd->add_option("--table", ma.table, "Text table (stdout when absent)");
    metrics_cmd->add_option("--d-mode", ma.d_mode, "Cohen's d denominator")->check(CLI::IsMember({"pooled", "paired"}));
    metrics_cmd->add_option("--jobs", ma.jobs, "Messages processed at once")->check(CLI::PositiveNumber);

    RatingsArgs ga;
    auto* ratings_cmd = app.add_subcommand("ratings", "Compare perceived-empathy ratings");
    ratings_cmd->add_option("--in", ga.in, "Ratings CSV")->required();
    ratings_cmd->add_option("--out", ga.out, "Report JSON");
    ratings_cmd->add_option("--table", ga.table, "Text table (stdout when absent)");
    ratings_cmd->add_flag("--centered", ga.centered, "Score subscales as -3..3");
    ratings_cmd->add_option("--d-mode", ga.d_mode, "Cohen's d denominator")->check(CLI::IsMember({"pooled", "paired"}));

    ServeArgs sa;
    auto* serve_cmd = app.add_subcommand("serve", "Run the study HTTP service");
    sa.backend.attach(*serve_cmd);
    serve_cmd->add_option("--config", sa.config, "JSON config file");
    serve_cmd->add_option("--assets", sa.assets, "Assets directory");
    serve_cmd->add_option("--flow", sa.flow, "Study flow JSON");
    serve_cmd->add_option("--data", sa.data, "Event log directory");
    serve_cmd->add_option("--static", sa.static_dir, "Static files served at /");
    serve_cmd->add_option("--host", sa.host, "Bind address");
    serve_cmd->add_option("--port", sa.port, "Port")->check(CLI::Range(0, 65535));
    serve_cmd->add_option("--seed", sa.seed, "Seed for session ids and default specs");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return kExitUsage;
    }
    spdlog::set_level(spdlog::level::from_str(log_level));

    try {
        if (*forge_cmd) return forge(fa, out);
        if (*reframe_cmd) return reframe(ra, out);
        if (*metrics_cmd) return metrics(ma, out);
        if (*ratings_cmd) return ratings(ga, out);
        if (*serve_cmd) return serve(sa, *serve_cmd);
    } catch (const Error& e) {
        err << "error [" << e.code() << "]: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

} // namespace calmdesk::cli
