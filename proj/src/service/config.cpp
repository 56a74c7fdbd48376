#include "calmdesk/service/config.hpp"

#include <fstream>

#include "calmdesk/errors.hpp"

namespace calmdesk::service {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

} // namespace

BackendConfig parse_backend_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    BackendConfig c;
    const auto kind = j.value("kind", std::string("scripted"));
    if (kind == "remote") {
        c.kind = BackendConfig::Kind::remote;
    } else if (kind == "scripted") {
        c.kind = BackendConfig::Kind::scripted;
    } else {
        throw ConfigError("backend kind must be remote or scripted, not " + kind);
    }
    if (j.contains("endpoint_url")) c.endpoint_url = j.at("endpoint_url").get<std::string>();
    if (j.contains("api_key_env")) c.api_key_env = j.at("api_key_env").get<std::string>();
    if (j.contains("script")) {
        const auto& s = j.at("script");
        c.script = s.is_string() ? load_script(resolve(base_dir, s.get<std::string>()).string()) : parse_script(s);
    }
    c.model = j.value("model", c.model);
    c.backoff_base = std::chrono::milliseconds(j.value("backoff_ms", c.backoff_base.count()));
    c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
    c.validate();
    return c;
}

StudyFlow load_flow(const std::filesystem::path& path) { return study_flow_from_json(read_json(path)); }

ServiceConfig parse_service_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    ServiceConfig c;
    try {
        if (j.contains("backend")) c.backend = parse_backend_config(j.at("backend"), base_dir);
        if (j.contains("params")) {
            const auto& p = j.at("params");
            c.params.temperature = p.value("temperature", c.params.temperature);
            c.params.max_tokens = p.value("max_tokens", c.params.max_tokens);
            c.params.timeout = std::chrono::milliseconds(p.value("timeout_ms", c.params.timeout.count()));
            c.params.retries = p.value("retries", c.params.retries);
            c.params.validate();
        }
        c.assets_dir = resolve(base_dir, j.value("assets", std::string("assets")));
        if (j.contains("data_dir")) c.data_dir = resolve(base_dir, j.at("data_dir").get<std::string>());
        if (j.contains("static_dir")) c.static_dir = resolve(base_dir, j.at("static_dir").get<std::string>());
        c.host = j.value("host", c.host);
        c.port = j.value("port", c.port);
        if (j.contains("flow")) {
            const auto& f = j.at("flow");
            c.study.flow = f.is_string() ? load_flow(resolve(base_dir, f.get<std::string>())) : study_flow_from_json(f);
        }
        c.study.seed = j.value("seed", c.study.seed);
        c.study.cues = j.value("cues", c.study.cues);
        if (j.contains("rating_labels"))
            for (const auto& [k, v] : j.at("rating_labels").items())
                c.study.rating_labels[panel_from_string(k)] = v.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const ValidationError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (c.port < 0 || c.port > 65535) throw ConfigError("port out of range");
    return c;
}

ServiceConfig load_service_config(const std::filesystem::path& path) {
    return parse_service_config(read_json(path), path.parent_path());
}

} // namespace calmdesk::service
