#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "calmdesk/gateway.hpp"
#include "calmdesk/service/study.hpp"

namespace calmdesk::service {

// JSON config file. Relative paths resolve against the file's directory.
//
//   {
//     "backend": {"kind": "remote", "endpoint_url": "...", "api_key_env": "...", "model": "..."}
//              | {"kind": "scripted", "script": "script.json"},
//     "params": {"temperature": 0.7, "max_tokens": 512, "timeout_ms": 30000, "retries": 2},
//     "assets": "assets", "data_dir": "data", "static_dir": "ui/dist",
//     "host": "127.0.0.1", "port": 8080,
//     "flow": [...] | "flow.json", "seed": 0, "cues": true
//   }
struct ServiceConfig {
    BackendConfig backend;
    CompletionParams params;
    std::filesystem::path assets_dir;
    std::optional<std::filesystem::path> data_dir;
    std::optional<std::filesystem::path> static_dir;
    std::string host = "127.0.0.1";
    int port = 8080;
    StudyOptions study;
};

ServiceConfig parse_service_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
ServiceConfig load_service_config(const std::filesystem::path& path);

BackendConfig parse_backend_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
StudyFlow load_flow(const std::filesystem::path& path);

} // namespace calmdesk::service
