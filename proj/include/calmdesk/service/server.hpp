#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "calmdesk/service/study.hpp"

namespace httplib {
class Server;
}

namespace calmdesk::service {

// HTTP status for a library error code.
int http_status(const std::string& code);
nlohmann::json error_body(const std::string& code, const std::string& message);

nlohmann::json to_json(const MessageResult& r, const StudyOptions& options);

// JSON API over a StudyService:
//   POST /sessions                  {flow?, spec?}
//   GET  /sessions/{id}
//   POST /sessions/{id}/messages    {text}
//   POST /sessions/{id}/ratings     {panel, score}
//   POST /sessions/{id}/surveys     SurveyResponse
//   GET  /sessions/{id}/transcript
//   GET  /export[?source=..&session=..]   JSONL
class HttpServer {
public:
    explicit HttpServer(StudyService& service, std::optional<std::filesystem::path> static_dir = std::nullopt);
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    // Binds; port 0 picks a free port. Returns the bound port.
    int bind(const std::string& host, int port);
    // Serves until stop() is called.
    void listen();
    void stop();

private:
    void install_routes();

    StudyService& service_;
    std::unique_ptr<httplib::Server> server_;
};

} // namespace calmdesk::service
