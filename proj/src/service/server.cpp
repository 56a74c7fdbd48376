#include "calmdesk/service/server.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "calmdesk/errors.hpp"

namespace calmdesk::service {

int http_status(const std::string& code) {
    if (code == "NOT_FOUND") return 404;
    if (code == "VALIDATION" || code == "OUT_OF_RANGE" || code == "PARSE" || code == "PRECONDITION") return 400;
    if (code == "RATING_PENDING" || code == "SESSION_CLOSED" || code == "NOT_PENDING" || code == "PHASE" ||
        code == "DUPLICATE")
        return 409;
    if (code == "TIMEOUT") return 504;
    if (code == "AUTH" || code == "UPSTREAM" || code == "MALFORMED_RESPONSE" || code == "STRUCTURE" ||
        code == "EMPTY_STEP" || code == "GUIDE_PARSE")
        return 502;
    return 500;
}

nlohmann::json error_body(const std::string& code, const std::string& message) {
    return {{"code", code}, {"message", message}};
}

nlohmann::json to_json(const MessageResult& r, const StudyOptions& options) {
    nlohmann::json panels = nlohmann::json::object();
    for (const auto& [p, payload] : r.panels) {
        const auto label = options.rating_labels.find(p);
        panels[std::string(to_string(p))] = {
            {"content", payload},
            {"rating_label", label == options.rating_labels.end() ? std::string() : label->second}};
    }
    return {{"client_reply", r.client_reply ? nlohmann::json(*r.client_reply) : nlohmann::json(nullptr)},
            {"closed", r.closed},
            {"stage_advanced", r.stage_advanced},
            {"session_complete", r.session_complete},
            {"stage_index", r.stage_index},
            {"panels", panels},
            {"cues", r.cues}};
}

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

nlohmann::json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return nlohmann::json::object();
    try {
        return nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("request body is not JSON: ") + e.what());
    }
}

// Runs handler, mapping library errors to {code, message} bodies.
template <typename F>
void guarded(httplib::Response& res, F&& handler) {
    try {
        handler();
    } catch (const Error& e) {
        send_json(res, http_status(e.code()), error_body(e.code(), e.what()));
    } catch (const nlohmann::json::exception& e) {
        send_json(res, 400, error_body("VALIDATION", e.what()));
    } catch (const std::exception& e) {
        spdlog::error("request failed: {}", e.what());
        send_json(res, 500, error_body("INTERNAL", e.what()));
    }
}

} // namespace

HttpServer::HttpServer(StudyService& service, std::optional<std::filesystem::path> static_dir)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
    install_routes();
    if (static_dir && !server_->set_mount_point("/", static_dir->string()))
        throw ConfigError("static directory not found: " + static_dir->string());
}

HttpServer::~HttpServer() = default;

void HttpServer::install_routes() {
    auto& srv = *server_;
    auto& svc = service_;

    srv.Post("/sessions", [&svc](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto body = parse_body(req);
            std::optional<StudyFlow> flow;
            std::optional<ComplaintSpec> spec;
            if (body.contains("flow") && !body.at("flow").is_null()) flow = study_flow_from_json(body.at("flow"));
            if (body.contains("spec") && !body.at("spec").is_null()) {
                try {
                    spec = complaint_spec_from_json(body.at("spec"));
                } catch (const ParseError& e) {
                    throw ValidationError(e.what());
                }
            }
            const auto state = svc.create_session(flow, spec);
            auto out = to_json(state);
            nlohmann::json labels = nlohmann::json::object();
            for (const auto& [p, l] : svc.options().rating_labels) labels[std::string(to_string(p))] = l;
            out["rating_labels"] = labels;
            send_json(res, 201, out);
        });
    });

    srv.Get(R"(/sessions/([A-Za-z0-9_-]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, to_json(svc.get(req.matches[1]))); });
    });

    srv.Post(R"(/sessions/([A-Za-z0-9_-]+)/messages)", [&svc](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto body = parse_body(req);
            if (!body.contains("text") || !body.at("text").is_string()) throw ValidationError("text is required");
            const auto result = svc.post_message(req.matches[1], body.at("text").get<std::string>());
            send_json(res, 200, to_json(result, svc.options()));
        });
    });

    srv.Post(R"(/sessions/([A-Za-z0-9_-]+)/ratings)", [&svc](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto body = parse_body(req);
            if (!body.contains("panel") || !body.contains("score")) throw ValidationError("panel and score are required");
            const auto pending = svc.post_rating(req.matches[1], panel_from_string(body.at("panel").get<std::string>()),
                                                 body.at("score").get<int>());
            nlohmann::json p = nlohmann::json::array();
            for (const auto id : pending) p.push_back(to_string(id));
            send_json(res, 200, {{"ok", true}, {"pending_ratings", p}});
        });
    });

    srv.Post(R"(/sessions/([A-Za-z0-9_-]+)/surveys)", [&svc](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            svc.post_survey(req.matches[1], survey_from_json(parse_body(req)));
            send_json(res, 200, {{"ok", true}});
        });
    });

    srv.Get(R"(/sessions/([A-Za-z0-9_-]+)/transcript)", [&svc](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto state = svc.get(req.matches[1]);
            nlohmann::json stages = nlohmann::json::array();
            for (const auto& f : state.finished_stages)
                stages.push_back({{"stage", f.stage}, {"turns", to_json(f.conversation.transcript)}});
            send_json(res, 200,
                      {{"stage_index", state.stage_index},
                       {"turns", to_json(state.conversation.transcript)},
                       {"finished_stages", stages}});
        });
    });

    srv.Get("/export", [&svc](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            ExportFilter filter;
            if (req.has_param("source")) filter.source = req.get_param_value("source");
            if (req.has_param("session")) filter.session_id = req.get_param_value("session");
            std::string out;
            for (const auto& r : svc.export_corpus(filter)) out += r.dump() + '\n';
            res.status = 200;
            res.set_content(out, "application/x-ndjson");
        });
    });
}

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = server_->bind_to_any_port(host);
        if (bound < 0) throw ConfigError("cannot bind " + host);
        return bound;
    }
    if (!server_->bind_to_port(host, port)) throw ConfigError("cannot bind " + host + ":" + std::to_string(port));
    return port;
}

void HttpServer::listen() { server_->listen_after_bind(); }

void HttpServer::stop() { server_->stop(); }

} // namespace calmdesk::service
