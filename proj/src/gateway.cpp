#include "calmdesk/gateway.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "calmdesk/errors.hpp"

namespace calmdesk {

std::string_view to_string(Role role) {
    switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
    }
    return "user";
}

void CompletionParams::validate() const {
    if (!(temperature >= 0.0 && temperature <= 2.0))
        throw PreconditionError("temperature must lie in [0, 2]");
    if (max_tokens <= 0) throw PreconditionError("max_tokens must be positive");
    if (retries < 0 || retries > 5) throw PreconditionError("retries must lie in [0, 5]");
    if (timeout.count() <= 0) throw PreconditionError("timeout must be positive");
}

void BackendConfig::validate() const {
    if (kind == Kind::remote && (!endpoint_url || endpoint_url->empty()))
        throw ConfigError("remote backend requires endpoint_url");
    if (kind == Kind::scripted && !script)
        throw ConfigError("scripted backend requires a script");
    if (max_in_flight < 1) throw ConfigError("max_in_flight must be at least 1");
}

std::string user_content(std::span<const PromptMessage> messages) {
    std::string joined;
    for (const auto& m : messages) {
        if (m.role != Role::user) continue;
        if (!joined.empty()) joined += '\n';
        joined += m.content;
    }
    return joined;
}

namespace {

void check_messages(std::span<const PromptMessage> messages) {
    if (messages.empty()) throw PreconditionError("messages must be non-empty");
    for (const auto& m : messages)
        if (m.content.empty()) throw PreconditionError("message content must be non-empty");
}

} // namespace

ScriptedBackend::ScriptedBackend(std::vector<ScriptRule> rules) {
    rules_.reserve(rules.size());
    for (auto& r : rules) {
        try {
            rules_.push_back({std::regex(r.pattern, std::regex::ECMAScript), std::move(r.response)});
        } catch (const std::regex_error& e) {
            throw ConfigError("invalid script pattern '" + r.pattern + "': " + e.what());
        }
    }
}

std::string ScriptedBackend::complete(std::span<const PromptMessage> messages,
                                      const CompletionParams& /*params*/) const {
    const std::string content = user_content(messages);
    std::smatch match;
    for (std::size_t i = 0; i < rules_.size(); ++i) {
        if (std::regex_search(content, match, rules_[i].pattern)) {
            spdlog::debug("scripted backend: rule {} matched", i);
            return match.format(rules_[i].response, std::regex_constants::format_default);
        }
    }
    spdlog::debug("scripted backend: no rule matched");
    return std::string(kUnmatched);
}

std::vector<ScriptRule> parse_script(const nlohmann::json& doc) {
    const nlohmann::json& rules = doc.is_object() ? doc.at("rules") : doc;
    if (!rules.is_array()) throw ConfigError("script must be an array of {match, response}");
    std::vector<ScriptRule> out;
    for (const auto& r : rules)
        out.push_back({r.at("match").get<std::string>(), r.at("response").get<std::string>()});
    return out;
}

std::vector<ScriptRule> load_script(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open script file: " + path);
    try {
        return parse_script(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad script file " + path + ": " + e.what());
    }
}

nlohmann::json request_body(std::span<const PromptMessage> messages, const CompletionParams& params,
                            const std::string& model) {
    nlohmann::json body;
    body["model"] = model;
    body["temperature"] = params.temperature;
    body["max_tokens"] = params.max_tokens;
    if (params.seed) body["seed"] = *params.seed;
    auto& arr = body["messages"] = nlohmann::json::array();
    for (const auto& m : messages) arr.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    return body;
}

namespace {

struct SplitUrl {
    std::string scheme_host_port;
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint_url needs a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/v1/chat/completions"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

std::chrono::milliseconds backoff_delay(std::chrono::milliseconds base, int attempt) {
    thread_local std::mt19937_64 rng{std::random_device{}()};
    std::uniform_real_distribution<double> jitter(0.8, 1.2);
    const double ms = static_cast<double>(base.count()) * std::ldexp(1.0, attempt) * jitter(rng);
    return std::chrono::milliseconds(static_cast<long long>(ms));
}

enum class Failure { transient, timeout };

} // namespace

RemoteBackend::RemoteBackend(BackendConfig config) : config_(std::move(config)) {
    config_.validate();
    auto parts = split_url(*config_.endpoint_url);
    scheme_host_port_ = std::move(parts.scheme_host_port);
    path_ = std::move(parts.path);
    slots_ = std::make_unique<std::counting_semaphore<>>(config_.max_in_flight);
}

RemoteBackend::~RemoteBackend() = default;

std::string RemoteBackend::complete(std::span<const PromptMessage> messages,
                                    const CompletionParams& params) const {
    const std::string body = request_body(messages, params, config_.model).dump();

    httplib::Headers headers;
    if (config_.api_key_env) {
        const char* key = std::getenv(config_.api_key_env->c_str());
        if (key == nullptr || *key == '\0')
            throw AuthError("environment variable " + *config_.api_key_env + " is not set");
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(params.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(params.timeout - secs);

    Failure last = Failure::transient;
    std::string last_detail;
    for (int attempt = 0; attempt <= params.retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(backoff_delay(config_.backoff_base, attempt - 1));

        slots_->acquire();
        httplib::Result res;
        {
            httplib::Client client(scheme_host_port_);
            client.set_connection_timeout(secs.count(), usecs.count());
            client.set_read_timeout(secs.count(), usecs.count());
            client.set_write_timeout(secs.count(), usecs.count());
            spdlog::info("completion request to {} (attempt {}/{})", scheme_host_port_, attempt + 1,
                         params.retries + 1);
            res = client.Post(path_, headers, body, "application/json");
        }
        slots_->release();

        if (!res) {
            const auto err = res.error();
            last = (err == httplib::Error::Read || err == httplib::Error::Write ||
                    err == httplib::Error::ConnectionTimeout)
                       ? Failure::timeout
                       : Failure::transient;
            last_detail = httplib::to_string(err);
            spdlog::warn("completion attempt {} failed: {}", attempt + 1, last_detail);
            continue;
        }
        const int status = res->status;
        if (status == 401 || status == 403) throw AuthError("endpoint rejected credentials (HTTP " + std::to_string(status) + ")");
        if (status == 408 || status == 429 || status >= 500) {
            last = status == 408 ? Failure::timeout : Failure::transient;
            last_detail = "HTTP " + std::to_string(status);
            spdlog::warn("completion attempt {} failed: {}", attempt + 1, last_detail);
            continue;
        }
        if (status != 200) throw UpstreamError("endpoint returned HTTP " + std::to_string(status));

        try {
            const auto doc = nlohmann::json::parse(res->body);
            const auto& content = doc.at("choices").at(0).at("message").at("content");
            if (!content.is_string()) throw MalformedResponseError("completion content is not a string");
            return content.get<std::string>();
        } catch (const nlohmann::json::exception&) {
            throw MalformedResponseError("response payload lacks choices[0].message.content");
        }
    }
    if (last == Failure::timeout)
        throw TimeoutError("completion timed out after " + std::to_string(params.retries + 1) + " attempts");
    throw UpstreamError("completion failed after " + std::to_string(params.retries + 1) +
                        " attempts: " + last_detail);
}

std::unique_ptr<Backend> make_backend(const BackendConfig& config) {
    config.validate();
    if (config.kind == BackendConfig::Kind::scripted) return std::make_unique<ScriptedBackend>(*config.script);
    return std::make_unique<RemoteBackend>(config);
}

std::string complete(std::span<const PromptMessage> messages, const CompletionParams& params,
                     const Backend& backend) {
    check_messages(messages);
    params.validate();
    return backend.complete(messages, params);
}

} // namespace calmdesk
