#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <regex>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace calmdesk {

enum class Role { system, user, assistant };

std::string_view to_string(Role role);

struct PromptMessage {
    Role role = Role::user;
    std::string content;
};

struct CompletionParams {
    double temperature = 0.7;
    int max_tokens = 512;
    std::optional<std::int64_t> seed;
    std::chrono::milliseconds timeout{30000};
    int retries = 2;

    void validate() const;
};

struct ScriptRule {
    std::string pattern;
    std::string response;
};

struct BackendConfig {
    enum class Kind { remote, scripted };

    Kind kind = Kind::scripted;
    std::optional<std::string> endpoint_url;
    std::optional<std::string> api_key_env;
    std::optional<std::vector<ScriptRule>> script;
    std::string model = "gpt-4o";
    std::chrono::milliseconds backoff_base{250};
    int max_in_flight = 4;

    void validate() const;
};

// Chat-completion backend. Implementations must be safe to call from several
// threads at once.
class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string complete(std::span<const PromptMessage> messages,
                                 const CompletionParams& params) const = 0;
};

inline constexpr std::string_view kUnmatched = "UNMATCHED";

// Deterministic lookup backend. The first rule whose regex finds a match in the
// newline-joined user content wins; its response may reference capture groups
// with $1, $2, ... Falls back to "UNMATCHED".
class ScriptedBackend final : public Backend {
public:
    explicit ScriptedBackend(std::vector<ScriptRule> rules);

    std::string complete(std::span<const PromptMessage> messages,
                         const CompletionParams& params) const override;

    std::size_t rule_count() const noexcept { return rules_.size(); }

private:
    struct Compiled {
        std::regex pattern;
        std::string response;
    };
    std::vector<Compiled> rules_;
};

// OpenAI-compatible /chat/completions client with retry and bounded
// in-flight requests.
class RemoteBackend final : public Backend {
public:
    explicit RemoteBackend(BackendConfig config);
    ~RemoteBackend() override;

    std::string complete(std::span<const PromptMessage> messages,
                         const CompletionParams& params) const override;

private:
    BackendConfig config_;
    std::string scheme_host_port_;
    std::string path_;
    mutable std::unique_ptr<std::counting_semaphore<>> slots_;
};

std::vector<ScriptRule> parse_script(const nlohmann::json& doc);
std::vector<ScriptRule> load_script(const std::string& path);

std::unique_ptr<Backend> make_backend(const BackendConfig& config);

std::string user_content(std::span<const PromptMessage> messages);

// Validates inputs, then delegates to the backend.
std::string complete(std::span<const PromptMessage> messages, const CompletionParams& params,
                     const Backend& backend);

nlohmann::json request_body(std::span<const PromptMessage> messages, const CompletionParams& params,
                            const std::string& model);

} // namespace calmdesk
