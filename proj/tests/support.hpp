#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "calmdesk/gateway.hpp"

namespace calmdesk::testing {

inline const std::filesystem::path kAssets = CALMDESK_TEST_ASSETS;
inline const std::filesystem::path kData = CALMDESK_TEST_DATA;
inline const std::filesystem::path kGolden = CALMDESK_TEST_GOLDEN;

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

// Wraps a backend and counts completions.
class CountingBackend final : public Backend {
public:
    explicit CountingBackend(const Backend& inner) : inner_(inner) {}

    std::string complete(std::span<const PromptMessage> messages, const CompletionParams& params) const override {
        ++calls_;
        return inner_.complete(messages, params);
    }

    int calls() const { return calls_.load(); }
    void reset() { calls_ = 0; }

private:
    const Backend& inner_;
    mutable std::atomic<int> calls_{0};
};

// Returns canned completions in order, repeating the last one.
class SequenceBackend final : public Backend {
public:
    explicit SequenceBackend(std::vector<std::string> replies) : replies_(std::move(replies)) {}

    std::string complete(std::span<const PromptMessage>, const CompletionParams&) const override {
        const auto i = static_cast<std::size_t>(calls_++);
        return replies_[std::min(i, replies_.size() - 1)];
    }

    int calls() const { return calls_.load(); }

private:
    std::vector<std::string> replies_;
    mutable std::atomic<int> calls_{0};
};

inline ScriptedBackend study_backend() { return ScriptedBackend(load_script((kData / "study_script.json").string())); }

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& tag) {
    static std::atomic<int> counter{0};
    std::random_device rd;
    auto dir = std::filesystem::temp_directory_path() /
               ("calmdesk-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace calmdesk::testing
