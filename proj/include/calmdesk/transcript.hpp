#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace calmdesk {

enum class Speaker { client, representative };

std::string_view to_string(Speaker speaker);
Speaker speaker_from_string(std::string_view name);

struct ChatTurn {
    Speaker speaker = Speaker::client;
    std::string text;
    std::size_t index = 0;
    std::int64_t timestamp_ms = 0;

    bool operator==(const ChatTurn&) const = default;
};

// Ordered client/representative messages. Speakers alternate starting with the
// client and indices are contiguous from 0; append() enforces both.
class Transcript {
public:
    Transcript() = default;

    const ChatTurn& append(Speaker speaker, std::string text, std::int64_t timestamp_ms = 0);

    std::span<const ChatTurn> turns() const noexcept { return turns_; }
    std::size_t size() const noexcept { return turns_.size(); }
    bool empty() const noexcept { return turns_.empty(); }
    const ChatTurn& back() const { return turns_.back(); }
    const ChatTurn& operator[](std::size_t i) const { return turns_[i]; }

    Speaker next_speaker() const noexcept;
    std::size_t client_turn_count() const noexcept;

    // First n turns as a new transcript.
    Transcript prefix(std::size_t n) const;

    // Text of every turn joined by single spaces.
    std::string joined_text() const;

    bool operator==(const Transcript&) const = default;

private:
    std::vector<ChatTurn> turns_;
};

// "Customer: ..." / "Representative: ..." lines, one per turn.
std::string format_history(std::span<const ChatTurn> turns);

bool alternation_holds(const Transcript& t);

nlohmann::json to_json(const Transcript& t);
Transcript transcript_from_json(const nlohmann::json& turns);

} // namespace calmdesk
