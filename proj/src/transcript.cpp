#include "calmdesk/transcript.hpp"

#include "calmdesk/errors.hpp"

namespace calmdesk {

std::string_view to_string(Speaker speaker) {
    return speaker == Speaker::client ? "client" : "representative";
}

Speaker speaker_from_string(std::string_view name) {
    if (name == "client") return Speaker::client;
    if (name == "representative") return Speaker::representative;
    throw ParseError("unknown speaker: " + std::string(name));
}

Speaker Transcript::next_speaker() const noexcept {
    if (turns_.empty()) return Speaker::client;
    return turns_.back().speaker == Speaker::client ? Speaker::representative : Speaker::client;
}

const ChatTurn& Transcript::append(Speaker speaker, std::string text, std::int64_t timestamp_ms) {
    if (text.empty()) throw StructureError("chat turn text must be non-empty");
    if (speaker != next_speaker())
        throw StructureError("expected a " + std::string(to_string(next_speaker())) + " turn at index " +
                             std::to_string(turns_.size()));
    turns_.push_back({speaker, std::move(text), turns_.size(), timestamp_ms});
    return turns_.back();
}

std::size_t Transcript::client_turn_count() const noexcept {
    std::size_t n = 0;
    for (const auto& t : turns_) n += t.speaker == Speaker::client;
    return n;
}

Transcript Transcript::prefix(std::size_t n) const {
    Transcript out;
    out.turns_.assign(turns_.begin(), turns_.begin() + static_cast<std::ptrdiff_t>(std::min(n, turns_.size())));
    return out;
}

std::string Transcript::joined_text() const {
    std::string out;
    for (const auto& t : turns_) {
        if (!out.empty()) out += ' ';
        out += t.text;
    }
    return out;
}

std::string format_history(std::span<const ChatTurn> turns) {
    std::string out;
    for (const auto& t : turns) {
        out += t.speaker == Speaker::client ? "Customer: " : "Representative: ";
        out += t.text;
        out += '\n';
    }
    if (!out.empty()) out.pop_back();
    return out;
}

bool alternation_holds(const Transcript& t) {
    for (std::size_t i = 0; i < t.size(); ++i) {
        const auto expected = i % 2 == 0 ? Speaker::client : Speaker::representative;
        if (t[i].speaker != expected || t[i].index != i || t[i].text.empty()) return false;
    }
    return true;
}

nlohmann::json to_json(const Transcript& t) {
    auto arr = nlohmann::json::array();
    for (const auto& turn : t.turns())
        arr.push_back({{"speaker", to_string(turn.speaker)}, {"text", turn.text}, {"index", turn.index}});
    return arr;
}

Transcript transcript_from_json(const nlohmann::json& turns) {
    Transcript t;
    for (const auto& j : turns) {
        const auto& turn = t.append(speaker_from_string(j.at("speaker").get<std::string>()),
                                    j.at("text").get<std::string>());
        if (j.contains("index") && j.at("index").get<std::size_t>() != turn.index)
            throw StructureError("non-contiguous turn index " + j.at("index").dump());
    }
    return t;
}

} // namespace calmdesk
