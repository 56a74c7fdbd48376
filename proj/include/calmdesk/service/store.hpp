#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "calmdesk/service/session.hpp"

namespace calmdesk::service {

// Append-only event log, one <session_id>.jsonl file per session under dir.
// Each append writes a whole batch and fsyncs before returning. Without a
// directory the log lives in memory only.
class EventStore {
public:
    EventStore() = default;
    explicit EventStore(std::filesystem::path dir);

    const std::optional<std::filesystem::path>& dir() const noexcept { return dir_; }

    void append(const std::string& session_id, const std::vector<Event>& batch);

    // Every session's log. A trailing line that does not parse, or a trailing
    // batch with fewer events than it declares, is dropped as an interrupted
    // write and the file is rewritten without it.
    std::map<std::string, std::vector<Event>> load_all();
    std::vector<Event> load(const std::string& session_id);

private:
    std::filesystem::path file_of(const std::string& session_id) const;

    std::optional<std::filesystem::path> dir_;
    mutable std::mutex mutex_;
    std::map<std::string, std::vector<Event>> memory_;
};

struct ParsedLog {
    std::vector<Event> events;
    bool dropped_tail = false;
};

// Parses one session's JSONL log with the tolerance described above.
ParsedLog parse_event_log(std::istream& in, const std::string& origin);

} // namespace calmdesk::service
