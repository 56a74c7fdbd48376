#include "calmdesk/service/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>

#include <spdlog/spdlog.h>

#include "calmdesk/errors.hpp"

namespace calmdesk::service {

namespace {

bool valid_session_id(const std::string& id) {
    return !id.empty() && id.size() <= 64 &&
           id.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-") == std::string::npos;
}

void write_all(int fd, const std::string& data, const std::string& path) {
    std::size_t off = 0;
    while (off < data.size()) {
        const auto n = ::write(fd, data.data() + off, data.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw ConfigError("write to " + path + " failed: " + std::strerror(errno));
        }
        off += static_cast<std::size_t>(n);
    }
}

} // namespace

EventStore::EventStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(*dir_);
}

std::filesystem::path EventStore::file_of(const std::string& session_id) const {
    if (!valid_session_id(session_id)) throw ValidationError("invalid session id");
    return *dir_ / (session_id + ".jsonl");
}

void EventStore::append(const std::string& session_id, const std::vector<Event>& batch) {
    if (batch.empty()) return;
    std::lock_guard lock(mutex_);
    if (!dir_) {
        auto& log = memory_[session_id];
        log.insert(log.end(), batch.begin(), batch.end());
        return;
    }
    std::string data;
    for (const auto& e : batch) data += to_json(e).dump() + '\n';
    const auto path = file_of(session_id).string();
    const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd < 0) throw ConfigError("cannot open event log " + path + ": " + std::strerror(errno));
    try {
        write_all(fd, data, path);
        if (::fsync(fd) != 0) throw ConfigError("fsync of " + path + " failed: " + std::strerror(errno));
    } catch (...) {
        ::close(fd);
        throw;
    }
    ::close(fd);
}

ParsedLog parse_event_log(std::istream& in, const std::string& origin) {
    ParsedLog out;
    auto& events = out.events;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            events.push_back(event_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            if (in.peek() == std::char_traits<char>::eof()) {
                spdlog::warn("{}:{}: dropping interrupted trailing record", origin, lineno);
                out.dropped_tail = true;
                break;
            }
            throw ParseError(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    // Drop a trailing batch that was cut short.
    if (!events.empty()) {
        const auto last_batch = events.back().batch;
        std::size_t count = 0;
        for (auto it = events.rbegin(); it != events.rend() && it->batch == last_batch; ++it) ++count;
        if (count < events.back().batch_size) {
            spdlog::warn("{}: dropping incomplete trailing batch {}", origin, last_batch);
            events.resize(events.size() - count);
            out.dropped_tail = true;
        }
    }
    return out;
}

std::vector<Event> EventStore::load(const std::string& session_id) {
    std::lock_guard lock(mutex_);
    if (!dir_) {
        const auto it = memory_.find(session_id);
        if (it == memory_.end()) throw NotFoundError("no session " + session_id);
        return it->second;
    }
    const auto path = file_of(session_id);
    std::ifstream in(path);
    if (!in) throw NotFoundError("no session " + session_id);
    auto parsed = parse_event_log(in, path.string());
    in.close();
    if (parsed.dropped_tail) {
        auto tmp = path;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::trunc);
            for (const auto& e : parsed.events) out << to_json(e).dump() << '\n';
            if (!out) throw ConfigError("cannot rewrite event log " + path.string());
        }
        std::filesystem::rename(tmp, path);
    }
    return std::move(parsed.events);
}

std::map<std::string, std::vector<Event>> EventStore::load_all() {
    if (!dir_) {
        std::lock_guard lock(mutex_);
        return memory_;
    }
    std::vector<std::string> ids;
    for (const auto& entry : std::filesystem::directory_iterator(*dir_))
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") ids.push_back(entry.path().stem().string());
    std::map<std::string, std::vector<Event>> out;
    for (const auto& id : ids) {
        auto events = load(id);
        if (!events.empty()) out.emplace(id, std::move(events));
    }
    return out;
}

} // namespace calmdesk::service
