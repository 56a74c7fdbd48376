#pragma once

#include <atomic>
#include <memory>

#include "calmdesk/assets.hpp"
#include "calmdesk/service/study.hpp"
#include "support.hpp"

namespace calmdesk::testing {

inline const Assets& shared_assets() {
    static const Assets a = Assets::load(kAssets);
    return a;
}

inline const ScriptedBackend& shared_study_backend() {
    static const ScriptedBackend b = study_backend();
    return b;
}

inline service::SurveyResponse survey(std::string phase, bool with_support = false) {
    service::SurveyResponse s;
    s.phase = std::move(phase);
    s.q1_polite = 4;
    s.q1_dignity = 5;
    s.q1_respect = 3;
    s.q2_demands = 2;
    s.q2_resources = 4;
    s.q3_pleasure = 3;
    s.q3_energy = 4;
    if (with_support) {
        std::map<std::string, int> q4;
        for (const auto item : service::kSupportItems) q4[std::string(item)] = 4;
        s.q4_support = q4;
    }
    return s;
}

// A study service over the shared assets with a monotone fake clock.
struct StudyHarness {
    std::atomic<std::int64_t> now{1'700'000'000'000};

    explicit StudyHarness(service::EventStore& store, service::StudyOptions options = {},
                          const Backend* backend = nullptr)
        : service(shared_assets().kit, backend ? *backend : shared_study_backend(), CompletionParams{},
                  shared_assets().sentiment, store, withSeed(std::move(options)), [this] { return ++now; }) {}

    static service::StudyOptions withSeed(service::StudyOptions o) {
        if (o.seed == 0) o.seed = 42;
        return o;
    }

    void rate_all(const std::string& id, int score = 5) {
        for (const auto p : service.get(id).pending_ratings) service.post_rating(id, p, score);
    }

    // Rates and replies until the current stage closes; the final message asks
    // the client to wrap up after `exchanges` ordinary ones.
    service::MessageResult finish_stage(const std::string& id, int exchanges = 1) {
        for (int i = 0; i < exchanges; ++i) {
            rate_all(id);
            auto r = service.post_message(id, "Let me look into that for you.");
            if (r.closed) return r;
        }
        rate_all(id);
        return service.post_message(id, "Your issue is resolved. goodbye!");
    }

    service::StudyService service;
};

} // namespace calmdesk::testing
