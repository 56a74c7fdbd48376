#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "calmdesk/lingua/embedding.hpp"
#include "calmdesk/lingua/lexicon.hpp"
#include "calmdesk/prompts.hpp"
#include "calmdesk/sentiment.hpp"

namespace calmdesk {

// Everything the pipeline reads from an assets directory:
//   prompts/<id>.txt, examples/{complaint,thought,reframe}.jsonl,
//   categories/<category>.txt, sentiment/classifiers.json.
struct Assets {
    PromptKit kit;
    lingua::CategoryLexicon categories;
    SentimentEnsemble sentiment;

    static Assets load(const std::filesystem::path& dir, std::uint64_t selection_seed = 0);
};

// Directory compiled in at build time.
std::filesystem::path default_assets_dir();

} // namespace calmdesk
