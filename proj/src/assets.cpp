#include "calmdesk/assets.hpp"

#include <cstdlib>

#include "calmdesk/errors.hpp"

namespace calmdesk {

Assets Assets::load(const std::filesystem::path& dir, std::uint64_t selection_seed) {
    if (!std::filesystem::is_directory(dir)) throw ConfigError("assets directory not found: " + dir.string());
    return {PromptKit::load(dir, selection_seed), lingua::CategoryLexicon::load(dir / "categories"),
            SentimentEnsemble::load(dir / "sentiment" / "classifiers.json")};
}

std::filesystem::path default_assets_dir() {
    if (const char* env = std::getenv("CALMDESK_ASSETS")) return env;
#ifdef CALMDESK_ASSETS_DIR
    return CALMDESK_ASSETS_DIR;
#else
    return "assets";
#endif
}

} // namespace calmdesk
