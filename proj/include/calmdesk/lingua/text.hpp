#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace calmdesk::lingua {

struct TokenizedText {
    std::vector<std::string> tokens;
    // Half-open [begin, end) token ranges; together they partition tokens.
    std::vector<std::pair<std::size_t, std::size_t>> sentences;
    std::size_t letter_count = 0;

    std::size_t token_count() const noexcept { return tokens.size(); }
    std::size_t sentence_count() const noexcept { return sentences.size(); }
};

// Tokens are maximal runs of letters, digits and apostrophes, lowercased.
// Non-ASCII code points outside the punctuation blocks count as letters and
// U+2019 folds to an ASCII apostrophe. A sentence ends at . ! or ? followed by
// whitespace or end of text; trailing tokens without a terminator form a final
// sentence.
TokenizedText tokenize(std::string_view text);

} // namespace calmdesk::lingua
