#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace kgalign {

inline std::uint64_t word_count(std::string_view text) {
    std::uint64_t words = 0;
    bool in_word = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++words;
        }
    }
    return words;
}

// Coarse token estimate: whitespace-delimited words scaled by 1.3.
// Exact tokenizer parity is a non-goal; budgets bind on this estimator.
inline std::uint64_t estimate_tokens_from_words(std::uint64_t words) {
    return static_cast<std::uint64_t>(std::ceil(static_cast<double>(words) * 1.3));
}

inline std::uint64_t estimate_tokens(std::string_view text) {
    return estimate_tokens_from_words(word_count(text));
}

} // namespace kgalign
