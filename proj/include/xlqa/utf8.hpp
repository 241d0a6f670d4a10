#ifndef XLQA_UTF8_HPP
#define XLQA_UTF8_HPP

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace xlqa::utf8 {

// Decoded codepoint plus the number of bytes it occupies.
struct Decoded {
  char32_t cp;
  int len;
};

// Decodes the codepoint starting at byte `pos`. Returns len == 0 on
// malformed input (overlong encodings and surrogates are rejected).
Decoded decode(std::string_view text, std::size_t pos);

bool valid(std::string_view text);

// True if `pos` (in bytes) does not fall inside a multi-byte sequence.
bool is_char_boundary(std::string_view text, std::size_t pos);

// Unicode whitespace (the set used for word splitting).
bool is_space(char32_t cp);

// Punctuation detached from word edges during tokenization. Covers ASCII
// punctuation plus the common non-Latin marks of the corpus languages
// (Arabic, Bengali, CJK, general typography).
bool is_punct(char32_t cp);

}  // namespace xlqa::utf8

#endif  // XLQA_UTF8_HPP
