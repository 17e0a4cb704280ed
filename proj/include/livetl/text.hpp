#pragma once

// Small UTF-8 helpers shared by preprocessing and tokenization.

#include <cstddef>
#include <string>
#include <string_view>

namespace livetl::text {

/// One decoded scalar value and the number of bytes it occupied.
/// Invalid sequences decode as U+FFFD consuming a single byte.
struct Decoded {
  char32_t cp;
  std::size_t len;
};

Decoded decode(std::string_view s, std::size_t pos);
void append_utf8(std::string& out, char32_t cp);

/// ASCII whitespace, NBSP, the U+2000 spaces, and the ideographic space.
bool is_space(char32_t cp);

/// Characters that terminate a hashtag run: ASCII punctuation other than
/// '_', CJK symbols and punctuation, and full-width punctuation.
bool is_hashtag_delimiter(char32_t cp);

std::string trim(std::string_view s);

/// Replaces every whitespace run by a single ASCII space and trims.
std::string collapse_whitespace(std::string_view s);

std::string ascii_lower(std::string_view s);

}  // namespace livetl::text
