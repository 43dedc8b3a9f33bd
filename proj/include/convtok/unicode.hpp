#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace convtok::unicode {

// Validates strict UTF-8: no overlongs, no surrogates, nothing above U+10FFFF.
bool is_valid_utf8(std::string_view bytes);

// Decodes a valid UTF-8 string. Behaviour is undefined on invalid input;
// validate first.
std::vector<char32_t> decode(std::string_view bytes);

void append_utf8(std::string& out, char32_t cp);
std::string encode(char32_t cp);

// Byte length of the sequence starting with lead byte `b` (1 for
// continuation or invalid leads).
inline std::size_t sequence_length(unsigned char b) {
  if (b < 0x80) return 1;
  if ((b & 0xE0) == 0xC0) return 2;
  if ((b & 0xF0) == 0xE0) return 3;
  if ((b & 0xF8) == 0xF0) return 4;
  return 1;
}

enum class CharClass : std::uint8_t { kLetter, kDigit, kSpace, kOther };

bool is_whitespace(char32_t cp);
bool is_letter(char32_t cp);
bool is_digit(char32_t cp);
CharClass classify(char32_t cp);

}  // namespace convtok::unicode
