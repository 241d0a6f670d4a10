#include "xlqa/utf8.hpp"

namespace xlqa::utf8 {

Decoded decode(std::string_view text, std::size_t pos) {
  if (pos >= text.size()) return {0, 0};
  const auto b0 = static_cast<unsigned char>(text[pos]);
  if (b0 < 0x80) return {b0, 1};
  int len;
  char32_t cp;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return {0, 0};
  }
  if (pos + len > text.size()) return {0, 0};
  for (int i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(text[pos + i]);
    if ((b & 0xC0) != 0x80) return {0, 0};
    cp = (cp << 6) | (b & 0x3F);
  }
  // Reject overlong forms, surrogates and out-of-range codepoints.
  if (len == 2 && cp < 0x80) return {0, 0};
  if (len == 3 && cp < 0x800) return {0, 0};
  if (len == 4 && cp < 0x10000) return {0, 0};
  if (cp >= 0xD800 && cp <= 0xDFFF) return {0, 0};
  if (cp > 0x10FFFF) return {0, 0};
  return {cp, len};
}

bool valid(std::string_view text) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    const Decoded d = decode(text, pos);
    if (d.len == 0) return false;
    pos += d.len;
  }
  return true;
}

bool is_char_boundary(std::string_view text, std::size_t pos) {
  if (pos >= text.size()) return pos == text.size();
  return (static_cast<unsigned char>(text[pos]) & 0xC0) != 0x80;
}

bool is_space(char32_t cp) {
  switch (cp) {
    case U' ':
    case U'\t':
    case U'\n':
    case U'\r':
    case U'\v':
    case U'\f':
    case 0x0085:  // NEL
    case 0x00A0:  // NBSP
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202F:
    case 0x205F:
    case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_punct(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= U'!' && cp <= U'/') || (cp >= U':' && cp <= U'@') ||
           (cp >= U'[' && cp <= U'`') || (cp >= U'{' && cp <= U'~');
  }
  switch (cp) {
    case 0x00A1:  // inverted exclamation
    case 0x00BF:  // inverted question
    case 0x00AB:  // left guillemet
    case 0x00BB:  // right guillemet
    case 0x00B7:  // middle dot
    case 0x060C:  // Arabic comma
    case 0x061B:  // Arabic semicolon
    case 0x061F:  // Arabic question mark
    case 0x0964:  // danda
    case 0x0965:  // double danda
    case 0x2010:  // hyphen
    case 0x2013:  // en dash
    case 0x2014:  // em dash
    case 0x2018:
    case 0x2019:
    case 0x201A:
    case 0x201C:
    case 0x201D:
    case 0x201E:
    case 0x2026:  // ellipsis
    case 0x2039:
    case 0x203A:
    case 0x3001:  // ideographic comma
    case 0x3002:  // ideographic full stop
    case 0xFF01:  // fullwidth !
    case 0xFF0C:  // fullwidth ,
    case 0xFF1A:  // fullwidth :
    case 0xFF1B:  // fullwidth ;
    case 0xFF1F:  // fullwidth ?
      return true;
    default:
      return false;
  }
}

}  // namespace xlqa::utf8
