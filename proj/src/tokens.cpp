#include "kgbench/textualize.hpp"

namespace kgbench {
namespace {

enum class Cls { Letter, Digit, Punct, Space, NonAscii };

Cls classify(unsigned char c) {
  if (c >= 0x80) return Cls::NonAscii;
  if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) return Cls::Letter;
  if (c >= '0' && c <= '9') return Cls::Digit;
  if (c == ' ' || c == '\t' || c == '\n' || c == '\r') return Cls::Space;
  return Cls::Punct;
}

std::size_t utf8_length(unsigned char lead) {
  if (lead >= 0xf0) return 4;
  if (lead >= 0xe0) return 3;
  if (lead >= 0xc0) return 2;
  return 1;  // stray continuation byte
}

}  // namespace

std::size_t approx_token_count(std::string_view text) {
  std::size_t tokens = 0;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const Cls cls = classify(static_cast<unsigned char>(text[i]));
    if (cls == Cls::NonAscii) {
      i += utf8_length(static_cast<unsigned char>(text[i]));
      ++tokens;
      continue;
    }
    std::size_t j = i;
    while (j < n && classify(static_cast<unsigned char>(text[j])) == cls) ++j;
    const std::size_t len = j - i;
    switch (cls) {
      case Cls::Letter:
        tokens += 1 + (len - 1) / 8;
        break;
      case Cls::Digit:
        tokens += (len + 2) / 3;
        break;
      case Cls::Punct:
        tokens += (len + 1) / 2;
        break;
      case Cls::Space:
        // A lone space before a word is part of that word's token.
        if (!(len == 1 && text[i] == ' ' && j < n)) ++tokens;
        break;
      case Cls::NonAscii:
        break;
    }
    i = j;
  }
  return tokens;
}

}  // namespace kgbench
