#include "stumpforge/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <stdexcept>

namespace stumpforge {

namespace {

struct Decoded {
  UChar32 cp;
  std::size_t begin;
  std::size_t end;
};

std::vector<Decoded> decode(std::string_view s) {
  std::vector<Decoded> out;
  out.reserve(s.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  const int32_t len = static_cast<int32_t>(s.size());
  int32_t i = 0;
  while (i < len) {
    int32_t start = i;
    UChar32 c;
    U8_NEXT(bytes, i, len, c);
    if (c < 0) c = 0xFFFD;
    out.push_back({c, static_cast<std::size_t>(start), static_cast<std::size_t>(i)});
  }
  return out;
}

bool is_word_char(UChar32 c) {
  if (u_isalnum(c)) return true;
  const int8_t type = u_charType(c);
  return type == U_NON_SPACING_MARK || type == U_COMBINING_SPACING_MARK ||
         type == U_ENCLOSING_MARK;
}

bool is_ideograph(UChar32 c) {
  return u_hasBinaryProperty(c, UCHAR_IDEOGRAPHIC);
}

bool is_closer(UChar32 c) {
  if (c == '"' || c == '\'' || c == ')' || c == ']') return true;
  const int8_t type = u_charType(c);
  return type == U_FINAL_PUNCTUATION || type == U_END_PUNCTUATION;
}

}  // namespace

std::string fold_case(std::string_view utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfkd = icu::Normalizer2::getNFKDInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFKD normalizer unavailable");
  icu::UnicodeString src = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  icu::UnicodeString decomposed = nfkd->normalize(src, status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU normalization failed");
  decomposed.foldCase(U_FOLD_CASE_DEFAULT);
  std::string out;
  decomposed.toUTF8String(out);
  return out;
}

std::vector<Token> tokenize(std::string_view utf8) {
  std::vector<Token> tokens;
  const auto cps = decode(utf8);
  std::size_t i = 0;
  while (i < cps.size()) {
    const UChar32 c = cps[i].cp;
    if (is_ideograph(c)) {
      tokens.push_back({fold_case(utf8.substr(cps[i].begin, cps[i].end - cps[i].begin)),
                        cps[i].begin, cps[i].end});
      ++i;
      continue;
    }
    if (!is_word_char(c)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < cps.size() && is_word_char(cps[j].cp) && !is_ideograph(cps[j].cp)) ++j;
    const std::size_t b = cps[i].begin;
    const std::size_t e = cps[j - 1].end;
    tokens.push_back({fold_case(utf8.substr(b, e - b)), b, e});
    i = j;
  }
  return tokens;
}

std::vector<std::string> split_sentences(std::string_view utf8) {
  std::vector<std::string> sentences;
  const auto cps = decode(utf8);

  auto emit = [&](std::size_t b, std::size_t e) {
    while (b < e && u_isUWhiteSpace(cps[b].cp)) ++b;
    while (e > b && u_isUWhiteSpace(cps[e - 1].cp)) --e;
    if (b < e) {
      const std::size_t from = cps[b].begin;
      const std::size_t to = cps[e - 1].end;
      sentences.emplace_back(utf8.substr(from, to - from));
    }
  };

  std::size_t start = 0;
  std::size_t i = 0;
  while (i < cps.size()) {
    const UChar32 c = cps[i].cp;
    if (c == '.' || c == '!' || c == '?') {
      std::size_t j = i + 1;
      while (j < cps.size() && is_closer(cps[j].cp)) ++j;
      const std::size_t sentence_end = j;
      if (j < cps.size() && u_isUWhiteSpace(cps[j].cp)) {
        while (j < cps.size() && u_isUWhiteSpace(cps[j].cp)) ++j;
        if (j < cps.size() && (u_isupper(cps[j].cp) || is_ideograph(cps[j].cp))) {
          emit(start, sentence_end);
          start = j;
          i = j;
          continue;
        }
      }
    }
    ++i;
  }
  emit(start, cps.size());
  return sentences;
}

}  // namespace stumpforge
