#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace stumpforge {

/// Compatibility decomposition (NFKD) followed by full Unicode case folding.
/// Invalid UTF-8 sequences are replaced with U+FFFD.
std::string fold_case(std::string_view utf8);

/// A word token with its byte span in the source string.
struct Token {
  std::string text;     // case-folded
  std::size_t begin = 0;
  std::size_t end = 0;  // one past the last byte
};

/// Word segmentation: maximal runs of letters, digits and combining marks;
/// every ideographic character is its own token. Punctuation, symbols and
/// whitespace separate tokens.
std::vector<Token> tokenize(std::string_view utf8);

/// Sentence split on terminal punctuation (. ! ?), optionally followed by
/// closing quotes/brackets, then whitespace, then an uppercase letter or an
/// ideographic character. Leading/trailing whitespace is trimmed from each
/// sentence and empty sentences are dropped.
std::vector<std::string> split_sentences(std::string_view utf8);

}  // namespace stumpforge
