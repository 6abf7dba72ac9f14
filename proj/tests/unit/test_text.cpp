#include "stumpforge/text.hpp"

#include <doctest.h>

using namespace stumpforge;

namespace {

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& t : tokenize(s)) out.push_back(t.text);
  return out;
}

}  // namespace

TEST_CASE("fold_case applies compatibility decomposition then case folding") {
  CHECK(fold_case("Kite RUNNER") == "kite runner");
  CHECK(fold_case("Straße") == "strasse");
  // U+FB01 LATIN SMALL LIGATURE FI decomposes under NFKD.
  CHECK(fold_case("\xEF\xAC\x81nance") == "finance");
  // Full-width letters fold to ASCII.
  CHECK(fold_case("\xEF\xBC\xA1\xEF\xBC\xA2") == "ab");
}

TEST_CASE("fold_case is idempotent") {
  for (std::string s : {"The Kite Runner", "Ærø", "Σίσυφος", "ＡＢＣ", "東京タワー"}) {
    const auto once = fold_case(s);
    CHECK(fold_case(once) == once);
  }
}

TEST_CASE("tokenize splits on punctuation and whitespace and keeps byte spans") {
  const std::string s = "Worms, Germany's capital?";
  const auto toks = tokenize(s);
  REQUIRE(toks.size() == 4);
  CHECK(toks[0].text == "worms");
  CHECK(s.substr(toks[0].begin, toks[0].end - toks[0].begin) == "Worms");
  CHECK(toks[1].text == "germany");
  CHECK(toks[2].text == "s");
  CHECK(toks[3].text == "capital");
  CHECK(s.substr(toks[3].begin, toks[3].end - toks[3].begin) == "capital");
}

TEST_CASE("tokenize keeps digits inside words and isolates ideographs") {
  CHECK(words("George Orwell wrote 1984") == std::vector<std::string>{"george", "orwell", "wrote", "1984"});
  CHECK(words("東京 tower") == std::vector<std::string>{"東", "京", "tower"});
  CHECK(words("  ...  ").empty());
  CHECK(words("").empty());
}

TEST_CASE("tokenize keeps accented letters with their combining marks") {
  const auto toks = words("Café crème");
  REQUIRE(toks.size() == 2);
  CHECK(toks[0] == fold_case("Café"));
}

TEST_CASE("split_sentences requires whitespace and an uppercase start") {
  CHECK(split_sentences("Paris is big. It is in France.") ==
        std::vector<std::string>{"Paris is big.", "It is in France."});
  CHECK(split_sentences("Version 3.5 shipped. Users cheered!") ==
        std::vector<std::string>{"Version 3.5 shipped.", "Users cheered!"});
  CHECK(split_sentences("He said no. then left.") == std::vector<std::string>{"He said no. then left."});
  CHECK(split_sentences("Really?\" She nodded.") == std::vector<std::string>{"Really?\"", "She nodded."});
  CHECK(split_sentences("  ").empty());
}

TEST_CASE("split_sentences accepts an ideographic sentence start") {
  CHECK(split_sentences("It is Tokyo. 東京 is big.").size() == 2);
}
