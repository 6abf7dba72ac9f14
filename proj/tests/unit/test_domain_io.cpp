#include "stumpforge/domain_io.hpp"
#include "stumpforge/error.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace stumpforge;

namespace {

ResponseMatrix random_matrix(std::uint32_t seed, std::size_t rows, std::size_t cols) {
  std::mt19937 rng(seed);
  std::vector<Subject> subs;
  for (std::size_t i = 0; i < rows; ++i)
    subs.push_back(i % 3 == 0 ? fixtures::machine("m" + std::to_string(i)) : fixtures::human("h" + std::to_string(i)));
  std::vector<std::string> qs;
  for (std::size_t j = 0; j < cols; ++j) qs.push_back("q," + std::to_string(j));  // comma forces quoting
  ResponseMatrix m(subs, qs);
  std::uniform_int_distribution<int> cell(0, 2);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      const int c = cell(rng);
      if (c < 2) m.set(i, j, c == 1);
    }
  return m;
}

}  // namespace

TEST_CASE("question JSON round trip keeps every field") {
  auto q = Question::make("q7", "Which city hosts the Worms cathedral?", "Worms", {"Worms, Germany"},
                          TopicCategory::Geography, "team-a", "round-2");
  q.parent_question_id = "q3";
  const auto back = question_from_json(to_json(q));
  CHECK(back.id == q.id);
  CHECK(back.text == q.text);
  CHECK(back.answer_aliases == q.answer_aliases);
  CHECK(back.category == q.category);
  CHECK(back.author_id == "team-a");
  CHECK(back.round_id == "round-2");
  CHECK(back.parent_question_id == std::optional<std::string>("q3"));
}

TEST_CASE("question_from_json rejects missing fields and unknown categories") {
  CHECK_THROWS_AS(question_from_json(json::parse(R"({"id":"q","text":"t","category":"Art"})")),
                  ValidationError);
  CHECK_THROWS_AS(
      question_from_json(json::parse(R"({"id":"q","text":"t","target_answer":"x","category":"Food"})")),
      ValidationError);
}

TEST_CASE("response records accept 0/1 and booleans only") {
  CHECK(response_from_json(json::parse(R"({"subject_id":"a","question_id":"b","correct":1})")).correct);
  CHECK_FALSE(response_from_json(json::parse(R"({"subject_id":"a","question_id":"b","correct":false})")).correct);
  CHECK_THROWS_AS(response_from_json(json::parse(R"({"subject_id":"a","question_id":"b","correct":2})")),
                  ValidationError);
}

TEST_CASE("read_jsonl skips blank lines and reports the failing line") {
  std::istringstream in("{\"a\":1}\n\n  \n{\"b\":2}\n");
  CHECK(read_jsonl(in).size() == 2);
  std::istringstream bad("{\"a\":1}\n{oops\n");
  try {
    read_jsonl(bad);
    FAIL("expected a parse failure");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("matrix round-trips through responses.jsonl") {
  for (std::uint32_t seed = 0; seed < 20; ++seed) {
    const auto m = random_matrix(seed, 5, 7);
    std::stringstream buf;
    write_responses(buf, m);
    const auto back = ResponseMatrix::from_records(m.subjects(), m.questions(), read_responses(buf));
    CHECK(back == m);
  }
}

TEST_CASE("matrix round-trips through matrix.csv with known subject kinds") {
  for (std::uint32_t seed = 0; seed < 20; ++seed) {
    const auto m = random_matrix(seed, 6, 4);
    std::stringstream buf;
    write_matrix_csv(buf, m);
    const auto back = read_matrix_csv(buf, m.subjects());
    CHECK(back == m);
  }
}

TEST_CASE("matrix.csv layout and validation") {
  std::istringstream in("subject_id,q1,q2\nalice,1,\nbot,0,1\n");
  const auto m = read_matrix_csv(in, {fixtures::machine("bot")});
  CHECK(m.subjects()[0].kind == SubjectKind::Human);
  CHECK(m.subjects()[1].kind == SubjectKind::Machine);
  CHECK_FALSE(m.at(0, 1).has_value());
  std::ostringstream out;
  write_matrix_csv(out, m);
  CHECK(out.str() == "subject_id,q1,q2\nalice,1,\nbot,0,1\n");

  std::istringstream ragged("subject_id,q1,q2\nalice,1\n");
  CHECK_THROWS_AS(read_matrix_csv(ragged), ValidationError);
  std::istringstream junk("subject_id,q1\nalice,yes\n");
  CHECK_THROWS_AS(read_matrix_csv(junk), ValidationError);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_matrix_csv(empty), ValidationError);
}
