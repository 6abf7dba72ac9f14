#include "stumpforge/error.hpp"
#include "stumpforge/store.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <fstream>

using namespace stumpforge;
using namespace stumpforge::store;
using fixtures::question;

namespace {

void seed(CompetitionStore& s) {
  s.register_question(question("q1", "ann", TopicCategory::History));
  s.register_question(question("q2", "ann", TopicCategory::Science));
  s.register_question(question("q3", "bob", TopicCategory::History));
  s.register_subject(fixtures::human("h1"));
  s.register_subject(fixtures::machine("m1"));
}

// Fixture questions are answered by "answer <id>".
gateway::Prediction pred(const std::string& answerer, bool fooled, const std::string& qid = "q1") {
  gateway::Prediction p;
  p.answerer_id = answerer;
  p.answer = fooled ? "wrong" : "answer " + qid;
  p.fooled = fooled;
  return p;
}

}  // namespace

TEST_CASE("packet quotas") {
  std::map<std::string, Question> qs;
  for (const auto& q : {question("a", "w", TopicCategory::History), question("b", "w", TopicCategory::Science)})
    qs.emplace(q.id, q);
  CHECK(validate_packet({"w", {}, {}}, qs, {}).empty());
  const auto v = validate_packet({"w", {"a"}, {}}, qs, {{TopicCategory::History, 2}});
  REQUIRE(v.size() == 1);
  CHECK(v[0] == QuotaViolation{TopicCategory::History, 2, 1});
  const auto extra = validate_packet({"w", {"a", "b"}, {}}, qs, {{TopicCategory::History, 1}});
  CHECK(extra == std::vector<QuotaViolation>{{TopicCategory::Science, 0, 1}});
  CHECK_THROWS_AS(validate_packet({"w", {"zz"}, {}}, qs, {}), NotFoundError);
  CHECK_THROWS(quotas_from_json(json{{"Astrology", 1}}));
}

TEST_CASE("packet quotas over every category match a hand count") {
  std::map<std::string, Question> qs;
  std::vector<std::string> ids;
  Quotas quotas;
  std::size_t n = 0;
  // Category k gets k questions; quota asks for 1 of each.
  for (std::size_t k = 0; k < all_categories().size(); ++k) {
    quotas[all_categories()[k]] = 1;
    for (std::size_t i = 0; i < k; ++i) {
      auto q = question("q" + std::to_string(n++), "w", all_categories()[k]);
      ids.push_back(q.id);
      qs.emplace(q.id, q);
    }
  }
  const auto v = validate_packet({"w", ids, quotas}, qs, quotas);
  CHECK(v.size() == all_categories().size() - 1);  // only the 1-question category passes
  for (const auto& x : v) CHECK(x.want == 1);
}

TEST_CASE("submitted packets must meet quotas and belong to the author") {
  CompetitionStore s;
  seed(s);
  const auto before = s.version();
  CHECK_THROWS_AS(s.submit_packet({"ann", {"q1"}, {{TopicCategory::History, 2}}}), ValidationError);
  CHECK_THROWS_AS(s.submit_packet({"ann", {"q3"}, {{TopicCategory::History, 1}}}), ValidationError);
  CHECK(s.version() == before);
  s.submit_packet({"ann", {"q1", "q2"}, {{TopicCategory::History, 1}, {TopicCategory::Science, 1}}});
  CHECK(s.snapshot()->packets.size() == 1);
}

TEST_CASE("responses: empty list, valid record, duplicate") {
  CompetitionStore s;
  seed(s);
  const auto v0 = s.version();
  CHECK(s.record_responses({}) == v0 + 1);
  CHECK(s.snapshot()->matrix().present_count() == 0);
  s.record_responses({{"h1", "q1", true}});
  const auto m = s.snapshot()->matrix();
  CHECK(m.at(*m.subject_index("h1"), *m.question_index("q1")) == true);
  const auto v1 = s.version();
  CHECK_THROWS_AS(s.record_responses({{"h1", "q2", false}, {"h1", "q1", false}}), DuplicateError);
  CHECK(s.version() == v1);
  CHECK(s.snapshot()->matrix().present_count() == 1);
  CHECK_THROWS_AS(s.record_responses({{"ghost", "q1", true}}), NotFoundError);
}

TEST_CASE("duplicate registrations are rejected") {
  CompetitionStore s;
  seed(s);
  CHECK_THROWS_AS(s.register_question(question("q1", "zed")), DuplicateError);
  CHECK_THROWS_AS(s.register_subject(fixtures::human("h1")), DuplicateError);
}

TEST_CASE("annotations upsert and clear") {
  CompetitionStore s;
  s.register_question(question("east", "ann", TopicCategory::Geography,
                               "What is the easternmost state?", "Maine"));
  s.register_question(question("bell", "ann", TopicCategory::Science,
                               "How many ways can five objects be partitioned?", "52"));
  s.annotate("east", {QuestionFlaw::Subjectivity, QuestionFlaw::LacksSpecificity}, {});
  s.annotate("bell", {}, {AdversarialTactic::LogicCalculation});
  auto st = s.snapshot();
  CHECK(st->annotations.at("east").flaws ==
        std::set<QuestionFlaw>{QuestionFlaw::Subjectivity, QuestionFlaw::LacksSpecificity});
  CHECK(st->annotations.at("bell").tactics == std::set<AdversarialTactic>{AdversarialTactic::LogicCalculation});
  const auto a = st->annotations.at("east");
  CHECK(annotation_from_json(annotation_to_json(a)) == a);
  s.annotate("east", {}, {});
  CHECK_FALSE(s.snapshot()->annotations.contains("east"));
  CHECK_THROWS_AS(s.annotate("nope", {QuestionFlaw::Subjectivity}, {}), NotFoundError);
}

TEST_CASE("replay from the log reproduces the state hash") {
  fixtures::TempDir dir("store");
  std::string hash;
  {
    CompetitionStore s(dir.path(), 3);
    seed(s);
    s.record_responses({{"h1", "q1", true}, {"m1", "q1", false}});
    s.annotate("q2", {QuestionFlaw::LacksFactuality}, {AdversarialTactic::Negation});
    s.store_prediction("q1", pred("m1", true));
    s.record_verdicts({{"q1", "baseline", true, false}});
    hash = s.snapshot()->hash();
    CHECK(std::filesystem::exists(s.snapshot_path()));
  }
  CHECK(CompetitionStore::replay(dir / "events.jsonl").hash() == hash);
  CompetitionStore reopened(dir.path());
  CHECK(reopened.snapshot()->hash() == hash);
  CHECK(reopened.snapshot()->verdicts.size() == 1);
  CHECK(CompetitionState::from_json(reopened.snapshot()->to_json()).hash() == hash);

  // Every line carries a sequence number and schema version.
  std::ifstream in(dir / "events.jsonl");
  std::string line;
  std::uint64_t seq = 0;
  while (std::getline(in, line)) {
    const auto e = json::parse(line);
    CHECK(e["seq"] == ++seq);
    CHECK(e.contains("schema_version"));
    CHECK(e.contains("type"));
  }
}

TEST_CASE("a corrupted log is reported with its line") {
  fixtures::TempDir dir("store-bad");
  {
    CompetitionStore s(dir.path());
    seed(s);
  }
  {
    std::ofstream out(dir / "events.jsonl", std::ios::app);
    out << R"({"type":"Bogus","seq":6,"schema_version":1})" << "\n";
  }
  CHECK_THROWS_WITH(CompetitionStore::replay(dir / "events.jsonl"), doctest::Contains("line 6"));
}

TEST_CASE("predictions must agree with correctness") {
  CompetitionStore s;
  seed(s);
  auto p = pred("m1", false);
  p.answer = "nonsense";
  CHECK_THROWS_AS(s.store_prediction("q1", p), ValidationError);
  CHECK_THROWS_AS(s.store_prediction("zz", pred("m1", true)), NotFoundError);
}

TEST_CASE("machine leaderboard mirrors stored predictions") {
  CompetitionStore s;
  seed(s);
  CHECK(machine_leaderboard(*s.snapshot()).empty());
  s.store_prediction("q1", pred("m1", true));
  s.store_prediction("q1", pred("m2", false));
  s.store_prediction("q3", pred("m1", true, "q3"));
  const auto board = machine_leaderboard(*s.snapshot());
  REQUIRE(board.size() == 2);
  CHECK(board[0].question_id == "q1");
  CHECK(board[0].stumped == std::map<std::string, bool>{{"m1", true}, {"m2", false}});
  CHECK(board[1].author_id == "bob");
  for (const auto& e : board)
    for (const auto& [m, fooled] : e.stumped)
      CHECK(fooled == s.snapshot()->predictions.at(e.question_id).at(m).fooled);
}

TEST_CASE("writer leaderboard ranks by score with id tie-break") {
  CompetitionStore s;
  seed(s);
  std::vector<scoring::AuthorMetrics> m(2);
  m[0].author_id = "bob";
  m[1].author_id = "ann";
  m[0].score = m[1].score = 0.5;
  const auto board = writer_leaderboard(*s.snapshot(), m, {{"ann", 0.3}, {"bob", std::nullopt}});
  REQUIRE(board.size() == 2);
  CHECK(board[0].author_id == "ann");
  CHECK(board[0].rank == 1);
  CHECK(board[1].rank == 2);
  CHECK(board[0].category_counts.at(TopicCategory::History) == 1);
  CHECK(board[0].category_counts.at(TopicCategory::Science) == 1);
  CHECK(*board[0].diversity == 0.3);
  CHECK_FALSE(board[1].diversity.has_value());

  std::vector<scoring::AuthorMetrics> one(1);
  one[0].author_id = "solo";
  CHECK(writer_leaderboard(*s.snapshot(), one, {})[0].rank == 1);
}

TEST_CASE("verdicts need known questions") {
  CompetitionStore s;
  seed(s);
  CHECK_THROWS_AS(s.record_verdicts({{"zz", "x", true, true}}), NotFoundError);
  s.record_verdicts({{"q1", "x", false, true}});
  const auto v = verdict_from_json(verdict_to_json(s.snapshot()->verdicts[0]));
  CHECK(v.answer_correct);
  CHECK(verdict_to_json(v)["rubric_score"] == 1);
}

TEST_CASE("edited questions must point at a registered parent") {
  CompetitionStore s;
  auto child = question("q1b", "ann");
  child.parent_question_id = "q1";
  CHECK_THROWS_AS(s.register_question(child), NotFoundError);
  s.register_question(question("q1", "ann"));
  s.register_question(child);
  CHECK(s.snapshot()->questions.at("q1b").parent_question_id == "q1");
}
