#include "stumpforge/domain_io.hpp"

#include "fixtures.hpp"
#include "process.hpp"

#include <doctest.h>

#include <fstream>

using namespace stumpforge;
using fixtures::quote;

namespace {

fixtures::CommandResult cli(const std::string& args) {
  return fixtures::run_command(quote(STUMPFORGE_CLI) + " " + args);
}

}  // namespace

TEST_CASE("simulate, fit, score and report end to end") {
  fixtures::TempDir dir("cli");
  const std::string d = quote(dir.path().string());
  auto r = cli("simulate-responses --subjects 16 --machines 4 --questions 40 --authors 3 --seed 1 --out-dir " + d);
  REQUIRE(r.exit_code == 0);
  for (auto f : {"matrix.csv", "subjects.jsonl", "questions.jsonl", "truth.json"})
    CHECK(std::filesystem::exists(dir / f));

  const std::string fit_args = "fit --matrix " + quote((dir / "matrix.csv").string()) + " --subjects " +
                               quote((dir / "subjects.jsonl").string()) + " --seed 7 --epochs 60 --out ";
  REQUIRE(cli(fit_args + quote((dir / "a.json").string())).exit_code == 0);
  REQUIRE(cli(fit_args + quote((dir / "b.json").string())).exit_code == 0);
  CHECK(read_file(dir / "a.json") == read_file(dir / "b.json"));

  r = cli("score --fit " + quote((dir / "a.json").string()) + " --questions " +
          quote((dir / "questions.jsonl").string()) + " --out-dir " + d);
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("best answerer: ") != std::string::npos);
  CHECK(r.output.find("author-01") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "scores.csv"));
  CHECK(json::parse(read_file(dir / "scores.json")).size() == 3);

  r = cli("report quadrants --t 0 --fit " + quote((dir / "a.json").string()));
  REQUIRE(r.exit_code == 0);
  std::size_t lines = 0;
  for (char c : r.output) lines += c == '\n';
  CHECK(lines == 5);  // header plus four clusters
  CHECK(r.output.find("StumpsOnlyMachines") != std::string::npos);

  r = cli("report contingency --matrix " + quote((dir / "matrix.csv").string()) + " --subjects " +
          quote((dir / "subjects.jsonl").string()));
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("Machine") != std::string::npos);
  r = cli("report contingency --percent --row m001 --col m002 --matrix " + quote((dir / "matrix.csv").string()) +
          " --subjects " + quote((dir / "subjects.jsonl").string()));
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("Correct") != std::string::npos);
  CHECK(r.output.find('%') != std::string::npos);

  {
    std::ofstream out(dir / "annotations.jsonl");
    out << R"({"question_id":"q0001","tactics":["Negation"]})" << "\n";
    out << R"({"question_id":"q0002","tactics":["Negation","NovelClues"]})" << "\n";
  }
  r = cli("report tactics --buckets 2 --fit " + quote((dir / "a.json").string()) + " --annotations " +
          quote((dir / "annotations.jsonl").string()));
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("Negation") != std::string::npos);
}

TEST_CASE("index build and query") {
  fixtures::TempDir dir("cli-index");
  {
    std::ofstream out(dir / "corpus.jsonl");
    out << R"({"id":"d1","title":"Marie Curie","text":"Marie Curie won two Nobel prizes. She was born in Warsaw."})"
        << "\n";
    out << R"({"id":"d2","title":"Nile","text":"The Nile flows north."})" << "\n";
  }
  const auto idx = quote((dir / "index.bin").string());
  REQUIRE(cli("index build --corpus " + quote((dir / "corpus.jsonl").string()) + " --out " + idx).exit_code == 0);
  const auto r = cli("index query --index " + idx + " --k 2 'Who won Nobel prizes?'");
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.rfind("1\t", 0) == 0);
  CHECK(r.output.find("Marie Curie") != std::string::npos);
}

TEST_CASE("evidence utility report") {
  fixtures::TempDir dir("cli-evidence");
  {
    std::ofstream out(dir / "verdicts.jsonl");
    out << R"({"question_id":"q1","system_id":"baseline","judge_said_helpful":true,"answer_correct":false})"
        << "\n";
  }
  const auto r = cli("report evidence-utility --systems baseline,dense --verdicts " +
                     quote((dir / "verdicts.jsonl").string()));
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("baseline: 2.00, dense: n/a") != std::string::npos);
}

TEST_CASE("exit codes") {
  CHECK(cli("--help").exit_code == 0);
  CHECK(cli("").exit_code == 2);
  CHECK(cli("frobnicate").exit_code == 2);
  CHECK(cli("fit").exit_code == 2);
  CHECK(cli("simulate-responses --subjects 2 --machines 5 --out-dir /tmp/x").exit_code == 2);
  fixtures::TempDir dir("cli-bad");
  {
    std::ofstream out(dir / "bad.csv");
    out << "subject_id,q1\nh1,maybe\n";
  }
  CHECK(cli("fit --matrix " + quote((dir / "bad.csv").string())).exit_code == 2);
  CHECK(cli("fit --matrix " + quote((dir / "missing.csv").string())).exit_code != 0);
}
