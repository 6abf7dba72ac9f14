#include "stumpforge/error.hpp"
#include "stumpforge/retrieval.hpp"
#include "stumpforge/text.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

using namespace stumpforge;
using namespace stumpforge::retrieval;

namespace {

std::vector<CorpusDocument> three_docs() {
  return {
      {"d1", "Marie Curie", {"Marie Curie won two Nobel prizes.", "She studied radioactivity in Paris."}},
      {"d2", "Nile", {"The Nile flows north into the Mediterranean."}},
      {"d3", "Paris", {"Paris is the capital of France.", "The Seine runs through Paris."}},
  };
}

// Brute-force TF-IDF cosine over every sentence, computed without the index.
std::vector<std::pair<double, std::pair<std::string, std::size_t>>> brute(
    const std::vector<CorpusDocument>& docs, const std::string& question) {
  std::vector<std::map<std::string, double>> tfs;
  std::vector<std::pair<std::string, std::size_t>> refs;
  for (const auto& d : docs)
    for (std::size_t p = 0; p < d.sentences.size(); ++p) {
      std::map<std::string, double> tf;
      for (auto& t : tokenize(d.sentences[p])) tf[t.text] += 1;
      tfs.push_back(tf);
      refs.emplace_back(d.id, p);
    }
  const double m = static_cast<double>(tfs.size());
  std::map<std::string, double> df;
  for (const auto& tf : tfs)
    for (const auto& [t, _] : tf) df[t] += 1;
  auto idf = [&](const std::string& t) { return std::log((m + 1) / (df[t] + 1)) + 1; };
  auto vec = [&](const std::map<std::string, double>& tf) {
    std::map<std::string, double> v;
    double n = 0;
    for (const auto& [t, c] : tf) {
      if (!df.contains(t)) continue;
      v[t] = c * idf(t);
      n += v[t] * v[t];
    }
    for (auto& [t, x] : v) x /= std::sqrt(n);
    return v;
  };
  std::map<std::string, double> qtf;
  for (auto& t : tokenize(question)) qtf[t.text] += 1;
  const auto q = vec(qtf);
  std::vector<std::pair<double, std::pair<std::string, std::size_t>>> out;
  for (std::size_t s = 0; s < tfs.size(); ++s) {
    const auto v = vec(tfs[s]);
    double dot = 0;
    bool shared = false;
    for (const auto& [t, x] : q)
      if (v.contains(t)) {
        dot += x * v.at(t);
        shared = true;
      }
    if (shared) out.push_back({dot, refs[s]});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  return out;
}

}  // namespace

TEST_CASE("idf follows the smoothed formula over sentence document frequency") {
  const auto index = InvertedIndex::build(three_docs());
  CHECK(index.sentence_count() == 5);
  const auto& vocab = index.vocabulary();
  CHECK(vocab.at("paris").df == 3);
  CHECK(vocab.at("nile").df == 1);
  CHECK(*index.idf("paris") == doctest::Approx(std::log(6.0 / 4.0) + 1));
  CHECK(*index.idf("nile") == doctest::Approx(std::log(6.0 / 2.0) + 1));
  CHECK_FALSE(index.idf("zanzibar").has_value());
}

TEST_CASE("stopwords are excluded from the vocabulary") {
  IndexConfig c;
  c.stopwords = {"the", "is"};
  const auto index = InvertedIndex::build(three_docs(), c);
  CHECK_FALSE(index.vocabulary().contains("the"));
  CHECK(index.vocabulary().contains("seine"));
}

TEST_CASE("query ranking matches a brute-force cosine oracle") {
  std::vector<CorpusDocument> docs;
  const char* texts[] = {
      "Alpha beta gamma.", "Beta gamma delta.",       "Gamma delta epsilon zeta.", "Alpha alpha beta.",
      "Zeta eta theta.",   "Theta iota kappa alpha.", "Kappa lambda mu.",          "Mu nu xi beta gamma.",
      "Omicron pi rho.",   "Rho sigma tau alpha delta."};
  for (int k = 0; k < 10; ++k) docs.push_back({"doc" + std::to_string(k), "T" + std::to_string(k), {texts[k]}});
  const auto index = InvertedIndex::build(docs);
  for (std::string q : {"alpha beta", "gamma delta", "theta kappa mu", "rho alpha"}) {
    const auto hits = index.query(q, 10);
    const auto expect = brute(docs, q);
    REQUIRE(hits.size() == expect.size());
    for (std::size_t r = 0; r < hits.size(); ++r) {
      CHECK(hits[r].doc_id == expect[r].second.first);
      CHECK(hits[r].score == doctest::Approx(expect[r].first).epsilon(1e-9));
      CHECK(hits[r].rank == r + 1);
    }
  }
}

TEST_CASE("each document retrieves itself at rank one") {
  std::vector<CorpusDocument> docs;
  for (int k = 0; k < 30; ++k)
    docs.push_back({"doc" + std::to_string(k), "Title " + std::to_string(k),
                    {"Unique marker word" + std::to_string(k) + " with shared filler text."}});
  const auto index = InvertedIndex::build(docs);
  for (int k = 0; k < 30; ++k) {
    const auto hits = index.query("marker word" + std::to_string(k), 3);
    REQUIRE_FALSE(hits.empty());
    CHECK(hits[0].doc_id == "doc" + std::to_string(k));
  }
}

TEST_CASE("out-of-vocabulary and empty questions return nothing") {
  const auto index = InvertedIndex::build(three_docs());
  CHECK(index.query("zanzibar quokka", 5).empty());
  CHECK(index.query("", 5).empty());
  CHECK_THROWS_AS(index.query("Paris", 0), ValidationError);
  CHECK_FALSE(extract_answer(index, "zanzibar").answer.has_value());
}

TEST_CASE("ties are broken by document id then position") {
  std::vector<CorpusDocument> docs{{"b", "B", {"Same words here."}}, {"a", "A", {"Same words here."}}};
  const auto hits = InvertedIndex::build(docs).query("same words", 2);
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].doc_id == "a");
  CHECK(hits[1].doc_id == "b");
}

TEST_CASE("the baseline reader answers with the top document title") {
  const auto index = InvertedIndex::build(three_docs());
  const auto ex = extract_answer(index, "Which scientist won two Nobel prizes?");
  REQUIRE(ex.answer.has_value());
  CHECK(*ex.answer == "Marie Curie");
  REQUIRE(ex.evidence.has_value());
  CHECK(ex.evidence->position == 0);
}

TEST_CASE("serialization is byte-stable and round-trips") {
  const auto a = InvertedIndex::build(three_docs());
  const auto b = InvertedIndex::build(three_docs());
  const auto bytes = a.serialize();
  CHECK(bytes == b.serialize());
  CHECK(bytes.rfind("STUMPIDX1\n", 0) == 0);
  const auto back = InvertedIndex::deserialize(bytes);
  CHECK(back.serialize() == bytes);
  const auto q1 = a.query("capital of France", 3);
  const auto q2 = back.query("capital of France", 3);
  REQUIRE(q1.size() == q2.size());
  for (std::size_t k = 0; k < q1.size(); ++k) {
    CHECK(q1[k].doc_id == q2[k].doc_id);
    CHECK(q1[k].score == q2[k].score);
  }
  CHECK_THROWS(InvertedIndex::deserialize("NOTANINDEX\n{}"));
}

TEST_CASE("adding an unrelated document keeps the top hit") {
  auto docs = three_docs();
  const auto before = InvertedIndex::build(docs).query("Nobel prizes radioactivity", 1);
  docs.push_back({"d4", "Volcano", {"Lava erupts from the crater."}});
  const auto after = InvertedIndex::build(docs).query("Nobel prizes radioactivity", 1);
  REQUIRE(before.size() == 1);
  REQUIRE(after.size() == 1);
  CHECK(before[0].doc_id == after[0].doc_id);
}

TEST_CASE("corpus files are read and sentence-split") {
  fixtures::TempDir dir("corpus");
  {
    std::ofstream out(dir / "corpus.jsonl");
    out << R"({"id":"x","title":"X","text":"First sentence. Second one here."})" << "\n";
    out << R"({"id":"y","title":"Y","text":"Only one."})" << "\n";
  }
  const auto docs = read_corpus(dir / "corpus.jsonl");
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].sentences.size() == 2);
  {
    std::ofstream out(dir / "bad.jsonl");
    out << R"({"id":"x"})" << "\n";
  }
  CHECK_THROWS(read_corpus(dir / "bad.jsonl"));
}
