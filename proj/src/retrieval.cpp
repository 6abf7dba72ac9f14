#include "stumpforge/retrieval.hpp"

#include "stumpforge/domain_io.hpp"
#include "stumpforge/error.hpp"
#include "stumpforge/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

namespace stumpforge::retrieval {

namespace {

std::map<std::string, std::uint32_t> term_counts(std::string_view text,
                                                 const std::set<std::string>& stopwords) {
  std::map<std::string, std::uint32_t> tf;
  for (auto& tok : tokenize(text))
    if (!stopwords.contains(tok.text)) ++tf[std::move(tok.text)];
  return tf;
}

}  // namespace

std::vector<CorpusDocument> read_corpus(const std::filesystem::path& path) {
  std::vector<CorpusDocument> docs;
  std::size_t line = 0;
  for (const auto& row : read_jsonl_file(path)) {
    ++line;
    if (!row.is_object() || !row.contains("id") || !row.contains("title") || !row.contains("text"))
      throw ValidationError("corpus record " + std::to_string(line) + ": need id, title, text");
    CorpusDocument d;
    d.id = row["id"].is_string() ? row["id"].get<std::string>() : row["id"].dump();
    d.title = row["title"].get<std::string>();
    d.sentences = split_sentences(row["text"].get<std::string>());
    docs.push_back(std::move(d));
  }
  return docs;
}

std::set<std::string> read_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line))
    for (auto& tok : tokenize(line)) words.insert(std::move(tok.text));
  return words;
}

InvertedIndex InvertedIndex::build(std::vector<CorpusDocument> corpus, const IndexConfig& config) {
  if (corpus.empty()) throw ValidationError("cannot build an index over an empty corpus");
  std::set<std::string_view> ids;
  for (const auto& d : corpus) {
    if (!ids.insert(d.id).second) throw DuplicateError("duplicate document id: " + d.id);
    if (d.title.empty()) throw ValidationError("document " + d.id + " has an empty title");
    if (d.sentences.empty()) throw ValidationError("document " + d.id + " has no sentences");
  }

  InvertedIndex idx;
  idx.docs_ = std::move(corpus);
  idx.stopwords_ = config.stopwords;

  std::vector<std::map<std::string, std::uint32_t>> tfs;
  for (std::uint32_t d = 0; d < idx.docs_.size(); ++d) {
    const auto& doc = idx.docs_[d];
    for (std::uint32_t p = 0; p < doc.sentences.size(); ++p) {
      idx.sentences_.push_back({d, p});
      tfs.push_back(term_counts(doc.sentences[p], idx.stopwords_));
      for (const auto& [term, _] : tfs.back()) ++idx.vocab_[term].df;
    }
  }

  const double m = static_cast<double>(idx.sentences_.size());
  for (auto& [_, t] : idx.vocab_) t.idf = std::log((m + 1.0) / (t.df + 1.0)) + 1.0;

  for (std::uint32_t s = 0; s < tfs.size(); ++s) {
    double norm2 = 0.0;
    for (const auto& [term, count] : tfs[s]) {
      const double w = count * idx.vocab_[term].idf;
      norm2 += w * w;
    }
    const double norm = std::sqrt(norm2);
    for (const auto& [term, count] : tfs[s])
      idx.vocab_[term].postings.push_back({s, count * idx.vocab_[term].idf / norm});
  }
  return idx;
}

std::optional<double> InvertedIndex::idf(std::string_view term) const {
  auto it = vocab_.find(std::string(term));
  if (it == vocab_.end()) return std::nullopt;
  return it->second.idf;
}

std::vector<EvidenceHit> InvertedIndex::query(std::string_view question, std::size_t k) const {
  if (k == 0) throw ValidationError("k must be >= 1");
  std::vector<std::pair<const Term*, double>> qvec;
  double norm2 = 0.0;
  for (const auto& [term, count] : term_counts(question, stopwords_)) {
    auto it = vocab_.find(term);
    if (it == vocab_.end()) continue;
    const double w = count * it->second.idf;
    qvec.emplace_back(&it->second, w);
    norm2 += w * w;
  }
  if (qvec.empty()) return {};
  const double norm = std::sqrt(norm2);

  std::unordered_map<std::uint32_t, double> acc;
  for (const auto& [term, w] : qvec)
    for (const auto& p : term->postings) acc[p.sentence] += (w / norm) * p.weight;

  std::vector<std::pair<std::uint32_t, double>> scored(acc.begin(), acc.end());
  auto before = [&](const std::pair<std::uint32_t, double>& a, const std::pair<std::uint32_t, double>& b) {
    if (a.second != b.second) return a.second > b.second;
    const auto& ra = sentences_[a.first];
    const auto& rb = sentences_[b.first];
    const auto& ida = docs_[ra.doc].id;
    const auto& idb = docs_[rb.doc].id;
    if (ida != idb) return ida < idb;
    return ra.position < rb.position;
  };
  const std::size_t keep = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(),
                    before);

  std::vector<EvidenceHit> hits;
  hits.reserve(keep);
  for (std::size_t r = 0; r < keep; ++r) {
    const auto& ref = sentences_[scored[r].first];
    const auto& doc = docs_[ref.doc];
    hits.push_back({doc.sentences[ref.position], doc.id, doc.title, ref.position,
                    std::clamp(scored[r].second, 0.0, 1.0), r + 1});
  }
  return hits;
}

std::string InvertedIndex::serialize() const {
  json docs = json::array();
  for (const auto& d : docs_) docs.push_back({{"id", d.id}, {"title", d.title}, {"sentences", d.sentences}});
  json vocab = json::object();
  for (const auto& [term, t] : vocab_) {
    json postings = json::array();
    for (const auto& p : t.postings) postings.push_back(json::array({p.sentence, p.weight}));
    vocab[term] = {{"df", t.df}, {"idf", t.idf}, {"postings", std::move(postings)}};
  }
  json body = {{"format_version", 1},
               {"documents", std::move(docs)},
               {"sentence_count", sentences_.size()},
               {"stopwords", stopwords_},
               {"vocabulary", std::move(vocab)}};
  return std::string(kIndexMagic) + "\n" + body.dump() + "\n";
}

InvertedIndex InvertedIndex::deserialize(std::string_view bytes) {
  const std::string header = std::string(kIndexMagic) + "\n";
  if (bytes.substr(0, header.size()) != header)
    throw ValidationError("not an index file (missing STUMPIDX1 header)");
  json body;
  try {
    body = json::parse(bytes.substr(header.size()));
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("corrupt index body: ") + e.what());
  }
  if (body.value("format_version", 0) != 1) throw ValidationError("unsupported index format version");

  InvertedIndex idx;
  for (const auto& d : body.at("documents")) {
    idx.docs_.push_back({d.at("id").get<std::string>(), d.at("title").get<std::string>(),
                         d.at("sentences").get<std::vector<std::string>>()});
  }
  for (std::uint32_t d = 0; d < idx.docs_.size(); ++d)
    for (std::uint32_t p = 0; p < idx.docs_[d].sentences.size(); ++p) idx.sentences_.push_back({d, p});
  if (idx.sentences_.size() != body.at("sentence_count").get<std::size_t>())
    throw ValidationError("index sentence count mismatch");
  idx.stopwords_ = body.at("stopwords").get<std::set<std::string>>();
  for (auto it = body.at("vocabulary").begin(); it != body.at("vocabulary").end(); ++it) {
    Term t;
    t.df = it->at("df").get<std::uint32_t>();
    t.idf = it->at("idf").get<double>();
    for (const auto& p : it->at("postings")) {
      const auto s = p.at(0).get<std::uint32_t>();
      if (s >= idx.sentences_.size()) throw ValidationError("posting references a missing sentence");
      t.postings.push_back({s, p.at(1).get<double>()});
    }
    idx.vocab_.emplace(it.key(), std::move(t));
  }
  return idx;
}

ExtractedAnswer extract_answer(const InvertedIndex& index, std::string_view question) {
  auto hits = index.query(question, 1);
  if (hits.empty()) return {};
  ExtractedAnswer out;
  out.answer = hits.front().doc_title;
  out.evidence = std::move(hits.front());
  return out;
}

}  // namespace stumpforge::retrieval
