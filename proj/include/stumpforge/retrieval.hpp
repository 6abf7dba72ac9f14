#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace stumpforge::retrieval {

/// One corpus page; the title doubles as the canonical answer for the page.
struct CorpusDocument {
  std::string id;
  std::string title;
  std::vector<std::string> sentences;
};

/// Parses corpus.jsonl ({"id", "title", "text"} per line) and sentence-splits
/// each text.
std::vector<CorpusDocument> read_corpus(const std::filesystem::path& path);

struct IndexConfig {
  std::set<std::string> stopwords;  // case-folded
};

std::set<std::string> read_stopwords(const std::filesystem::path& path);

struct EvidenceHit {
  std::string sentence;
  std::string doc_id;
  std::string doc_title;
  std::size_t position = 0;  // sentence index within the document
  double score = 0.0;        // cosine similarity in [0, 1]
  std::size_t rank = 0;      // 1-based
};

/// Sentence-level TF-IDF index. idf(t) = ln((M + 1) / (df(t) + 1)) + 1 with
/// M the sentence count and df counted per sentence; sentence vectors are
/// raw tf times idf, L2-normalized. Immutable once built.
class InvertedIndex {
 public:
  struct Posting {
    std::uint32_t sentence;
    double weight;
  };
  struct Term {
    std::uint32_t df = 0;
    double idf = 0.0;
    std::vector<Posting> postings;  // ascending sentence
  };

  static InvertedIndex build(std::vector<CorpusDocument> corpus, const IndexConfig& config = {});

  /// Top-k sentences by cosine similarity; ties by (doc id, position).
  /// Sentences sharing no term with the question are never returned.
  std::vector<EvidenceHit> query(std::string_view question, std::size_t k) const;

  /// "STUMPIDX1\n" followed by a JSON body. Byte-identical for identical
  /// corpora.
  std::string serialize() const;
  static InvertedIndex deserialize(std::string_view bytes);

  std::size_t document_count() const { return docs_.size(); }
  std::size_t sentence_count() const { return sentences_.size(); }
  const std::map<std::string, Term>& vocabulary() const { return vocab_; }
  const std::vector<CorpusDocument>& documents() const { return docs_; }
  std::optional<double> idf(std::string_view term) const;

 private:
  struct SentenceRef {
    std::uint32_t doc;
    std::uint32_t position;
  };

  std::vector<CorpusDocument> docs_;
  std::vector<SentenceRef> sentences_;
  std::map<std::string, Term> vocab_;
  std::set<std::string> stopwords_;
};

inline constexpr std::string_view kIndexMagic = "STUMPIDX1";

struct ExtractedAnswer {
  std::optional<std::string> answer;  // nullopt = no answer
  std::optional<EvidenceHit> evidence;
};

/// Baseline reader: the title of the rank-1 hit's document.
ExtractedAnswer extract_answer(const InvertedIndex& index, std::string_view question);

}  // namespace stumpforge::retrieval
