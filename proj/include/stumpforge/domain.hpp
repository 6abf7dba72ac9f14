#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace stumpforge {

enum class TopicCategory {
  Art,
  Literature,
  Geography,
  History,
  Science,
  TvFilm,
  Music,
  Lifestyle,
  Sport,
};

inline constexpr std::size_t kCategoryCount = 9;

std::string_view to_string(TopicCategory c);
/// Throws ValidationError for labels outside the closed set.
TopicCategory parse_category(std::string_view label);
const std::vector<TopicCategory>& all_categories();

/// Lowercased, punctuation-free, article-free answer string.
class NormalizedAnswer {
 public:
  NormalizedAnswer() = default;
  const std::string& value() const { return value_; }
  bool empty() const { return value_.empty(); }
  friend bool operator==(const NormalizedAnswer&, const NormalizedAnswer&) = default;

 private:
  friend NormalizedAnswer normalize_answer(std::string_view raw);
  explicit NormalizedAnswer(std::string v) : value_(std::move(v)) {}
  std::string value_;
};

NormalizedAnswer normalize_answer(std::string_view raw);

struct Question {
  std::string id;
  std::string text;
  std::string target_answer;
  std::set<std::string> answer_aliases;  // always contains target_answer
  TopicCategory category = TopicCategory::Art;
  std::string author_id;
  std::string round_id;
  /// Set for questions edited between rounds; points at the original.
  std::optional<std::string> parent_question_id;

  /// Throws ValidationError on empty text/target. Inserts the target into
  /// the alias set when missing.
  static Question make(std::string id, std::string text, std::string target,
                       std::set<std::string> aliases, TopicCategory category,
                       std::string author_id, std::string round_id);
  void validate() const;
};

bool is_correct(std::string_view prediction, const Question& question);

enum class SubjectKind { Human, Machine };

std::string_view to_string(SubjectKind k);
SubjectKind parse_subject_kind(std::string_view label);

struct Subject {
  std::string id;
  SubjectKind kind = SubjectKind::Human;
  std::string display_name;
};

struct ResponseRecord {
  std::string subject_id;
  std::string question_id;
  bool correct = false;
};

/// Dense subject × question grid of binary-or-missing responses.
class ResponseMatrix {
 public:
  using Cell = std::optional<bool>;

  ResponseMatrix() = default;
  ResponseMatrix(std::vector<Subject> subjects, std::vector<std::string> questions);

  /// Builds a matrix from records; subjects and question order are taken
  /// from the arguments. Throws on unknown ids or duplicate cells.
  static ResponseMatrix from_records(std::vector<Subject> subjects,
                                     std::vector<std::string> questions,
                                     const std::vector<ResponseRecord>& records);

  std::size_t subject_count() const { return subjects_.size(); }
  std::size_t question_count() const { return questions_.size(); }
  const std::vector<Subject>& subjects() const { return subjects_; }
  const std::vector<std::string>& questions() const { return questions_; }

  Cell at(std::size_t subject, std::size_t question) const {
    return cells_[subject * questions_.size() + question];
  }
  void set(std::size_t subject, std::size_t question, Cell value) {
    cells_[subject * questions_.size() + question] = value;
  }

  std::optional<std::size_t> subject_index(std::string_view id) const;
  std::optional<std::size_t> question_index(std::string_view id) const;

  std::size_t present_count() const;
  std::vector<ResponseRecord> records() const;

  /// Rows whose subject kind matches; column set unchanged.
  ResponseMatrix select_kind(SubjectKind kind) const;
  /// Drops columns with no present cell.
  ResponseMatrix drop_empty_questions() const;

  /// Throws ValidationError when empty or when a row/column has no present
  /// cell. Required before fitting.
  void validate_for_fit() const;

  friend bool operator==(const ResponseMatrix& a, const ResponseMatrix& b);

 private:
  std::vector<Subject> subjects_;
  std::vector<std::string> questions_;
  std::vector<Cell> cells_;
};

}  // namespace stumpforge
