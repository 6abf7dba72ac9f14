#include "stumpforge/domain.hpp"

#include "stumpforge/error.hpp"
#include "stumpforge/text.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <array>
#include <sstream>
#include <unordered_map>

namespace stumpforge {

namespace {

constexpr std::array<std::pair<TopicCategory, std::string_view>, kCategoryCount> kCategoryNames{{
    {TopicCategory::Art, "Art"},
    {TopicCategory::Literature, "Literature"},
    {TopicCategory::Geography, "Geography"},
    {TopicCategory::History, "History"},
    {TopicCategory::Science, "Science"},
    {TopicCategory::TvFilm, "TvFilm"},
    {TopicCategory::Music, "Music"},
    {TopicCategory::Lifestyle, "Lifestyle"},
    {TopicCategory::Sport, "Sport"},
}};

bool is_article(std::string_view w) { return w == "a" || w == "an" || w == "the"; }

}  // namespace

std::string_view to_string(TopicCategory c) {
  for (const auto& [cat, name] : kCategoryNames)
    if (cat == c) return name;
  return "?";
}

TopicCategory parse_category(std::string_view label) {
  for (const auto& [cat, name] : kCategoryNames)
    if (name == label) return cat;
  // Display spelling used by the interface.
  if (label == "TV and Film") return TopicCategory::TvFilm;
  throw ValidationError("unknown topic category: " + std::string(label));
}

const std::vector<TopicCategory>& all_categories() {
  static const std::vector<TopicCategory> cats = [] {
    std::vector<TopicCategory> v;
    for (const auto& [cat, _] : kCategoryNames) v.push_back(cat);
    return v;
  }();
  return cats;
}

NormalizedAnswer normalize_answer(std::string_view raw) {
  const std::string folded = fold_case(raw);

  // Punctuation and whitespace both become word separators.
  std::vector<std::string> words;
  std::string current;
  const auto* bytes = reinterpret_cast<const uint8_t*>(folded.data());
  const int32_t len = static_cast<int32_t>(folded.size());
  int32_t i = 0;
  while (i < len) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(bytes, i, len, c);
    if (c >= 0 && (u_ispunct(c) || u_isUWhiteSpace(c))) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else {
      current.append(folded, static_cast<std::size_t>(start),
                     static_cast<std::size_t>(i - start));
    }
  }
  if (!current.empty()) words.push_back(std::move(current));

  // Leading articles are stripped repeatedly but never the last word, which
  // keeps the result idempotent ("the the" -> "the" -> "the").
  std::size_t first = 0;
  while (words.size() - first > 1 && is_article(words[first])) ++first;

  std::string out;
  for (std::size_t w = first; w < words.size(); ++w) {
    if (!out.empty()) out.push_back(' ');
    out += words[w];
  }
  return NormalizedAnswer(std::move(out));
}

Question Question::make(std::string id, std::string text, std::string target,
                        std::set<std::string> aliases, TopicCategory category,
                        std::string author_id, std::string round_id) {
  Question q;
  q.id = std::move(id);
  q.text = std::move(text);
  q.target_answer = std::move(target);
  q.answer_aliases = std::move(aliases);
  q.answer_aliases.insert(q.target_answer);
  q.category = category;
  q.author_id = std::move(author_id);
  q.round_id = std::move(round_id);
  q.validate();
  return q;
}

void Question::validate() const {
  if (id.empty()) throw ValidationError("question id is empty");
  if (text.empty()) throw ValidationError("question " + id + ": text is empty");
  if (target_answer.empty()) throw ValidationError("question " + id + ": target_answer is empty");
  if (!answer_aliases.contains(target_answer))
    throw ValidationError("question " + id + ": target_answer missing from answer_aliases");
}

bool is_correct(std::string_view prediction, const Question& question) {
  const NormalizedAnswer p = normalize_answer(prediction);
  if (p.empty()) return false;
  return std::any_of(question.answer_aliases.begin(), question.answer_aliases.end(),
                     [&](const std::string& alias) { return normalize_answer(alias) == p; });
}

std::string_view to_string(SubjectKind k) { return k == SubjectKind::Human ? "human" : "machine"; }

SubjectKind parse_subject_kind(std::string_view label) {
  if (label == "human" || label == "Human") return SubjectKind::Human;
  if (label == "machine" || label == "Machine") return SubjectKind::Machine;
  throw ValidationError("unknown subject kind: " + std::string(label));
}

ResponseMatrix::ResponseMatrix(std::vector<Subject> subjects, std::vector<std::string> questions)
    : subjects_(std::move(subjects)),
      questions_(std::move(questions)),
      cells_(subjects_.size() * questions_.size()) {
  std::set<std::string_view> seen;
  for (const auto& s : subjects_)
    if (!seen.insert(s.id).second) throw DuplicateError("duplicate subject id: " + s.id);
  seen.clear();
  for (const auto& q : questions_)
    if (!seen.insert(q).second) throw DuplicateError("duplicate question id: " + q);
}

ResponseMatrix ResponseMatrix::from_records(std::vector<Subject> subjects,
                                            std::vector<std::string> questions,
                                            const std::vector<ResponseRecord>& records) {
  ResponseMatrix m(std::move(subjects), std::move(questions));
  std::unordered_map<std::string, std::size_t> srow, qcol;
  for (std::size_t i = 0; i < m.subjects_.size(); ++i) srow.emplace(m.subjects_[i].id, i);
  for (std::size_t j = 0; j < m.questions_.size(); ++j) qcol.emplace(m.questions_[j], j);
  for (const auto& r : records) {
    auto si = srow.find(r.subject_id);
    if (si == srow.end()) throw NotFoundError("unknown subject id: " + r.subject_id);
    auto qi = qcol.find(r.question_id);
    if (qi == qcol.end()) throw NotFoundError("unknown question id: " + r.question_id);
    if (m.at(si->second, qi->second).has_value())
      throw DuplicateError("duplicate response: " + r.subject_id + "/" + r.question_id);
    m.set(si->second, qi->second, r.correct);
  }
  return m;
}

std::optional<std::size_t> ResponseMatrix::subject_index(std::string_view id) const {
  for (std::size_t i = 0; i < subjects_.size(); ++i)
    if (subjects_[i].id == id) return i;
  return std::nullopt;
}

std::optional<std::size_t> ResponseMatrix::question_index(std::string_view id) const {
  for (std::size_t j = 0; j < questions_.size(); ++j)
    if (questions_[j] == id) return j;
  return std::nullopt;
}

std::size_t ResponseMatrix::present_count() const {
  return static_cast<std::size_t>(
      std::count_if(cells_.begin(), cells_.end(), [](const Cell& c) { return c.has_value(); }));
}

std::vector<ResponseRecord> ResponseMatrix::records() const {
  std::vector<ResponseRecord> out;
  for (std::size_t i = 0; i < subjects_.size(); ++i)
    for (std::size_t j = 0; j < questions_.size(); ++j)
      if (auto c = at(i, j)) out.push_back({subjects_[i].id, questions_[j], *c});
  return out;
}

ResponseMatrix ResponseMatrix::select_kind(SubjectKind kind) const {
  std::vector<Subject> subs;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < subjects_.size(); ++i) {
    if (subjects_[i].kind == kind) {
      subs.push_back(subjects_[i]);
      rows.push_back(i);
    }
  }
  ResponseMatrix out(std::move(subs), questions_);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t j = 0; j < questions_.size(); ++j) out.set(r, j, at(rows[r], j));
  return out;
}

ResponseMatrix ResponseMatrix::drop_empty_questions() const {
  std::vector<std::string> qs;
  std::vector<std::size_t> cols;
  for (std::size_t j = 0; j < questions_.size(); ++j) {
    for (std::size_t i = 0; i < subjects_.size(); ++i) {
      if (at(i, j).has_value()) {
        qs.push_back(questions_[j]);
        cols.push_back(j);
        break;
      }
    }
  }
  ResponseMatrix out(subjects_, std::move(qs));
  for (std::size_t i = 0; i < subjects_.size(); ++i)
    for (std::size_t c = 0; c < cols.size(); ++c) out.set(i, c, at(i, cols[c]));
  return out;
}

void ResponseMatrix::validate_for_fit() const {
  if (subjects_.empty() || questions_.empty())
    throw ValidationError("response matrix is empty");
  for (std::size_t i = 0; i < subjects_.size(); ++i) {
    bool any = false;
    for (std::size_t j = 0; j < questions_.size() && !any; ++j) any = at(i, j).has_value();
    if (!any) throw ValidationError("subject " + subjects_[i].id + " has no responses");
  }
  for (std::size_t j = 0; j < questions_.size(); ++j) {
    bool any = false;
    for (std::size_t i = 0; i < subjects_.size() && !any; ++i) any = at(i, j).has_value();
    if (!any) throw ValidationError("question " + questions_[j] + " has no responses");
  }
}

bool operator==(const ResponseMatrix& a, const ResponseMatrix& b) {
  if (a.questions_ != b.questions_ || a.cells_ != b.cells_) return false;
  if (a.subjects_.size() != b.subjects_.size()) return false;
  for (std::size_t i = 0; i < a.subjects_.size(); ++i) {
    const auto& x = a.subjects_[i];
    const auto& y = b.subjects_[i];
    if (x.id != y.id || x.kind != y.kind || x.display_name != y.display_name) return false;
  }
  return true;
}

}  // namespace stumpforge
