#include "stumpforge/domain_io.hpp"

#include "stumpforge/error.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace stumpforge {

namespace {

std::string require_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string())
    throw ValidationError(std::string("missing or non-string field '") + key + "'");
  return it->get<std::string>();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

json to_json(const Question& q) {
  json j = {{"id", q.id},
            {"text", q.text},
            {"target_answer", q.target_answer},
            {"answer_aliases", std::vector<std::string>(q.answer_aliases.begin(),
                                                        q.answer_aliases.end())},
            {"category", std::string(to_string(q.category))},
            {"author_id", q.author_id},
            {"round_id", q.round_id}};
  if (q.parent_question_id) j["parent_question_id"] = *q.parent_question_id;
  return j;
}

Question question_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("question must be a JSON object");
  std::set<std::string> aliases;
  if (auto it = j.find("answer_aliases"); it != j.end()) {
    if (!it->is_array()) throw ValidationError("answer_aliases must be an array");
    for (const auto& a : *it) {
      if (!a.is_string()) throw ValidationError("answer_aliases entries must be strings");
      aliases.insert(a.get<std::string>());
    }
  }
  Question q = Question::make(require_string(j, "id"), require_string(j, "text"),
                              require_string(j, "target_answer"), std::move(aliases),
                              parse_category(require_string(j, "category")),
                              j.value("author_id", std::string()), j.value("round_id", std::string()));
  if (auto it = j.find("parent_question_id"); it != j.end() && it->is_string())
    q.parent_question_id = it->get<std::string>();
  return q;
}

json to_json(const Subject& s) {
  return {{"id", s.id}, {"kind", std::string(to_string(s.kind))}, {"display_name", s.display_name}};
}

Subject subject_from_json(const json& j) {
  Subject s;
  s.id = require_string(j, "id");
  s.kind = parse_subject_kind(j.value("kind", std::string("human")));
  s.display_name = j.value("display_name", s.id);
  return s;
}

json to_json(const ResponseRecord& r) {
  return {{"subject_id", r.subject_id}, {"question_id", r.question_id}, {"correct", r.correct ? 1 : 0}};
}

ResponseRecord response_from_json(const json& j) {
  ResponseRecord r;
  r.subject_id = require_string(j, "subject_id");
  r.question_id = require_string(j, "question_id");
  auto it = j.find("correct");
  if (it == j.end()) throw ValidationError("missing field 'correct'");
  if (it->is_boolean()) {
    r.correct = it->get<bool>();
  } else if (it->is_number_integer() && (it->get<int>() == 0 || it->get<int>() == 1)) {
    r.correct = it->get<int>() == 1;
  } else {
    throw ValidationError("'correct' must be 0 or 1");
  }
  return r;
}

std::vector<json> read_jsonl(std::istream& in) {
  std::vector<json> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw ValidationError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

std::vector<json> read_jsonl_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return read_jsonl(in);
}

void write_jsonl(std::ostream& out, const std::vector<json>& rows) {
  for (const auto& r : rows) out << r.dump() << '\n';
}

std::vector<Question> read_questions(const std::filesystem::path& path) {
  std::vector<Question> out;
  for (const auto& row : read_jsonl_file(path)) out.push_back(question_from_json(row));
  return out;
}

std::vector<Subject> read_subjects(const std::filesystem::path& path) {
  std::vector<Subject> out;
  for (const auto& row : read_jsonl_file(path)) out.push_back(subject_from_json(row));
  return out;
}

std::vector<ResponseRecord> read_responses(std::istream& in) {
  std::vector<ResponseRecord> out;
  for (const auto& row : read_jsonl(in)) out.push_back(response_from_json(row));
  return out;
}

void write_responses(std::ostream& out, const ResponseMatrix& m) {
  for (const auto& r : m.records()) out << to_json(r).dump() << '\n';
}

ResponseMatrix read_matrix_csv(std::istream& in, const std::vector<Subject>& known_subjects) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("matrix.csv: missing header row");
  auto header = split_csv_line(line);
  if (header.empty()) throw ValidationError("matrix.csv: empty header");
  std::vector<std::string> questions(header.begin() + 1, header.end());

  std::unordered_map<std::string, Subject> kinds;
  for (const auto& s : known_subjects) kinds.emplace(s.id, s);

  std::vector<Subject> subjects;
  std::vector<std::vector<std::string>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw ValidationError("matrix.csv line " + std::to_string(lineno) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
    Subject s{fields[0], SubjectKind::Human, fields[0]};
    if (auto it = kinds.find(s.id); it != kinds.end()) s = it->second;
    subjects.push_back(std::move(s));
    rows.push_back(std::move(fields));
  }

  ResponseMatrix m(std::move(subjects), std::move(questions));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 1; j < rows[i].size(); ++j) {
      const auto& cell = rows[i][j];
      if (cell.empty()) continue;
      if (cell == "0") m.set(i, j - 1, false);
      else if (cell == "1") m.set(i, j - 1, true);
      else
        throw ValidationError("matrix.csv: cell (" + rows[i][0] + ", " + header[j] +
                              ") must be 0, 1 or empty, got '" + cell + "'");
    }
  }
  return m;
}

ResponseMatrix read_matrix_csv_file(const std::filesystem::path& path,
                                    const std::vector<Subject>& known_subjects) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return read_matrix_csv(in, known_subjects);
}

void write_matrix_csv(std::ostream& out, const ResponseMatrix& m) {
  out << "subject_id";
  for (const auto& q : m.questions()) out << ',' << csv_escape(q);
  out << '\n';
  for (std::size_t i = 0; i < m.subject_count(); ++i) {
    out << csv_escape(m.subjects()[i].id);
    for (std::size_t j = 0; j < m.question_count(); ++j) {
      out << ',';
      if (auto c = m.at(i, j)) out << (*c ? '1' : '0');
    }
    out << '\n';
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << bytes;
}

}  // namespace stumpforge
