#pragma once

#include "stumpforge/domain.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace stumpforge {

using json = nlohmann::json;

json to_json(const Question& q);
Question question_from_json(const json& j);
json to_json(const Subject& s);
Subject subject_from_json(const json& j);
json to_json(const ResponseRecord& r);
ResponseRecord response_from_json(const json& j);

/// Reads one JSON object per non-blank line. Errors carry the line number.
std::vector<json> read_jsonl(std::istream& in);
std::vector<json> read_jsonl_file(const std::filesystem::path& path);
void write_jsonl(std::ostream& out, const std::vector<json>& rows);

std::vector<Question> read_questions(const std::filesystem::path& path);
std::vector<Subject> read_subjects(const std::filesystem::path& path);
std::vector<ResponseRecord> read_responses(std::istream& in);
void write_responses(std::ostream& out, const ResponseMatrix& m);

/// matrix.csv: header `subject_id,<qid>...`; one row per subject; cells
/// 0, 1 or empty. Subjects default to Human unless `kinds` supplies them.
ResponseMatrix read_matrix_csv(std::istream& in, const std::vector<Subject>& known_subjects = {});
ResponseMatrix read_matrix_csv_file(const std::filesystem::path& path,
                                    const std::vector<Subject>& known_subjects = {});
void write_matrix_csv(std::ostream& out, const ResponseMatrix& m);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace stumpforge
