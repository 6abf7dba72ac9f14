#pragma once

#include "stumpforge/domain.hpp"

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

namespace fixtures {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("stumpforge-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline stumpforge::Question question(const std::string& id, const std::string& author,
                                     stumpforge::TopicCategory category = stumpforge::TopicCategory::History,
                                     const std::string& text = "", const std::string& target = "") {
  return stumpforge::Question::make(id, text.empty() ? "Question " + id + "?" : text,
                                    target.empty() ? "answer " + id : target, {}, category, author, "r1");
}

inline stumpforge::Subject human(const std::string& id) { return {id, stumpforge::SubjectKind::Human, id}; }
inline stumpforge::Subject machine(const std::string& id) {
  return {id, stumpforge::SubjectKind::Machine, id};
}

}  // namespace fixtures
