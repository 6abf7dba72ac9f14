#pragma once

#include "stumpforge/domain.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace stumpforge::diversity {

/// country code -> probability. Empty means "no entities"; otherwise values
/// are non-negative and sum to 1.
using CountryDistribution = std::map<std::string, double>;

void validate_distribution(const CountryDistribution& d);

/// world_population.json: {code: share}. Shares must sum to 1 within 1e-6;
/// the result is renormalized exactly.
CountryDistribution read_reference(const std::filesystem::path& path);
CountryDistribution reference_from_json_text(std::string_view text);

struct EntityMatch {
  std::string surface;  // as written in the question
  std::string country;
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Surface form -> country code, matched greedily (longest first) on word
/// boundaries of the case-folded text.
class Gazetteer {
 public:
  /// gazetteer.tsv: surface<TAB>code per line; blank and '#' lines skipped.
  static Gazetteer from_tsv(std::istream& in);
  static Gazetteer from_tsv_file(const std::filesystem::path& path);

  void add(std::string_view surface, std::string country);
  std::vector<EntityMatch> match(std::string_view text) const;
  std::size_t size() const { return entries_; }
  bool empty() const { return entries_ == 0; }

  /// Codes that do not appear in the reference distribution.
  std::set<std::string> unknown_codes(const CountryDistribution& reference) const;

 private:
  struct Node {
    std::map<char, std::uint32_t> next;
    std::optional<std::string> country;
  };
  std::vector<Node> nodes_{1};
  std::size_t entries_ = 0;
};

struct QuestionDistribution {
  CountryDistribution distribution;
  std::map<std::string, std::size_t> counts;
  std::vector<std::string> unmatched_questions;
};

QuestionDistribution question_distribution(const std::vector<Question>& questions,
                                           const Gazetteer& gazetteer);

inline constexpr double kDefaultEpsilon = 1e-6;

/// KL(p' || q') after adding epsilon to every code in the union of supports
/// and renormalizing. Throws DiversityUndefinedError when p is empty.
double kl(const CountryDistribution& p, const CountryDistribution& q,
          double epsilon = kDefaultEpsilon);

/// Up to n codes with the largest q(c) - p(c), ties by code.
std::vector<std::string> suggest(const CountryDistribution& p, const CountryDistribution& q,
                                 std::size_t n);

struct DiversityDelta {
  std::optional<double> before;
  std::optional<double> after;
  std::optional<double> delta;  // after - before, when both are defined
};

DiversityDelta diversity_delta(const std::vector<Question>& existing, const Question& draft,
                               const Gazetteer& gazetteer, const CountryDistribution& reference,
                               double epsilon = kDefaultEpsilon);

}  // namespace stumpforge::diversity
