#pragma once

#include "stumpforge/annotations.hpp"
#include "stumpforge/domain.hpp"
#include "stumpforge/irt.hpp"

#include <array>
#include <map>
#include <string>
#include <vector>

namespace stumpforge::scoring {

/// The questions one author contributed. Never empty.
struct QuestionSet {
  std::string author_id;
  std::vector<std::string> question_ids;
};

/// Groups questions by author, ordered by author id.
std::vector<QuestionSet> sets_by_author(const std::vector<Question>& questions);

/// Mean |theta_h - theta_c| over the set.
double margin(const QuestionSet& set, const irt::DualDifficulty& dual);

/// Mean discriminability over the set.
double aggregate_discriminability(const QuestionSet& set, const irt::IrtParameters& params);

/// Median absolute deviation of the human difficulties in the set. Medians
/// of even-sized samples take the mid-point of the two central values.
double difficulty_spread(const QuestionSet& set, const irt::DualDifficulty& dual);

double median(std::vector<double> values);

/// (v - mean) / population std. Throws ValidationError with fewer than two
/// values or zero variance.
std::vector<double> standardize(const std::vector<double>& values);

struct AuthorMetrics {
  std::string author_id;
  std::size_t question_count = 0;
  double raw_margin = 0.0;
  double raw_discriminability = 0.0;
  double raw_spread = 0.0;
  double std_margin = 0.0;
  double std_discriminability = 0.0;
  double std_spread = 0.0;
  double score = 0.0;
};

/// Per-author metrics in input order. score = |Q_a| * mean of the three
/// standardized metrics.
std::vector<AuthorMetrics> score(const std::vector<QuestionSet>& sets,
                                 const irt::DualDifficulty& dual,
                                 const irt::IrtParameters& params);

/// Indices of `metrics` sorted by descending score, ties by author id.
std::vector<std::size_t> ranking(const std::vector<AuthorMetrics>& metrics);

/// Subject with the highest skill; ties go to the smallest id.
std::string best_answerer(const irt::IrtParameters& params);

enum class QuadrantLabel { StumpsOnlyMachines, StumpsBoth, StumpsOnlyHumans, Easy };

std::string_view to_string(QuadrantLabel label);

QuadrantLabel classify(double human_difficulty, double machine_difficulty, double threshold);

struct QuadrantReport {
  double threshold = 0.0;
  std::vector<std::string> question_ids;
  std::vector<QuadrantLabel> labels;
  std::array<std::size_t, 4> counts{};  // indexed by QuadrantLabel
  std::array<double, 4> shares{};       // percent, sums to 100 when non-empty
};

QuadrantReport quadrants(const irt::DualDifficulty& dual, double threshold = 0.0);
QuadrantReport quadrant_report_from_labels(std::vector<std::string> ids,
                                           std::vector<QuadrantLabel> labels, double threshold);
/// Four-row table, one line per label with count and whole-number percent.
std::string render_quadrants(const QuadrantReport& report);

/// 2x2 tally. Rows belong to the first group/subject, columns to the second.
/// Group view: index 0 = "All" stumped, 1 = "Some". Pair view: 0 = Correct,
/// 1 = Incorrect.
struct StumpContingency {
  std::string row_title;
  std::string col_title;
  std::array<std::string, 2> row_names;
  std::array<std::string, 2> col_names;
  std::array<std::array<std::size_t, 2>, 2> counts{};

  std::size_t total() const;
};

/// Human rows vs machine rows. A group member with a missing response
/// counts as not stumped.
StumpContingency stump_contingency(const ResponseMatrix& matrix);

/// Two explicit groups of subject ids.
StumpContingency stump_contingency(const ResponseMatrix& matrix, const std::vector<std::string>& rows,
                                   const std::vector<std::string>& cols, std::string row_title,
                                   std::string col_title);

/// Two named subjects; questions either subject skipped are not tallied.
StumpContingency stump_contingency_pair(const ResponseMatrix& matrix, const std::string& row_subject,
                                        const std::string& col_subject);

std::string render_counts(const StumpContingency& table);
std::string render_percentages(const StumpContingency& table);

struct TacticProfile {
  std::vector<double> bucket_edges;        // buckets + 1 ascending edges
  std::vector<std::size_t> population;     // questions per bucket
  std::map<AdversarialTactic, std::vector<std::size_t>> counts;  // per tactic, per bucket
};

/// Equal-width discriminability buckets over the observed [min, max] range of
/// the annotated questions; the maximum falls in the last bucket.
TacticProfile tactic_discriminability_profile(
    const std::map<std::string, std::set<AdversarialTactic>>& annotations,
    const irt::IrtParameters& params, std::size_t buckets);

std::string render_profile(const TacticProfile& profile);

}  // namespace stumpforge::scoring
