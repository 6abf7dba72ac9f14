#include "stumpforge/scoring.hpp"

#include "stumpforge/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>

namespace stumpforge::scoring {

namespace {

void require_non_empty(const QuestionSet& set) {
  if (set.question_ids.empty())
    throw ValidationError("question set for author " + set.author_id + " is empty");
}

std::size_t dual_index(const irt::DualDifficulty& dual, const std::string& id) {
  auto j = dual.index(id);
  if (!j) throw NotFoundError("question " + id + " has no dual difficulty");
  return *j;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string pad_left(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

std::string whole_percent(double pct) {
  return std::to_string(static_cast<long long>(std::llround(pct))) + "%";
}

std::string render_table(const StumpContingency& t, const std::function<std::string(std::size_t)>& cell) {
  constexpr std::size_t kTitle = 10, kName = 12, kCell = 10;
  std::ostringstream out;
  out << pad("", kTitle + kName) << t.col_title << '\n';
  out << pad("", kTitle + kName) << pad_left(t.col_names[0], kCell) << pad_left(t.col_names[1], kCell)
      << '\n';
  for (std::size_t r = 0; r < 2; ++r) {
    out << pad(r == 0 ? t.row_title : "", kTitle) << pad(t.row_names[r], kName)
        << pad_left(cell(t.counts[r][0]), kCell) << pad_left(cell(t.counts[r][1]), kCell) << '\n';
  }
  return out.str();
}

// Index 0 when every listed subject got the question wrong.
std::size_t group_state(const ResponseMatrix& m, const std::vector<std::size_t>& rows, std::size_t q) {
  for (std::size_t r : rows) {
    auto cell = m.at(r, q);
    if (!cell.has_value() || *cell) return 1;
  }
  return 0;
}

std::vector<std::size_t> rows_for(const ResponseMatrix& m, const std::vector<std::string>& ids) {
  if (ids.empty()) throw ValidationError("contingency group is empty");
  std::vector<std::size_t> rows;
  for (const auto& id : ids) {
    auto i = m.subject_index(id);
    if (!i) throw NotFoundError("unknown subject id: " + id);
    rows.push_back(*i);
  }
  return rows;
}

}  // namespace

std::vector<QuestionSet> sets_by_author(const std::vector<Question>& questions) {
  std::map<std::string, QuestionSet> by_author;
  for (const auto& q : questions) {
    auto& set = by_author[q.author_id];
    set.author_id = q.author_id;
    set.question_ids.push_back(q.id);
  }
  std::vector<QuestionSet> out;
  for (auto& [_, set] : by_author) out.push_back(std::move(set));
  return out;
}

double margin(const QuestionSet& set, const irt::DualDifficulty& dual) {
  require_non_empty(set);
  double sum = 0.0;
  for (const auto& id : set.question_ids) {
    const std::size_t j = dual_index(dual, id);
    sum += std::abs(dual.human[j] - dual.machine[j]);
  }
  return sum / static_cast<double>(set.question_ids.size());
}

double aggregate_discriminability(const QuestionSet& set, const irt::IrtParameters& params) {
  require_non_empty(set);
  double sum = 0.0;
  for (const auto& id : set.question_ids) {
    auto g = params.discriminability(id);
    if (!g) throw NotFoundError("question " + id + " has no fitted discriminability");
    sum += *g;
  }
  return sum / static_cast<double>(set.question_ids.size());
}

double median(std::vector<double> v) {
  if (v.empty()) throw ValidationError("median of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

double difficulty_spread(const QuestionSet& set, const irt::DualDifficulty& dual) {
  require_non_empty(set);
  std::vector<double> human;
  for (const auto& id : set.question_ids) human.push_back(dual.human[dual_index(dual, id)]);
  const double center = median(human);
  for (double& h : human) h = std::abs(h - center);
  return median(std::move(human));
}

std::vector<double> standardize(const std::vector<double>& values) {
  if (values.size() < 2) throw ValidationError("standardization needs at least two authors");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / n);
  if (!(sd > 0.0)) throw ValidationError("standardization: zero variance across authors");
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) out.push_back((v - mean) / sd);
  return out;
}

std::vector<AuthorMetrics> score(const std::vector<QuestionSet>& sets, const irt::DualDifficulty& dual,
                                 const irt::IrtParameters& params) {
  if (sets.size() < 2) throw ValidationError("scoring needs at least two authors");
  std::vector<AuthorMetrics> out(sets.size());
  std::vector<double> mu, kappa, delta;
  for (std::size_t a = 0; a < sets.size(); ++a) {
    out[a].author_id = sets[a].author_id;
    out[a].question_count = sets[a].question_ids.size();
    out[a].raw_margin = margin(sets[a], dual);
    out[a].raw_discriminability = aggregate_discriminability(sets[a], params);
    out[a].raw_spread = difficulty_spread(sets[a], dual);
    mu.push_back(out[a].raw_margin);
    kappa.push_back(out[a].raw_discriminability);
    delta.push_back(out[a].raw_spread);
  }
  const auto smu = standardize(mu);
  const auto skappa = standardize(kappa);
  const auto sdelta = standardize(delta);
  for (std::size_t a = 0; a < sets.size(); ++a) {
    out[a].std_margin = smu[a];
    out[a].std_discriminability = skappa[a];
    out[a].std_spread = sdelta[a];
    out[a].score = static_cast<double>(out[a].question_count) *
                   (smu[a] + skappa[a] + sdelta[a]) / 3.0;
  }
  return out;
}

std::vector<std::size_t> ranking(const std::vector<AuthorMetrics>& metrics) {
  std::vector<std::size_t> order(metrics.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (metrics[a].score != metrics[b].score) return metrics[a].score > metrics[b].score;
    return metrics[a].author_id < metrics[b].author_id;
  });
  return order;
}

std::string best_answerer(const irt::IrtParameters& params) {
  if (params.subject_ids.empty()) throw ValidationError("no subjects to award");
  std::size_t best = 0;
  for (std::size_t i = 1; i < params.subject_ids.size(); ++i) {
    if (params.skills[i] > params.skills[best] ||
        (params.skills[i] == params.skills[best] && params.subject_ids[i] < params.subject_ids[best]))
      best = i;
  }
  return params.subject_ids[best];
}

std::string_view to_string(QuadrantLabel label) {
  switch (label) {
    case QuadrantLabel::StumpsOnlyMachines: return "StumpsOnlyMachines";
    case QuadrantLabel::StumpsBoth: return "StumpsBoth";
    case QuadrantLabel::StumpsOnlyHumans: return "StumpsOnlyHumans";
    case QuadrantLabel::Easy: return "Easy";
  }
  return "?";
}

QuadrantLabel classify(double human, double machine, double t) {
  const bool humans_stumped = human > t;
  const bool machines_stumped = machine > t;
  if (machines_stumped && humans_stumped) return QuadrantLabel::StumpsBoth;
  if (machines_stumped) return QuadrantLabel::StumpsOnlyMachines;
  if (humans_stumped) return QuadrantLabel::StumpsOnlyHumans;
  return QuadrantLabel::Easy;
}

QuadrantReport quadrant_report_from_labels(std::vector<std::string> ids,
                                           std::vector<QuadrantLabel> labels, double threshold) {
  QuadrantReport r;
  r.threshold = threshold;
  r.question_ids = std::move(ids);
  r.labels = std::move(labels);
  for (auto l : r.labels) ++r.counts[static_cast<std::size_t>(l)];
  if (!r.labels.empty())
    for (std::size_t k = 0; k < 4; ++k)
      r.shares[k] = 100.0 * static_cast<double>(r.counts[k]) / static_cast<double>(r.labels.size());
  return r;
}

QuadrantReport quadrants(const irt::DualDifficulty& dual, double threshold) {
  std::vector<QuadrantLabel> labels;
  labels.reserve(dual.question_ids.size());
  for (std::size_t j = 0; j < dual.question_ids.size(); ++j)
    labels.push_back(classify(dual.human[j], dual.machine[j], threshold));
  return quadrant_report_from_labels(dual.question_ids, std::move(labels), threshold);
}

std::string render_quadrants(const QuadrantReport& r) {
  std::ostringstream out;
  out << pad("cluster", 20) << pad_left("questions", 10) << pad_left("share", 8) << '\n';
  for (std::size_t k = 0; k < 4; ++k) {
    out << pad(std::string(to_string(static_cast<QuadrantLabel>(k))), 20)
        << pad_left(std::to_string(r.counts[k]), 10) << pad_left(whole_percent(r.shares[k]), 8) << '\n';
  }
  return out.str();
}

std::size_t StumpContingency::total() const {
  return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
}

StumpContingency stump_contingency(const ResponseMatrix& matrix, const std::vector<std::string>& rows,
                                   const std::vector<std::string>& cols, std::string row_title,
                                   std::string col_title) {
  const auto row_idx = rows_for(matrix, rows);
  const auto col_idx = rows_for(matrix, cols);
  StumpContingency t;
  t.row_title = std::move(row_title);
  t.col_title = std::move(col_title);
  t.row_names = {"All", "Some"};
  t.col_names = {"All", "Some"};
  for (std::size_t q = 0; q < matrix.question_count(); ++q)
    ++t.counts[group_state(matrix, row_idx, q)][group_state(matrix, col_idx, q)];
  return t;
}

StumpContingency stump_contingency(const ResponseMatrix& matrix) {
  std::vector<std::string> humans, machines;
  for (const auto& s : matrix.subjects())
    (s.kind == SubjectKind::Human ? humans : machines).push_back(s.id);
  return stump_contingency(matrix, humans, machines, "Human", "Machine");
}

StumpContingency stump_contingency_pair(const ResponseMatrix& matrix, const std::string& row_subject,
                                        const std::string& col_subject) {
  const std::size_t r = rows_for(matrix, {row_subject})[0];
  const std::size_t c = rows_for(matrix, {col_subject})[0];
  StumpContingency t;
  t.row_title = row_subject;
  t.col_title = col_subject;
  t.row_names = {"Correct", "Incorrect"};
  t.col_names = {"Correct", "Incorrect"};
  for (std::size_t q = 0; q < matrix.question_count(); ++q) {
    auto a = matrix.at(r, q);
    auto b = matrix.at(c, q);
    if (!a || !b) continue;
    ++t.counts[*a ? 0 : 1][*b ? 0 : 1];
  }
  return t;
}

std::string render_counts(const StumpContingency& t) {
  return render_table(t, [](std::size_t n) { return std::to_string(n); });
}

std::string render_percentages(const StumpContingency& t) {
  const double total = static_cast<double>(t.total());
  return render_table(t, [total](std::size_t n) {
    return whole_percent(total > 0.0 ? 100.0 * static_cast<double>(n) / total : 0.0);
  });
}

TacticProfile tactic_discriminability_profile(
    const std::map<std::string, std::set<AdversarialTactic>>& annotations,
    const irt::IrtParameters& params, std::size_t buckets) {
  if (buckets == 0) throw ValidationError("bucket count must be >= 1");
  std::vector<std::pair<double, const std::set<AdversarialTactic>*>> rows;
  for (const auto& [qid, tactics] : annotations) {
    auto g = params.discriminability(qid);
    if (!g) throw NotFoundError("question " + qid + " has no fitted discriminability");
    rows.emplace_back(*g, &tactics);
  }

  TacticProfile p;
  p.population.assign(buckets, 0);
  if (rows.empty()) {
    p.bucket_edges.assign(buckets + 1, 0.0);
    return p;
  }
  const auto [lo_it, hi_it] = std::minmax_element(rows.begin(), rows.end());
  const double lo = lo_it->first;
  const double hi = hi_it->first;
  const double width = (hi - lo) / static_cast<double>(buckets);
  for (std::size_t b = 0; b <= buckets; ++b) p.bucket_edges.push_back(lo + width * static_cast<double>(b));
  p.bucket_edges.back() = hi;

  for (const auto& [g, tactics] : rows) {
    std::size_t b = width > 0.0 ? static_cast<std::size_t>((g - lo) / width) : buckets - 1;
    b = std::min(b, buckets - 1);
    ++p.population[b];
    for (auto t : *tactics) {
      auto& v = p.counts[t];
      if (v.empty()) v.assign(buckets, 0);
      ++v[b];
    }
  }
  return p;
}

std::string render_profile(const TacticProfile& p) {
  std::ostringstream out;
  out << pad("tactic", 24);
  for (std::size_t b = 0; b + 1 < p.bucket_edges.size(); ++b) {
    char label[32];
    std::snprintf(label, sizeof label, "%.2f-%.2f", p.bucket_edges[b], p.bucket_edges[b + 1]);
    out << pad_left(label, 12);
  }
  out << '\n' << pad("(questions)", 24);
  for (auto n : p.population) out << pad_left(std::to_string(n), 12);
  out << '\n';
  for (const auto& [t, counts] : p.counts) {
    out << pad(std::string(to_string(t)), 24);
    for (auto n : counts) out << pad_left(std::to_string(n), 12);
    out << '\n';
  }
  return out.str();
}

}  // namespace stumpforge::scoring
