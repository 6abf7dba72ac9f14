#include "stumpforge/reports.hpp"

#include "stumpforge/error.hpp"

#include <cstdio>
#include <sstream>

namespace stumpforge::reports {

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::vector<scoring::AuthorMetrics> author_scores(const LoadedFit& fit,
                                                  const std::vector<Question>& questions) {
  if (!fit.dual) throw ValidationError("fit has no human/machine dual table");
  std::vector<Question> fitted;
  for (const auto& q : questions)
    if (fit.dual->index(q.id)) fitted.push_back(q);
  const auto sets = scoring::sets_by_author(fitted);
  if (sets.size() < 2) throw ValidationError("scoring needs at least two authors with fitted questions");
  return scoring::score(sets, *fit.dual, fit.params);
}

json to_json(const retrieval::EvidenceHit& h) {
  return {{"sentence", h.sentence}, {"doc_id", h.doc_id}, {"doc_title", h.doc_title},
          {"position", h.position}, {"score", h.score},   {"rank", h.rank}};
}

json to_json(const gateway::Prediction& p) {
  json j = {{"answerer_id", p.answerer_id},
            {"answer", p.answer},
            {"confidence", optional_number(p.confidence)},
            {"evidence", p.evidence ? to_json(*p.evidence) : json(nullptr)},
            {"explanation", p.explanation ? json(*p.explanation) : json(nullptr)},
            {"fooled", p.fooled},
            {"timed_out", p.timed_out},
            {"error", p.error ? json(*p.error) : json(nullptr)}};
  return j;
}

json to_json(const gateway::TokenImportance& t) {
  return {{"tokens", t.tokens}, {"importance", t.importance}};
}

json to_json(const diversity::DiversityDelta& d) {
  return {{"before", optional_number(d.before)},
          {"after", optional_number(d.after)},
          {"delta", optional_number(d.delta)}};
}

json scores_to_json(const std::vector<scoring::AuthorMetrics>& metrics) {
  const auto order = scoring::ranking(metrics);
  json out = json::object();
  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto& m = metrics[order[r]];
    out[m.author_id] = {
        {"raw",
         {{"margin", m.raw_margin},
          {"discriminability", m.raw_discriminability},
          {"spread", m.raw_spread}}},
        {"standardized",
         {{"margin", m.std_margin},
          {"discriminability", m.std_discriminability},
          {"spread", m.std_spread}}},
        {"question_count", m.question_count},
        {"score", m.score},
        {"rank", r + 1}};
  }
  return out;
}

std::string render_scores_table(const std::vector<scoring::AuthorMetrics>& metrics) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-5s %-16s %9s %9s %9s %9s %9s\n", "rank", "author", "questions",
                "margin", "discrim", "spread", "score");
  out << line;
  const auto order = scoring::ranking(metrics);
  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto& m = metrics[order[r]];
    std::snprintf(line, sizeof line, "%-5zu %-16s %9zu %9.4f %9.4f %9.4f %9.4f\n", r + 1,
                  m.author_id.c_str(), m.question_count, m.raw_margin, m.raw_discriminability,
                  m.raw_spread, m.score);
    out << line;
  }
  return out.str();
}

std::string render_scores_csv(const std::vector<scoring::AuthorMetrics>& metrics) {
  std::ostringstream out;
  out << "rank,author_id,question_count,margin,discriminability,spread,"
         "z_margin,z_discriminability,z_spread,score\n";
  const auto order = scoring::ranking(metrics);
  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto& m = metrics[order[r]];
    out << r + 1 << ',' << m.author_id << ',' << m.question_count << ',' << fixed(m.raw_margin, 12)
        << ',' << fixed(m.raw_discriminability, 12) << ',' << fixed(m.raw_spread, 12) << ','
        << fixed(m.std_margin, 12) << ',' << fixed(m.std_discriminability, 12) << ','
        << fixed(m.std_spread, 12) << ',' << fixed(m.score, 12) << '\n';
  }
  return out.str();
}

json to_json(const scoring::QuadrantReport& r) {
  json clusters = json::array();
  for (std::size_t k = 0; k < 4; ++k) {
    clusters.push_back({{"label", std::string(scoring::to_string(static_cast<scoring::QuadrantLabel>(k)))},
                        {"count", r.counts[k]},
                        {"share", r.shares[k]}});
  }
  json labels = json::object();
  for (std::size_t k = 0; k < r.question_ids.size(); ++k)
    labels[r.question_ids[k]] = std::string(scoring::to_string(r.labels[k]));
  return {{"threshold", r.threshold},
          {"clusters", clusters},
          {"labels", labels},
          {"table", scoring::render_quadrants(r)}};
}

json to_json(const scoring::StumpContingency& t) {
  json cells = json::array();
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 2; ++c)
      cells.push_back({{"row", t.row_names[r]}, {"col", t.col_names[c]}, {"count", t.counts[r][c]}});
  return {{"row_title", t.row_title},
          {"col_title", t.col_title},
          {"cells", cells},
          {"total", t.total()},
          {"counts_table", scoring::render_counts(t)},
          {"percent_table", scoring::render_percentages(t)}};
}

json to_json(const scoring::TacticProfile& p) {
  json counts = json::object();
  for (const auto& [tactic, per_bucket] : p.counts) counts[std::string(to_string(tactic))] = per_bucket;
  return {{"bucket_edges", p.bucket_edges},
          {"population", p.population},
          {"counts", counts},
          {"table", scoring::render_profile(p)}};
}

json to_json(const gateway::EvidenceUtility& u) {
  json systems = json::array();
  for (const auto& s : u.systems) {
    systems.push_back({{"system_id", s},
                       {"mean", optional_number(u.mean.at(s))},
                       {"count", u.count.at(s)},
                       {"anomalies", u.anomalies.at(s)}});
  }
  return {{"systems", systems}, {"text", gateway::render_evidence_utility(u)}};
}

json to_json(const std::vector<store::WriterLeaderboardEntry>& rows) {
  json out = json::array();
  for (const auto& e : rows) {
    json cats = json::object();
    for (const auto& [c, n] : e.category_counts) cats[std::string(to_string(c))] = n;
    out.push_back({{"rank", e.rank},
                   {"author_id", e.author_id},
                   {"score", e.score},
                   {"diversity", optional_number(e.diversity)},
                   {"category_counts", cats}});
  }
  return out;
}

json to_json(const std::vector<store::MachineLeaderboardEntry>& rows) {
  json out = json::array();
  for (const auto& e : rows) {
    std::size_t fooled = 0;
    for (const auto& [_, f] : e.stumped) fooled += f ? 1 : 0;
    out.push_back({{"question_id", e.question_id},
                   {"author_id", e.author_id},
                   {"stumped", e.stumped},
                   {"fooled_count", fooled}});
  }
  return out;
}

}  // namespace stumpforge::reports
