#pragma once

#include "stumpforge/diversity.hpp"
#include "stumpforge/fit_report.hpp"
#include "stumpforge/domain_io.hpp"
#include "stumpforge/gateway.hpp"
#include "stumpforge/scoring.hpp"
#include "stumpforge/store.hpp"

#include <vector>

namespace stumpforge::reports {

/// Scores every author whose questions appear in the fit's dual table;
/// questions outside it are ignored. Throws ValidationError when the fit has
/// no dual table or fewer than two authors remain.
std::vector<scoring::AuthorMetrics> author_scores(const LoadedFit& fit,
                                                  const std::vector<Question>& questions);

json to_json(const retrieval::EvidenceHit& hit);
json to_json(const gateway::Prediction& p);
json to_json(const gateway::TokenImportance& t);
json to_json(const diversity::DiversityDelta& d);

/// {author_id: {raw: {...}, standardized: {...}, question_count, score, rank}}.
json scores_to_json(const std::vector<scoring::AuthorMetrics>& metrics);
/// Ranked table followed by one row per author, as text.
std::string render_scores_table(const std::vector<scoring::AuthorMetrics>& metrics);
std::string render_scores_csv(const std::vector<scoring::AuthorMetrics>& metrics);

json to_json(const scoring::QuadrantReport& r);
json to_json(const scoring::StumpContingency& t);
json to_json(const scoring::TacticProfile& p);
json to_json(const gateway::EvidenceUtility& u);
json to_json(const std::vector<store::WriterLeaderboardEntry>& rows);
json to_json(const std::vector<store::MachineLeaderboardEntry>& rows);

}  // namespace stumpforge::reports
