#pragma once

#include "stumpforge/config.hpp"
#include "stumpforge/diversity.hpp"
#include "stumpforge/domain_io.hpp"
#include "stumpforge/fit_report.hpp"
#include "stumpforge/gateway.hpp"
#include "stumpforge/retrieval.hpp"
#include "stumpforge/store.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace stumpforge::service {

inline constexpr int kSchemaVersion = 1;

struct Response {
  int status = 200;
  json body;
};

/// The fit the analysis endpoints read from, plus the inputs that produced it.
struct FitSnapshot {
  std::uint64_t fit_version = 0;
  json report;
  LoadedFit fit;
  ResponseMatrix matrix;
  std::vector<Question> questions;  // authorship for scoring
};

/// Routes requests to the modules. `handle` is transport-free so it can be
/// driven directly; `mount` exposes the same routes over HTTP.
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  void set_index(std::shared_ptr<const retrieval::InvertedIndex> index);
  void set_diversity(diversity::Gazetteer gazetteer, diversity::CountryDistribution reference);
  void add_answerer(std::shared_ptr<const gateway::Answerer> answerer);
  /// Answerer probed for token highlights; defaults to the retrieval reader.
  void set_highlight_answerer(std::shared_ptr<const gateway::Answerer> answerer);

  store::CompetitionStore& store() { return *store_; }
  std::shared_ptr<const FitSnapshot> current_fit() const;

  Response handle(const std::string& method, const std::string& path,
                  const std::map<std::string, std::string>& query, const std::string& body);

  void mount(httplib::Server& server);

  /// Joins every background fit started so far.
  void wait_for_jobs();

 private:
  struct Job {
    std::string status = "running";  // running | done | failed
    json result;
    std::string error;
  };

  Response evaluate_draft(const std::string& body);
  Response start_fit(const std::string& body);
  Response job_status(const std::string& id);
  Response scores();
  Response writer_leaderboard();
  Response machine_leaderboard();
  Response quadrants(const std::map<std::string, std::string>& query);
  Response tactics(const std::map<std::string, std::string>& query);
  Response contingency(const std::map<std::string, std::string>& query);
  Response evidence_utility();
  Response state_summary();
  Response mutate(const std::string& path, const std::string& body);

  /// Runs the fit and installs it as current; returns the report body.
  json run_and_install(const ResponseMatrix& matrix, std::vector<Question> questions,
                       const irt::FitConfig& config);
  void persist(const FitSnapshot& snap) const;
  void load_persisted_fit();
  Response stamp(Response r) const;

  ServiceConfig config_;
  std::unique_ptr<store::CompetitionStore> store_;
  gateway::AnswererRegistry answerers_;

  mutable std::mutex resources_mutex_;
  std::shared_ptr<const retrieval::InvertedIndex> index_;
  std::shared_ptr<const diversity::Gazetteer> gazetteer_;
  std::shared_ptr<const diversity::CountryDistribution> reference_;
  std::shared_ptr<const gateway::Answerer> highlight_answerer_;

  mutable std::mutex fit_mutex_;
  std::shared_ptr<const FitSnapshot> fit_;
  std::uint64_t fit_counter_ = 0;

  std::mutex jobs_mutex_;
  std::map<std::string, Job> jobs_;
  std::uint64_t job_counter_ = 0;
  std::vector<std::thread> workers_;
};

/// Blocks serving HTTP on config.host:config.port.
void serve(Service& service, const std::string& host, int port);

}  // namespace stumpforge::service
