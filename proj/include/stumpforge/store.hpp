#pragma once

#include "stumpforge/annotations.hpp"
#include "stumpforge/domain.hpp"
#include "stumpforge/domain_io.hpp"
#include "stumpforge/gateway.hpp"
#include "stumpforge/scoring.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace stumpforge::store {

inline constexpr int kSchemaVersion = 1;

using Quotas = std::map<TopicCategory, std::size_t>;

/// Parses {"History": 2, ...}; throws on unknown category labels.
Quotas quotas_from_json(const json& j);

struct Packet {
  std::string author_id;
  std::vector<std::string> question_ids;
  Quotas quotas;
};

struct QuotaViolation {
  TopicCategory category;
  std::size_t want = 0;
  std::size_t have = 0;
  friend bool operator==(const QuotaViolation&, const QuotaViolation&) = default;
};

/// Every category whose count in the packet differs from its quota
/// (categories absent from `quotas` have quota 0).
std::vector<QuotaViolation> validate_packet(const Packet& packet,
                                            const std::map<std::string, Question>& questions,
                                            const Quotas& quotas);

struct StoredPrediction {
  std::string question_id;
  std::string answerer_id;
  std::string answer;
  bool fooled = true;
};

/// Materialized competition; a pure fold over the event log.
struct CompetitionState {
  std::uint64_t version = 0;
  std::vector<std::string> question_order;
  std::map<std::string, Question> questions;
  std::vector<std::string> subject_order;
  std::map<std::string, Subject> subjects;
  std::vector<Packet> packets;
  std::vector<ResponseRecord> responses;
  std::set<std::pair<std::string, std::string>> answered;  // (subject, question)
  std::map<std::string, Annotation> annotations;
  std::map<std::string, std::map<std::string, StoredPrediction>> predictions;  // question -> answerer
  std::set<std::string> rounds;
  std::vector<gateway::EvidenceVerdict> verdicts;

  ResponseMatrix matrix() const;
  std::vector<Question> question_list() const;
  json to_json() const;
  static CompetitionState from_json(const json& j);
  /// FNV-1a 64 over the canonical JSON dump, as 16 hex digits.
  std::string hash() const;
};

/// Applies one event; throws (leaving `state` untouched) when it is invalid.
void apply(CompetitionState& state, const json& event);

json annotation_to_json(const Annotation& a);
json verdict_to_json(const gateway::EvidenceVerdict& v);
gateway::EvidenceVerdict verdict_from_json(const json& j);
Annotation annotation_from_json(const json& j);

/// Single-writer store backed by events.jsonl plus snapshot.json in `dir`.
/// Readers take immutable snapshots; writers are serialized. An empty
/// directory path keeps everything in memory.
class CompetitionStore {
 public:
  CompetitionStore() = default;
  explicit CompetitionStore(std::filesystem::path dir, std::size_t snapshot_every = 50);

  std::shared_ptr<const CompetitionState> snapshot() const;
  std::uint64_t version() const { return snapshot()->version; }

  std::uint64_t register_question(const Question& q);
  std::uint64_t register_subject(const Subject& s);
  /// Throws ValidationError listing violations when quotas are not met.
  std::uint64_t submit_packet(const Packet& packet);
  std::uint64_t record_responses(const std::vector<ResponseRecord>& records);
  /// Empty sets clear the annotation.
  std::uint64_t annotate(const std::string& question_id, const std::set<QuestionFlaw>& flaws,
                         const std::set<AdversarialTactic>& tactics);
  std::uint64_t store_prediction(const std::string& question_id, const gateway::Prediction& p);
  std::uint64_t record_verdicts(const std::vector<gateway::EvidenceVerdict>& verdicts);

  void write_snapshot() const;

  /// Folds events.jsonl from byte zero.
  static CompetitionState replay(const std::filesystem::path& events_file);

  std::filesystem::path events_path() const { return dir_ / "events.jsonl"; }
  std::filesystem::path snapshot_path() const { return dir_ / "snapshot.json"; }

 private:
  std::uint64_t commit(json event);

  std::filesystem::path dir_;
  std::size_t snapshot_every_ = 50;
  mutable std::mutex write_mutex_;
  mutable std::mutex read_mutex_;
  std::shared_ptr<const CompetitionState> current_ = std::make_shared<CompetitionState>();
};

struct WriterLeaderboardEntry {
  std::string author_id;
  std::map<TopicCategory, std::size_t> category_counts;
  double score = 0.0;
  std::optional<double> diversity;  // tau; absent when no entities
  std::size_t rank = 0;
};

std::vector<WriterLeaderboardEntry> writer_leaderboard(
    const CompetitionState& state, const std::vector<scoring::AuthorMetrics>& scores,
    const std::map<std::string, std::optional<double>>& diversity);

struct MachineLeaderboardEntry {
  std::string question_id;
  std::string author_id;
  std::map<std::string, bool> stumped;  // answerer -> fooled
};

std::vector<MachineLeaderboardEntry> machine_leaderboard(const CompetitionState& state);

}  // namespace stumpforge::store
