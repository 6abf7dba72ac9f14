#pragma once

#include "stumpforge/domain.hpp"
#include "stumpforge/retrieval.hpp"

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace stumpforge::gateway {

struct AnswerRequest {
  std::string question;
  std::optional<std::string> context;
};

struct AnswerResponse {
  std::string answer;  // empty = no answer
  std::optional<double> confidence;
  std::optional<std::string> explanation;
  std::optional<retrieval::EvidenceHit> evidence;
};

/// Something that answers questions. Implementations must be safe to call
/// from several threads at once.
class Answerer {
 public:
  virtual ~Answerer() = default;
  virtual const std::string& id() const = 0;
  virtual AnswerResponse answer(const AnswerRequest& request) const = 0;
};

enum class AnswererKind { RetrievalBaseline, Remote };

struct AnswererDescriptor {
  std::string id;
  AnswererKind kind = AnswererKind::RetrievalBaseline;
  std::string endpoint;  // Remote only, e.g. http://127.0.0.1:9000
  std::chrono::milliseconds timeout{10'000};
  std::string display_name;

  void validate() const;
};

/// The in-process TF-IDF reader: answers with the top document's title.
class RetrievalAnswerer final : public Answerer {
 public:
  RetrievalAnswerer(std::string id, std::shared_ptr<const retrieval::InvertedIndex> index);
  const std::string& id() const override { return id_; }
  AnswerResponse answer(const AnswerRequest& request) const override;

 private:
  std::string id_;
  std::shared_ptr<const retrieval::InvertedIndex> index_;
};

/// Speaks the remote answerer protocol: POST <endpoint>/answer with
/// {"question", "context"?} -> {"answer", "confidence"?, "explanation"?}.
/// Transport failures and 5xx responses are retried twice with exponential
/// backoff; other failures throw immediately.
class RemoteAnswerer final : public Answerer {
 public:
  explicit RemoteAnswerer(AnswererDescriptor descriptor,
                          std::chrono::milliseconds backoff = std::chrono::milliseconds(100));
  const std::string& id() const override { return descriptor_.id; }
  AnswerResponse answer(const AnswerRequest& request) const override;

  static constexpr int kRetries = 2;

 private:
  AnswererDescriptor descriptor_;
  std::chrono::milliseconds backoff_;
};

/// Wraps a callable; used for scripted answerers.
class FunctionAnswerer final : public Answerer {
 public:
  using Fn = std::function<AnswerResponse(const AnswerRequest&)>;
  FunctionAnswerer(std::string id, Fn fn) : id_(std::move(id)), fn_(std::move(fn)) {}
  const std::string& id() const override { return id_; }
  AnswerResponse answer(const AnswerRequest& request) const override { return fn_(request); }

 private:
  std::string id_;
  Fn fn_;
};

/// Thread-safe id -> answerer map; reads take a shared lock.
class AnswererRegistry {
 public:
  void add(std::shared_ptr<const Answerer> answerer);
  std::vector<std::shared_ptr<const Answerer>> list() const;
  std::shared_ptr<const Answerer> find(const std::string& id) const;
  std::size_t size() const;

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<const Answerer>> answerers_;
};

std::shared_ptr<const Answerer> make_answerer(
    const AnswererDescriptor& descriptor, std::shared_ptr<const retrieval::InvertedIndex> index);

struct Prediction {
  std::string answerer_id;
  std::string answer;
  std::optional<double> confidence;
  std::optional<retrieval::EvidenceHit> evidence;
  std::optional<std::string> explanation;
  bool fooled = true;
  bool timed_out = false;
  std::optional<std::string> error;
};

/// fooled is derived from is_correct here and nowhere else.
Prediction make_prediction(const std::string& answerer_id, AnswerResponse response,
                           const Question& question);

/// Queries the answerer unless the text has no word tokens, in which case
/// the result is the no-answer response.
AnswerResponse ask(const Answerer& answerer, const std::string& text);

/// Fans out to every answerer concurrently; answerers that miss the
/// deadline or throw become error entries. Output order follows input order.
std::vector<Prediction> predict_all(const Question& question,
                                    const std::vector<std::shared_ptr<const Answerer>>& answerers,
                                    std::chrono::milliseconds deadline = std::chrono::seconds(15));

struct TokenImportance {
  std::vector<std::string> tokens;  // surface forms, in question order
  std::vector<double> importance;   // >= 0, max is 1 when any is positive
};

/// Leave-one-out perturbation: each token is dropped in turn and the
/// answerer re-queried. Importance is 1 when correctness flips, otherwise
/// the drop in confidence on a still-correct answer (floored at 0).
/// Throws HighlightUnavailableError when the answerer fails.
TokenImportance token_importance(const Question& question,
                                 std::shared_ptr<const Answerer> answerer);

/// Question text with the byte range [begin, end) removed.
std::string without_span(const std::string& text, std::size_t begin, std::size_t end);

struct EvidenceVerdict {
  std::string question_id;
  std::string system_id;
  bool judge_said_helpful = false;
  bool answer_correct = false;
};

/// 0 = unhelpful + incorrect, 1 = helpful + correct, 2 = helpful + incorrect.
/// Unhelpful + correct is not defined by the rubric and maps to 1.
int rubric_score(bool helpful, bool correct);
bool is_rubric_anomaly(bool helpful, bool correct);

struct EvidenceUtility {
  std::vector<std::string> systems;  // requested systems, then first-appearance order
  std::map<std::string, std::optional<double>> mean;
  std::map<std::string, std::size_t> count;
  std::map<std::string, std::size_t> anomalies;
};

/// `systems` lists systems to report even when they have no verdicts.
EvidenceUtility evidence_utility(const std::vector<EvidenceVerdict>& verdicts,
                                 const std::vector<std::string>& systems = {});

/// "baseline: 0.22, dense: 0.32" plus a line naming the most stump-helpful
/// system. Systems without verdicts render as "n/a".
std::string render_evidence_utility(const EvidenceUtility& utility);

}  // namespace stumpforge::gateway
