#include "stumpforge/gateway.hpp"

#include "stumpforge/domain_io.hpp"
#include "stumpforge/error.hpp"
#include "stumpforge/text.hpp"

#include <httplib.h>

#include <algorithm>
#include <condition_variable>
#include <cstdio>
#include <future>
#include <mutex>
#include <sstream>
#include <thread>

namespace stumpforge::gateway {

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string base_path;
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ValidationError("endpoint must be an absolute URL: " + url);
  const auto path = url.find('/', scheme + 3);
  if (path == std::string::npos) return {url, ""};
  std::string base = url.substr(path);
  while (!base.empty() && base.back() == '/') base.pop_back();
  return {url.substr(0, path), base};
}

// Result slot shared between a detached worker and the waiting caller, so
// the caller can walk away at the deadline without joining.
struct Slot {
  std::mutex mutex;
  std::condition_variable cv;
  bool done = false;
  std::optional<AnswerResponse> response;
  std::string error;
};

std::shared_ptr<Slot> launch(std::shared_ptr<const Answerer> answerer, std::string text) {
  auto slot = std::make_shared<Slot>();
  std::thread([slot, answerer = std::move(answerer), text = std::move(text)] {
    std::optional<AnswerResponse> response;
    std::string error;
    try {
      response = ask(*answerer, text);
    } catch (const std::exception& e) {
      error = e.what();
      if (error.empty()) error = "answerer failed";
    } catch (...) {
      error = "answerer failed";
    }
    std::lock_guard lock(slot->mutex);
    slot->response = std::move(response);
    slot->error = std::move(error);
    slot->done = true;
    slot->cv.notify_all();
  }).detach();
  return slot;
}

}  // namespace

void AnswererDescriptor::validate() const {
  if (id.empty()) throw ValidationError("answerer id is empty");
  if (kind == AnswererKind::Remote && endpoint.empty())
    throw ValidationError("remote answerer " + id + " needs an endpoint");
  if (timeout.count() <= 0) throw ValidationError("answerer " + id + " timeout must be positive");
}

RetrievalAnswerer::RetrievalAnswerer(std::string id, std::shared_ptr<const retrieval::InvertedIndex> index)
    : id_(std::move(id)), index_(std::move(index)) {
  if (!index_) throw ValidationError("retrieval answerer needs an index");
}

AnswerResponse RetrievalAnswerer::answer(const AnswerRequest& request) const {
  auto extracted = retrieval::extract_answer(*index_, request.question);
  AnswerResponse r;
  if (extracted.answer) {
    r.answer = *extracted.answer;
    r.confidence = extracted.evidence->score;
    r.evidence = std::move(extracted.evidence);
  }
  return r;
}

RemoteAnswerer::RemoteAnswerer(AnswererDescriptor descriptor, std::chrono::milliseconds backoff)
    : descriptor_(std::move(descriptor)), backoff_(backoff) {
  descriptor_.validate();
  split_endpoint(descriptor_.endpoint);
}

AnswerResponse RemoteAnswerer::answer(const AnswerRequest& request) const {
  const Endpoint ep = split_endpoint(descriptor_.endpoint);
  json body = {{"question", request.question}};
  if (request.context) body["context"] = *request.context;
  const std::string payload = body.dump();

  std::string last_error;
  for (int attempt = 0; attempt <= kRetries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(backoff_ * (1 << (attempt - 1)));
    httplib::Client client(ep.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(descriptor_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(descriptor_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    auto res = client.Post(ep.base_path + "/answer", payload, "application/json");
    if (!res) {
      last_error = descriptor_.id + ": " + httplib::to_string(res.error());
      continue;
    }
    json reply;
    try {
      reply = json::parse(res->body);
    } catch (const json::parse_error&) {
      reply = json::object();
    }
    if (res->status >= 500) {
      last_error = descriptor_.id + ": HTTP " + std::to_string(res->status);
      if (reply.is_object() && reply.contains("error") && reply["error"].is_string())
        last_error += ": " + reply["error"].get<std::string>();
      continue;
    }
    if (res->status != 200) {
      std::string msg = descriptor_.id + ": HTTP " + std::to_string(res->status);
      if (reply.is_object() && reply.contains("error") && reply["error"].is_string())
        msg += ": " + reply["error"].get<std::string>();
      throw std::runtime_error(msg);
    }
    if (!reply.is_object() || !reply.contains("answer") || !reply["answer"].is_string())
      throw std::runtime_error(descriptor_.id + ": malformed answer payload");
    AnswerResponse out;
    out.answer = reply["answer"].get<std::string>();
    if (reply.contains("confidence") && reply["confidence"].is_number())
      out.confidence = std::clamp(reply["confidence"].get<double>(), 0.0, 1.0);
    if (reply.contains("explanation") && reply["explanation"].is_string())
      out.explanation = reply["explanation"].get<std::string>();
    return out;
  }
  throw std::runtime_error(last_error);
}

void AnswererRegistry::add(std::shared_ptr<const Answerer> answerer) {
  if (!answerer) throw ValidationError("null answerer");
  std::unique_lock lock(mutex_);
  if (!answerers_.emplace(answerer->id(), answerer).second)
    throw DuplicateError("duplicate answerer id: " + answerer->id());
}

std::vector<std::shared_ptr<const Answerer>> AnswererRegistry::list() const {
  std::shared_lock lock(mutex_);
  std::vector<std::shared_ptr<const Answerer>> out;
  for (const auto& [_, a] : answerers_) out.push_back(a);
  return out;
}

std::shared_ptr<const Answerer> AnswererRegistry::find(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = answerers_.find(id);
  return it == answerers_.end() ? nullptr : it->second;
}

std::size_t AnswererRegistry::size() const {
  std::shared_lock lock(mutex_);
  return answerers_.size();
}

std::shared_ptr<const Answerer> make_answerer(const AnswererDescriptor& descriptor,
                                              std::shared_ptr<const retrieval::InvertedIndex> index) {
  descriptor.validate();
  if (descriptor.kind == AnswererKind::Remote) return std::make_shared<RemoteAnswerer>(descriptor);
  return std::make_shared<RetrievalAnswerer>(descriptor.id, std::move(index));
}

Prediction make_prediction(const std::string& answerer_id, AnswerResponse response,
                           const Question& question) {
  Prediction p;
  p.answerer_id = answerer_id;
  p.answer = std::move(response.answer);
  p.confidence = response.confidence;
  p.evidence = std::move(response.evidence);
  p.explanation = std::move(response.explanation);
  p.fooled = !is_correct(p.answer, question);
  return p;
}

AnswerResponse ask(const Answerer& answerer, const std::string& text) {
  if (tokenize(text).empty()) return {};
  return answerer.answer({text, std::nullopt});
}

std::vector<Prediction> predict_all(const Question& question,
                                    const std::vector<std::shared_ptr<const Answerer>>& answerers,
                                    std::chrono::milliseconds deadline) {
  const auto until = std::chrono::steady_clock::now() + deadline;
  std::vector<std::shared_ptr<Slot>> slots;
  slots.reserve(answerers.size());
  for (const auto& a : answerers) slots.push_back(launch(a, question.text));

  std::vector<Prediction> out;
  out.reserve(answerers.size());
  for (std::size_t k = 0; k < answerers.size(); ++k) {
    auto& slot = *slots[k];
    std::unique_lock lock(slot.mutex);
    const bool done = slot.cv.wait_until(lock, until, [&] { return slot.done; });
    if (done && slot.response) {
      out.push_back(make_prediction(answerers[k]->id(), std::move(*slot.response), question));
      continue;
    }
    Prediction p = make_prediction(answerers[k]->id(), {}, question);
    if (!done) {
      p.timed_out = true;
      p.error = "timed out";
    } else {
      p.error = slot.error;
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::string without_span(const std::string& text, std::size_t begin, std::size_t end) {
  return text.substr(0, begin) + text.substr(end);
}

TokenImportance token_importance(const Question& question, std::shared_ptr<const Answerer> answerer) {
  const auto tokens = tokenize(question.text);
  if (tokens.empty()) throw ValidationError("question has no tokens to highlight");

  auto run = [&](const std::string& text) {
    return std::async(std::launch::async, [answerer, text] { return ask(*answerer, text); });
  };

  std::vector<std::future<AnswerResponse>> futures;
  futures.push_back(run(question.text));
  for (const auto& t : tokens) futures.push_back(run(without_span(question.text, t.begin, t.end)));

  std::vector<AnswerResponse> responses;
  std::string failure;
  for (auto& f : futures) {
    try {
      responses.push_back(f.get());
    } catch (const std::exception& e) {
      if (failure.empty()) failure = e.what();
      responses.emplace_back();
    }
  }
  if (!failure.empty()) throw HighlightUnavailableError("highlight unavailable: " + failure);

  const AnswerResponse& base = responses.front();
  const bool base_correct = is_correct(base.answer, question);

  TokenImportance out;
  double max_value = 0.0;
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    const AnswerResponse& r = responses[k + 1];
    const bool correct = is_correct(r.answer, question);
    double value = 0.0;
    if (correct != base_correct) {
      value = 1.0;
    } else if (correct && base.confidence && r.confidence) {
      value = std::max(0.0, *base.confidence - *r.confidence);
    }
    out.tokens.push_back(question.text.substr(tokens[k].begin, tokens[k].end - tokens[k].begin));
    out.importance.push_back(value);
    max_value = std::max(max_value, value);
  }
  if (max_value > 0.0)
    for (double& v : out.importance) v /= max_value;
  return out;
}

int rubric_score(bool helpful, bool correct) {
  if (helpful) return correct ? 1 : 2;
  return correct ? 1 : 0;
}

bool is_rubric_anomaly(bool helpful, bool correct) { return !helpful && correct; }

EvidenceUtility evidence_utility(const std::vector<EvidenceVerdict>& verdicts,
                                 const std::vector<std::string>& systems) {
  EvidenceUtility u;
  auto note = [&](const std::string& s) {
    if (std::find(u.systems.begin(), u.systems.end(), s) == u.systems.end()) {
      u.systems.push_back(s);
      u.mean[s] = std::nullopt;
      u.count[s] = 0;
      u.anomalies[s] = 0;
    }
  };
  for (const auto& s : systems) note(s);
  std::map<std::string, double> sums;
  for (const auto& v : verdicts) {
    note(v.system_id);
    sums[v.system_id] += rubric_score(v.judge_said_helpful, v.answer_correct);
    ++u.count[v.system_id];
    if (is_rubric_anomaly(v.judge_said_helpful, v.answer_correct)) ++u.anomalies[v.system_id];
  }
  for (const auto& s : u.systems)
    if (u.count[s] > 0) u.mean[s] = sums[s] / static_cast<double>(u.count[s]);
  return u;
}

std::string render_evidence_utility(const EvidenceUtility& u) {
  std::ostringstream out;
  std::optional<std::string> best;
  for (std::size_t k = 0; k < u.systems.size(); ++k) {
    const auto& s = u.systems[k];
    if (k > 0) out << ", ";
    out << s << ": ";
    const auto& m = u.mean.at(s);
    if (m) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f", *m);
      out << buf;
      if (!best || *m > *u.mean.at(*best)) best = s;
    } else {
      out << "n/a";
    }
  }
  out << '\n';
  if (best) out << "most stump-helpful evidence: " << *best << '\n';
  std::size_t anomalies = 0;
  for (const auto& [_, n] : u.anomalies) anomalies += n;
  if (anomalies > 0) out << "unhelpful+correct verdicts (scored 1): " << anomalies << '\n';
  return out.str();
}

}  // namespace stumpforge::gateway
