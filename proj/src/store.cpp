#include "stumpforge/store.hpp"

#include "stumpforge/error.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace stumpforge::store {

namespace {

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json quotas_to_json(const Quotas& q) {
  json j = json::object();
  for (const auto& [cat, n] : q) j[std::string(to_string(cat))] = n;
  return j;
}

json packet_to_json(const Packet& p) {
  return {{"author_id", p.author_id}, {"question_ids", p.question_ids}, {"quotas", quotas_to_json(p.quotas)}};
}

Packet packet_from_json(const json& j) {
  Packet p;
  p.author_id = j.at("author_id").get<std::string>();
  p.question_ids = j.at("question_ids").get<std::vector<std::string>>();
  p.quotas = quotas_from_json(j.value("quotas", json::object()));
  return p;
}

json prediction_to_json(const StoredPrediction& p) {
  return {{"question_id", p.question_id}, {"answerer_id", p.answerer_id}, {"answer", p.answer},
          {"fooled", p.fooled}};
}

json make_event(const char* type, json payload) {
  payload["type"] = type;
  payload["schema_version"] = kSchemaVersion;
  return payload;
}

std::string describe(const std::vector<QuotaViolation>& v) {
  std::string out;
  for (const auto& x : v) {
    if (!out.empty()) out += "; ";
    out += std::string(to_string(x.category)) + ": want " + std::to_string(x.want) + ", have " +
           std::to_string(x.have);
  }
  return out;
}

void apply_unchecked(CompetitionState& s, const json& e) {
  const std::string type = e.at("type").get<std::string>();
  if (type == "QuestionRegistered") {
    Question q = question_from_json(e.at("question"));
    if (s.questions.contains(q.id)) throw DuplicateError("duplicate question id: " + q.id);
    if (q.parent_question_id && !s.questions.contains(*q.parent_question_id))
      throw NotFoundError("edited question " + q.id + " references unknown parent");
    if (!q.round_id.empty()) s.rounds.insert(q.round_id);
    s.question_order.push_back(q.id);
    s.questions.emplace(q.id, std::move(q));
  } else if (type == "SubjectRegistered") {
    Subject sub = subject_from_json(e.at("subject"));
    if (s.subjects.contains(sub.id)) throw DuplicateError("duplicate subject id: " + sub.id);
    s.subject_order.push_back(sub.id);
    s.subjects.emplace(sub.id, std::move(sub));
  } else if (type == "PacketSubmitted") {
    Packet p = packet_from_json(e.at("packet"));
    for (const auto& id : p.question_ids) {
      auto it = s.questions.find(id);
      if (it == s.questions.end()) throw NotFoundError("unknown question id: " + id);
      if (it->second.author_id != p.author_id)
        throw ValidationError("question " + id + " was not written by " + p.author_id);
    }
    const auto violations = validate_packet(p, s.questions, p.quotas);
    if (!violations.empty()) throw ValidationError("packet violates quotas: " + describe(violations));
    s.packets.push_back(std::move(p));
  } else if (type == "ResponseRecorded") {
    std::vector<ResponseRecord> batch;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& r : e.at("records")) {
      ResponseRecord rec = response_from_json(r);
      if (!s.subjects.contains(rec.subject_id)) throw NotFoundError("unknown subject id: " + rec.subject_id);
      if (!s.questions.contains(rec.question_id))
        throw NotFoundError("unknown question id: " + rec.question_id);
      auto key = std::make_pair(rec.subject_id, rec.question_id);
      if (s.answered.contains(key) || !seen.insert(key).second)
        throw DuplicateError("duplicate response: " + rec.subject_id + "/" + rec.question_id);
      batch.push_back(std::move(rec));
    }
    for (auto& rec : batch) {
      s.answered.emplace(rec.subject_id, rec.question_id);
      s.responses.push_back(std::move(rec));
    }
  } else if (type == "AnnotationSet") {
    const std::string qid = e.at("question_id").get<std::string>();
    if (!s.questions.contains(qid)) throw NotFoundError("unknown question id: " + qid);
    Annotation a = annotation_from_json(e);
    if (a.empty()) s.annotations.erase(qid);
    else s.annotations[qid] = std::move(a);
  } else if (type == "PredictionStored") {
    StoredPrediction p;
    p.question_id = e.at("question_id").get<std::string>();
    p.answerer_id = e.at("answerer_id").get<std::string>();
    p.answer = e.at("answer").get<std::string>();
    auto it = s.questions.find(p.question_id);
    if (it == s.questions.end()) throw NotFoundError("unknown question id: " + p.question_id);
    p.fooled = !is_correct(p.answer, it->second);
    if (e.contains("fooled") && e["fooled"].get<bool>() != p.fooled)
      throw ValidationError("stored fooled flag disagrees with the answer");
    s.predictions[p.question_id][p.answerer_id] = std::move(p);
  } else if (type == "VerdictRecorded") {
    std::vector<gateway::EvidenceVerdict> batch;
    for (const auto& v : e.at("verdicts")) {
      auto verdict = verdict_from_json(v);
      if (!s.questions.contains(verdict.question_id))
        throw NotFoundError("unknown question id: " + verdict.question_id);
      batch.push_back(std::move(verdict));
    }
    s.verdicts.insert(s.verdicts.end(), batch.begin(), batch.end());
  } else {
    throw ValidationError("unknown event type: " + type);
  }
}

}  // namespace

Quotas quotas_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("quotas must be an object");
  Quotas q;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<long long>() >= 0))
      throw ValidationError("quota for " + it.key() + " must be a non-negative integer");
    q[parse_category(it.key())] = it->get<std::size_t>();
  }
  return q;
}

std::vector<QuotaViolation> validate_packet(const Packet& packet,
                                            const std::map<std::string, Question>& questions,
                                            const Quotas& quotas) {
  std::map<TopicCategory, std::size_t> have;
  for (const auto& id : packet.question_ids) {
    auto it = questions.find(id);
    if (it == questions.end()) throw NotFoundError("unknown question id: " + id);
    ++have[it->second.category];
  }
  std::vector<QuotaViolation> out;
  for (auto cat : all_categories()) {
    const std::size_t want = quotas.contains(cat) ? quotas.at(cat) : 0;
    const std::size_t got = have.contains(cat) ? have.at(cat) : 0;
    if (want != got) out.push_back({cat, want, got});
  }
  return out;
}

json verdict_to_json(const gateway::EvidenceVerdict& v) {
  return {{"question_id", v.question_id},
          {"system_id", v.system_id},
          {"judge_said_helpful", v.judge_said_helpful},
          {"answer_correct", v.answer_correct},
          {"rubric_score", gateway::rubric_score(v.judge_said_helpful, v.answer_correct)}};
}

gateway::EvidenceVerdict verdict_from_json(const json& j) {
  gateway::EvidenceVerdict v;
  v.question_id = j.at("question_id").get<std::string>();
  v.system_id = j.at("system_id").get<std::string>();
  v.judge_said_helpful = j.at("judge_said_helpful").get<bool>();
  v.answer_correct = j.at("answer_correct").get<bool>();
  return v;
}

json annotation_to_json(const Annotation& a) {
  json flaws = json::array(), tactics = json::array();
  for (auto f : a.flaws) flaws.push_back(std::string(to_string(f)));
  for (auto t : a.tactics) tactics.push_back(std::string(to_string(t)));
  return {{"flaws", flaws}, {"tactics", tactics}};
}

Annotation annotation_from_json(const json& j) {
  Annotation a;
  for (const auto& f : j.value("flaws", json::array())) a.flaws.insert(parse_flaw(f.get<std::string>()));
  for (const auto& t : j.value("tactics", json::array())) a.tactics.insert(parse_tactic(t.get<std::string>()));
  return a;
}

ResponseMatrix CompetitionState::matrix() const {
  std::vector<Subject> subs;
  for (const auto& id : subject_order) subs.push_back(subjects.at(id));
  return ResponseMatrix::from_records(std::move(subs), question_order, responses);
}

std::vector<Question> CompetitionState::question_list() const {
  std::vector<Question> out;
  for (const auto& id : question_order) out.push_back(questions.at(id));
  return out;
}

json CompetitionState::to_json() const {
  json qs = json::array(), subs = json::array(), packs = json::array(), resp = json::array();
  for (const auto& id : question_order) qs.push_back(stumpforge::to_json(questions.at(id)));
  for (const auto& id : subject_order) subs.push_back(stumpforge::to_json(subjects.at(id)));
  for (const auto& p : packets) packs.push_back(packet_to_json(p));
  for (const auto& r : responses) resp.push_back(stumpforge::to_json(r));
  json ann = json::object();
  for (const auto& [qid, a] : annotations) ann[qid] = annotation_to_json(a);
  json verdict_rows = json::array();
  for (const auto& v : verdicts) verdict_rows.push_back(verdict_to_json(v));
  json preds = json::array();
  for (const auto& [_, by_answerer] : predictions)
    for (const auto& [__, p] : by_answerer) preds.push_back(prediction_to_json(p));
  return {{"version", version},   {"questions", qs},  {"subjects", subs},
          {"packets", packs},     {"responses", resp}, {"annotations", ann},
          {"predictions", preds}, {"rounds", rounds},    {"verdicts", verdict_rows}};
}

CompetitionState CompetitionState::from_json(const json& j) {
  CompetitionState s;
  for (const auto& q : j.at("questions")) {
    Question question = question_from_json(q);
    s.question_order.push_back(question.id);
    s.questions.emplace(question.id, std::move(question));
  }
  for (const auto& x : j.at("subjects")) {
    Subject sub = subject_from_json(x);
    s.subject_order.push_back(sub.id);
    s.subjects.emplace(sub.id, std::move(sub));
  }
  for (const auto& p : j.at("packets")) s.packets.push_back(packet_from_json(p));
  for (const auto& r : j.at("responses")) {
    ResponseRecord rec = response_from_json(r);
    s.answered.emplace(rec.subject_id, rec.question_id);
    s.responses.push_back(std::move(rec));
  }
  for (auto it = j.at("annotations").begin(); it != j.at("annotations").end(); ++it)
    s.annotations[it.key()] = annotation_from_json(*it);
  for (const auto& p : j.at("predictions")) {
    StoredPrediction sp{p.at("question_id").get<std::string>(), p.at("answerer_id").get<std::string>(),
                        p.at("answer").get<std::string>(), p.at("fooled").get<bool>()};
    s.predictions[sp.question_id][sp.answerer_id] = std::move(sp);
  }
  s.rounds = j.at("rounds").get<std::set<std::string>>();
  for (const auto& v : j.value("verdicts", json::array())) s.verdicts.push_back(verdict_from_json(v));
  s.version = j.at("version").get<std::uint64_t>();
  return s;
}

std::string CompetitionState::hash() const { return fnv1a_hex(to_json().dump()); }

void apply(CompetitionState& state, const json& event) {
  if (!event.is_object()) throw ValidationError("event must be an object");
  if (event.value("schema_version", 0) != kSchemaVersion)
    throw ValidationError("unsupported event schema_version");
  const auto seq = event.at("seq").get<std::uint64_t>();
  if (seq != state.version + 1)
    throw ValidationError("event out of sequence: expected " + std::to_string(state.version + 1) +
                          ", got " + std::to_string(seq));
  CompetitionState next = state;
  apply_unchecked(next, event);
  next.version = seq;
  state = std::move(next);
}

CompetitionStore::CompetitionStore(std::filesystem::path dir, std::size_t snapshot_every)
    : dir_(std::move(dir)), snapshot_every_(snapshot_every == 0 ? 1 : snapshot_every) {
  if (dir_.empty()) return;
  std::filesystem::create_directories(dir_);
  if (std::filesystem::exists(events_path()))
    current_ = std::make_shared<CompetitionState>(replay(events_path()));
}

std::shared_ptr<const CompetitionState> CompetitionStore::snapshot() const {
  std::lock_guard lock(read_mutex_);
  return current_;
}

std::uint64_t CompetitionStore::commit(json event) {
  std::lock_guard writer(write_mutex_);
  auto base = snapshot();
  event["seq"] = base->version + 1;
  auto next = std::make_shared<CompetitionState>(*base);
  store::apply(*next, event);
  if (!dir_.empty()) {
    std::ofstream log(events_path(), std::ios::app | std::ios::binary);
    if (!log) throw std::runtime_error("cannot append to " + events_path().string());
    log << event.dump() << '\n';
    log.flush();
    if (!log) throw std::runtime_error("write to " + events_path().string() + " failed");
  }
  {
    std::lock_guard lock(read_mutex_);
    current_ = next;
  }
  if (!dir_.empty() && next->version % snapshot_every_ == 0) write_snapshot();
  return next->version;
}

std::uint64_t CompetitionStore::register_question(const Question& q) {
  q.validate();
  return commit(make_event("QuestionRegistered", {{"question", to_json(q)}}));
}

std::uint64_t CompetitionStore::register_subject(const Subject& s) {
  if (s.id.empty()) throw ValidationError("subject id is empty");
  return commit(make_event("SubjectRegistered", {{"subject", to_json(s)}}));
}

std::uint64_t CompetitionStore::submit_packet(const Packet& packet) {
  return commit(make_event("PacketSubmitted", {{"packet", packet_to_json(packet)}}));
}

std::uint64_t CompetitionStore::record_responses(const std::vector<ResponseRecord>& records) {
  json rows = json::array();
  for (const auto& r : records) rows.push_back(to_json(r));
  return commit(make_event("ResponseRecorded", {{"records", rows}}));
}

std::uint64_t CompetitionStore::annotate(const std::string& question_id,
                                         const std::set<QuestionFlaw>& flaws,
                                         const std::set<AdversarialTactic>& tactics) {
  json e = annotation_to_json({flaws, tactics});
  e["question_id"] = question_id;
  return commit(make_event("AnnotationSet", std::move(e)));
}

std::uint64_t CompetitionStore::store_prediction(const std::string& question_id,
                                                 const gateway::Prediction& p) {
  return commit(make_event("PredictionStored", {{"question_id", question_id},
                                                {"answerer_id", p.answerer_id},
                                                {"answer", p.answer},
                                                {"fooled", p.fooled}}));
}

std::uint64_t CompetitionStore::record_verdicts(const std::vector<gateway::EvidenceVerdict>& verdicts) {
  json rows = json::array();
  for (const auto& v : verdicts) rows.push_back(verdict_to_json(v));
  return commit(make_event("VerdictRecorded", {{"verdicts", rows}}));
}

void CompetitionStore::write_snapshot() const {
  if (dir_.empty()) return;
  auto s = snapshot();
  json doc = {{"schema_version", kSchemaVersion}, {"version", s->version}, {"hash", s->hash()},
              {"state", s->to_json()}};
  const auto tmp = snapshot_path().string() + ".tmp";
  write_file(tmp, doc.dump(2) + "\n");
  std::filesystem::rename(tmp, snapshot_path());
}

CompetitionState CompetitionStore::replay(const std::filesystem::path& events_file) {
  CompetitionState s;
  std::size_t line = 0;
  for (const auto& e : read_jsonl_file(events_file)) {
    ++line;
    try {
      store::apply(s, e);
    } catch (const std::exception& ex) {
      throw ValidationError("events.jsonl line " + std::to_string(line) + ": " + ex.what());
    }
  }
  return s;
}

std::vector<WriterLeaderboardEntry> writer_leaderboard(
    const CompetitionState& state, const std::vector<scoring::AuthorMetrics>& scores,
    const std::map<std::string, std::optional<double>>& diversity) {
  std::vector<WriterLeaderboardEntry> out;
  for (const auto& m : scores) {
    WriterLeaderboardEntry e;
    e.author_id = m.author_id;
    e.score = m.score;
    for (auto cat : all_categories()) e.category_counts[cat] = 0;
    for (const auto& [_, q] : state.questions)
      if (q.author_id == m.author_id) ++e.category_counts[q.category];
    if (auto it = diversity.find(m.author_id); it != diversity.end()) e.diversity = it->second;
    out.push_back(std::move(e));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.author_id < b.author_id;
  });
  for (std::size_t k = 0; k < out.size(); ++k) out[k].rank = k + 1;
  return out;
}

std::vector<MachineLeaderboardEntry> machine_leaderboard(const CompetitionState& state) {
  std::vector<MachineLeaderboardEntry> out;
  for (const auto& qid : state.question_order) {
    auto it = state.predictions.find(qid);
    if (it == state.predictions.end() || it->second.empty()) continue;
    MachineLeaderboardEntry e;
    e.question_id = qid;
    e.author_id = state.questions.at(qid).author_id;
    for (const auto& [answerer, p] : it->second) e.stumped[answerer] = p.fooled;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace stumpforge::store
