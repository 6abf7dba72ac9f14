#include "stumpforge/service.hpp"

#include "stumpforge/error.hpp"
#include "stumpforge/reports.hpp"

#include <httplib.h>

#include <charconv>
#include <fstream>
#include <sstream>

namespace stumpforge::service {

namespace {

constexpr const char* kFooledLabel = "Fooled This Machine";

Response error(int status, const std::string& message, const std::string& field = {}) {
  json body = {{"error", message}};
  if (!field.empty()) body["field"] = field;
  return {status, std::move(body)};
}

/// Maps the library's exception hierarchy onto status codes.
Response error_from(const std::exception& e) {
  if (dynamic_cast<const DuplicateError*>(&e)) return error(409, e.what());
  if (dynamic_cast<const NotFoundError*>(&e)) return error(404, e.what());
  if (dynamic_cast<const ValidationError*>(&e)) return error(422, e.what());
  if (dynamic_cast<const json::exception*>(&e)) return error(400, e.what());
  return error(500, e.what());
}

json parse_body(const std::string& body) {
  return json::parse(body);  // parse_error surfaces as 400
}

std::optional<double> parse_double(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return v;
}

std::optional<std::size_t> parse_count(const std::string& s) {
  std::size_t v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return v;
}

// Required non-empty string field; throws a field-tagged error.
struct FieldError : std::runtime_error {
  FieldError(std::string f, const std::string& msg) : std::runtime_error(msg), field(std::move(f)) {}
  std::string field;
};

std::string required_string(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end()) throw FieldError(field, std::string("missing field '") + field + "'");
  if (!it->is_string()) throw FieldError(field, std::string("field '") + field + "' must be a string");
  if (it->get<std::string>().find_first_not_of(" \t\r\n") == std::string::npos)
    throw FieldError(field, std::string("field '") + field + "' must not be blank");
  return it->get<std::string>();
}

Question parse_draft(const json& j) {
  if (!j.is_object()) throw FieldError("", "draft must be a JSON object");
  const std::string text = required_string(j, "text");
  const std::string target = required_string(j, "target_answer");
  std::set<std::string> aliases;
  if (auto it = j.find("answer_aliases"); it != j.end()) {
    if (!it->is_array()) throw FieldError("answer_aliases", "field 'answer_aliases' must be an array");
    for (const auto& a : *it) {
      if (!a.is_string()) throw FieldError("answer_aliases", "answer aliases must be strings");
      aliases.insert(a.get<std::string>());
    }
  }
  TopicCategory category = TopicCategory::Art;
  if (auto it = j.find("category"); it != j.end()) {
    if (!it->is_string()) throw FieldError("category", "field 'category' must be a string");
    try {
      category = parse_category(it->get<std::string>());
    } catch (const ValidationError& e) {
      throw FieldError("category", e.what());
    }
  }
  std::string author;
  if (auto it = j.find("author_id"); it != j.end()) {
    if (!it->is_string()) throw FieldError("author_id", "field 'author_id' must be a string");
    author = it->get<std::string>();
  }
  std::string id = "draft";
  if (auto it = j.find("id"); it != j.end() && it->is_string()) id = it->get<std::string>();
  return Question::make(id, text, target, std::move(aliases), category, author, "");
}

ResponseMatrix matrix_from_body(const json& m) {
  if (m.is_string()) {
    std::istringstream in(m.get<std::string>());
    return read_matrix_csv(in);
  }
  if (!m.is_object()) throw ValidationError("matrix must be an object or CSV string");
  std::vector<Subject> subjects;
  for (const auto& s : m.at("subjects")) subjects.push_back(subject_from_json(s));
  std::vector<ResponseRecord> records;
  for (const auto& r : m.at("responses")) records.push_back(response_from_json(r));
  std::vector<std::string> questions;
  if (auto it = m.find("questions"); it != m.end()) {
    questions = it->get<std::vector<std::string>>();
  } else {
    std::set<std::string> seen;
    for (const auto& r : records)
      if (seen.insert(r.question_id).second) questions.push_back(r.question_id);
  }
  return ResponseMatrix::from_records(std::move(subjects), std::move(questions), records);
}

std::map<std::string, std::optional<double>> author_diversity(
    const std::vector<Question>& questions, const diversity::Gazetteer* gazetteer,
    const diversity::CountryDistribution* reference) {
  std::map<std::string, std::optional<double>> out;
  if (!gazetteer || !reference) return out;
  std::map<std::string, std::vector<Question>> by_author;
  for (const auto& q : questions) by_author[q.author_id].push_back(q);
  for (const auto& [author, qs] : by_author) {
    const auto d = diversity::question_distribution(qs, *gazetteer);
    out[author] = d.distribution.empty() ? std::nullopt
                                         : std::optional<double>(diversity::kl(d.distribution, *reference));
  }
  return out;
}

}  // namespace

Service::Service(ServiceConfig config) : config_(std::move(config)) {
  store_ = std::make_unique<store::CompetitionStore>(config_.data_dir);

  if (config_.index) {
    index_ = std::make_shared<const retrieval::InvertedIndex>(
        retrieval::InvertedIndex::deserialize(read_file(*config_.index)));
  } else if (config_.corpus) {
    retrieval::IndexConfig ic;
    if (config_.stopwords) ic.stopwords = retrieval::read_stopwords(*config_.stopwords);
    index_ = std::make_shared<const retrieval::InvertedIndex>(
        retrieval::InvertedIndex::build(retrieval::read_corpus(*config_.corpus), ic));
  }
  if (config_.gazetteer && config_.reference) {
    set_diversity(diversity::Gazetteer::from_tsv_file(*config_.gazetteer),
                  diversity::read_reference(*config_.reference));
  }
  if (config_.answerers) {
    for (const auto& d : read_answerer_registry(*config_.answerers)) {
      if (d.kind == gateway::AnswererKind::RetrievalBaseline && !index_)
        throw ValidationError("answerer " + d.id + " needs a corpus or index");
      answerers_.add(gateway::make_answerer(d, index_));
    }
  } else if (index_) {
    answerers_.add(std::make_shared<gateway::RetrievalAnswerer>("retrieval-baseline", index_));
  }
  load_persisted_fit();
}

Service::~Service() { wait_for_jobs(); }

void Service::set_index(std::shared_ptr<const retrieval::InvertedIndex> index) {
  std::lock_guard lock(resources_mutex_);
  index_ = std::move(index);
}

void Service::set_diversity(diversity::Gazetteer gazetteer, diversity::CountryDistribution reference) {
  diversity::validate_distribution(reference);
  std::lock_guard lock(resources_mutex_);
  gazetteer_ = std::make_shared<const diversity::Gazetteer>(std::move(gazetteer));
  reference_ = std::make_shared<const diversity::CountryDistribution>(std::move(reference));
}

void Service::add_answerer(std::shared_ptr<const gateway::Answerer> answerer) {
  answerers_.add(std::move(answerer));
}

void Service::set_highlight_answerer(std::shared_ptr<const gateway::Answerer> answerer) {
  std::lock_guard lock(resources_mutex_);
  highlight_answerer_ = std::move(answerer);
}

std::shared_ptr<const FitSnapshot> Service::current_fit() const {
  std::lock_guard lock(fit_mutex_);
  return fit_;
}

Response Service::stamp(Response r) const {
  if (!r.body.is_object()) r.body = {{"data", std::move(r.body)}};
  r.body["schema_version"] = kSchemaVersion;
  r.body["state_version"] = store_->version();
  const auto fit = current_fit();
  r.body["fit_version"] = fit ? fit->fit_version : 0;
  return r;
}

Response Service::handle(const std::string& method, const std::string& path,
                         const std::map<std::string, std::string>& query, const std::string& body) {
  Response r;
  try {
    if (method == "POST" && path == "/drafts/evaluate") r = evaluate_draft(body);
    else if (method == "POST" && path == "/fit") r = start_fit(body);
    else if (method == "GET" && path.rfind("/jobs/", 0) == 0) r = job_status(path.substr(6));
    else if (method == "GET" && path == "/scores") r = scores();
    else if (method == "GET" && path == "/leaderboard/writers") r = writer_leaderboard();
    else if (method == "GET" && path == "/leaderboard/machines") r = machine_leaderboard();
    else if (method == "GET" && path == "/reports/quadrants") r = quadrants(query);
    else if (method == "GET" && path == "/reports/tactics") r = tactics(query);
    else if (method == "GET" && path == "/reports/contingency") r = contingency(query);
    else if (method == "GET" && path == "/reports/evidence-utility") r = evidence_utility();
    else if (method == "GET" && path == "/state") r = state_summary();
    else if (method == "POST") r = mutate(path, body);
    else r = error(404, "no route for " + method + " " + path);
  } catch (const json::parse_error& e) {
    r = error(400, std::string("malformed JSON: ") + e.what());
  } catch (const std::exception& e) {
    r = error_from(e);
  }
  return stamp(std::move(r));
}

Response Service::evaluate_draft(const std::string& body) {
  json j;
  try {
    j = parse_body(body);
  } catch (const json::parse_error& e) {
    return error(400, std::string("malformed JSON: ") + e.what(), "body");
  }
  Question draft;
  try {
    draft = parse_draft(j);
  } catch (const FieldError& e) {
    return error(400, e.what(), e.field);
  } catch (const ValidationError& e) {
    return error(400, e.what(), "text");
  }

  std::shared_ptr<const retrieval::InvertedIndex> index;
  std::shared_ptr<const diversity::Gazetteer> gazetteer;
  std::shared_ptr<const diversity::CountryDistribution> reference;
  std::shared_ptr<const gateway::Answerer> highlighter;
  {
    std::lock_guard lock(resources_mutex_);
    index = index_;
    gazetteer = gazetteer_;
    reference = reference_;
    highlighter = highlight_answerer_;
  }
  if (!index) return error(503, "retrieval index not loaded");
  if (!highlighter) highlighter = std::make_shared<gateway::RetrievalAnswerer>("highlight", index);

  json out = json::object();
  const auto hits = index->query(draft.text, config_.evidence_k);
  json evidence = json::array();
  for (const auto& h : hits) evidence.push_back(reports::to_json(h));
  out["evidence"] = evidence;
  out["retrieval_warning"] =
      !hits.empty() && normalize_answer(hits.front().doc_title) == normalize_answer(draft.target_answer);

  const auto predictions = gateway::predict_all(draft, answerers_.list(), config_.draft_deadline);
  json preds = json::array();
  json summary = json::object();
  for (const auto& p : predictions) {
    preds.push_back(reports::to_json(p));
    const bool answered = !p.error.has_value();
    const bool fooled = answered && p.fooled;
    summary[p.answerer_id] = {{"fooled", fooled},
                              {"status", p.timed_out ? "timed_out" : answered ? "ok" : "error"},
                              {"label", fooled ? kFooledLabel : ""}};
  }
  out["predictions"] = preds;
  out["fooled_summary"] = summary;

  try {
    out["highlights"] = reports::to_json(gateway::token_importance(draft, highlighter));
  } catch (const std::exception& e) {
    out["highlights"] = nullptr;
    out["highlights_error"] = e.what();
  }

  const auto state = store_->snapshot();
  if (gazetteer && reference) {
    std::vector<Question> existing;
    for (const auto& q : state->question_list())
      if (draft.author_id.empty() || q.author_id == draft.author_id) existing.push_back(q);
    auto delta = diversity::diversity_delta(existing, draft, *gazetteer, *reference);
    json d = reports::to_json(delta);
    auto with = existing;
    with.push_back(draft);
    const auto dist = diversity::question_distribution(with, *gazetteer);
    d["suggestions"] = diversity::suggest(dist.distribution, *reference, config_.suggestions);
    json entities = json::array();
    for (const auto& m : gazetteer->match(draft.text))
      entities.push_back({{"surface", m.surface}, {"country", m.country}});
    d["entities"] = entities;
    out["diversity_delta"] = d;
  } else {
    out["diversity_delta"] = nullptr;
  }
  return {200, std::move(out)};
}

json Service::run_and_install(const ResponseMatrix& matrix, std::vector<Question> questions,
                              const irt::FitConfig& config) {
  const auto report = run_fit(matrix, config);
  auto snap = std::make_shared<FitSnapshot>();
  snap->report = to_json(report);
  snap->fit = fit_from_json(snap->report);
  snap->matrix = matrix;
  snap->questions = std::move(questions);
  {
    std::lock_guard lock(fit_mutex_);
    snap->fit_version = ++fit_counter_;
    fit_ = snap;
  }
  persist(*snap);
  return snap->report;
}

void Service::persist(const FitSnapshot& snap) const {
  if (config_.data_dir.empty()) return;
  json questions = json::array();
  for (const auto& q : snap.questions) questions.push_back(to_json(q));
  json subjects = json::array();
  for (const auto& s : snap.matrix.subjects()) subjects.push_back(to_json(s));
  json responses = json::array();
  for (const auto& r : snap.matrix.records()) responses.push_back(to_json(r));
  const json saved = {{"schema_version", kSchemaVersion},
                      {"fit_version", snap.fit_version},
                      {"report", snap.report},
                      {"matrix",
                       {{"subjects", subjects},
                        {"questions", snap.matrix.questions()},
                        {"responses", responses}}},
                      {"questions", questions}};
  const auto path = config_.data_dir / "fit.json";
  const auto tmp = config_.data_dir / "fit.json.tmp";
  write_file(tmp, saved.dump() + "\n");
  std::filesystem::rename(tmp, path);
}

void Service::load_persisted_fit() {
  if (config_.data_dir.empty()) return;
  const auto path = config_.data_dir / "fit.json";
  if (!std::filesystem::exists(path)) return;
  const json saved = json::parse(read_file(path));
  auto snap = std::make_shared<FitSnapshot>();
  snap->fit_version = saved.at("fit_version").get<std::uint64_t>();
  snap->report = saved.at("report");
  snap->fit = fit_from_json(snap->report);
  snap->matrix = matrix_from_body(saved.at("matrix"));
  for (const auto& q : saved.at("questions")) snap->questions.push_back(question_from_json(q));
  fit_counter_ = snap->fit_version;
  fit_ = snap;
}

Response Service::start_fit(const std::string& body) {
  const json j = body.empty() ? json::object() : parse_body(body);
  if (!j.is_object()) return error(400, "fit request must be a JSON object", "body");
  irt::FitConfig config;
  try {
    config = fit_config_from_json(j.value("config", json(nullptr)), config_.fit);
  } catch (const json::exception& e) {
    return error(400, e.what(), "config");
  } catch (const ValidationError& e) {
    return error(400, e.what(), "config");
  }

  ResponseMatrix matrix;
  std::vector<Question> questions;
  try {
    if (j.value("competition", false)) {
      const auto state = store_->snapshot();
      matrix = state->matrix().drop_empty_questions();
      questions = state->question_list();
    } else if (auto it = j.find("matrix"); it != j.end()) {
      matrix = matrix_from_body(*it);
      if (auto sk = j.find("subjects"); sk != j.end() && it->is_string()) {
        std::vector<Subject> known;
        for (const auto& s : *sk) known.push_back(subject_from_json(s));
        std::istringstream in(it->get<std::string>());
        matrix = read_matrix_csv(in, known);
      }
      if (auto qs = j.find("questions"); qs != j.end())
        for (const auto& q : *qs) questions.push_back(question_from_json(q));
    } else {
      return error(400, "expected 'matrix' or 'competition': true", "matrix");
    }
    matrix.validate_for_fit();
  } catch (const json::exception& e) {
    return error(422, std::string("invalid matrix: ") + e.what(), "matrix");
  } catch (const ValidationError& e) {
    return error(422, std::string("invalid matrix: ") + e.what(), "matrix");
  }

  if (matrix.present_count() <= config_.fit_async_cells) {
    json report = run_and_install(matrix, std::move(questions), config);
    return {200, {{"status", "done"}, {"report", std::move(report)}}};
  }

  std::lock_guard lock(jobs_mutex_);
  const std::string id = "fit-" + std::to_string(++job_counter_);
  jobs_[id] = Job{};
  workers_.emplace_back([this, id, matrix = std::move(matrix), questions = std::move(questions), config] {
    Job done;
    try {
      done.result = run_and_install(matrix, questions, config);
      done.status = "done";
    } catch (const std::exception& e) {
      done.status = "failed";
      done.error = e.what();
    }
    std::lock_guard inner(jobs_mutex_);
    jobs_[id] = std::move(done);
  });
  return {202, {{"status", "running"}, {"job_id", id}}};
}

Response Service::job_status(const std::string& id) {
  std::lock_guard lock(jobs_mutex_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return error(404, "unknown job id: " + id);
  json out = {{"job_id", id}, {"status", it->second.status}};
  if (it->second.status == "done") out["report"] = it->second.result;
  if (it->second.status == "failed") out["error"] = it->second.error;
  return {200, std::move(out)};
}

void Service::wait_for_jobs() {
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(jobs_mutex_);
    workers.swap(workers_);
  }
  for (auto& w : workers)
    if (w.joinable()) w.join();
}

Response Service::scores() {
  const auto fit = current_fit();
  if (!fit) return error(409, "no fit available");
  const auto metrics = reports::author_scores(fit->fit, fit->questions);
  return {200,
          {{"scores", reports::scores_to_json(metrics)},
           {"best_answerer", scoring::best_answerer(fit->fit.params)},
           {"table", reports::render_scores_table(metrics)}}};
}

Response Service::writer_leaderboard() {
  const auto fit = current_fit();
  if (!fit) return error(409, "no fit available");
  const auto metrics = reports::author_scores(fit->fit, fit->questions);
  store::CompetitionState merged = *store_->snapshot();
  for (const auto& q : fit->questions) merged.questions.emplace(q.id, q);
  std::shared_ptr<const diversity::Gazetteer> gazetteer;
  std::shared_ptr<const diversity::CountryDistribution> reference;
  {
    std::lock_guard lock(resources_mutex_);
    gazetteer = gazetteer_;
    reference = reference_;
  }
  std::vector<Question> all;
  for (const auto& [_, q] : merged.questions) all.push_back(q);
  const auto tau = author_diversity(all, gazetteer.get(), reference.get());
  return {200, {{"writers", reports::to_json(store::writer_leaderboard(merged, metrics, tau))}}};
}

Response Service::machine_leaderboard() {
  if (!current_fit()) return error(409, "no fit available");
  return {200, {{"questions", reports::to_json(store::machine_leaderboard(*store_->snapshot()))}}};
}

Response Service::quadrants(const std::map<std::string, std::string>& query) {
  double t = 0.0;
  if (auto it = query.find("t"); it != query.end()) {
    auto v = parse_double(it->second);
    if (!v) return error(400, "query parameter t must be a number", "t");
    t = *v;
  }
  const auto fit = current_fit();
  if (!fit) return error(409, "no fit available");
  if (!fit->fit.dual) return error(409, "fit has no human/machine dual table");
  return {200, reports::to_json(scoring::quadrants(*fit->fit.dual, t))};
}

Response Service::tactics(const std::map<std::string, std::string>& query) {
  std::size_t buckets = 4;
  if (auto it = query.find("buckets"); it != query.end()) {
    auto v = parse_count(it->second);
    if (!v || *v == 0) return error(400, "query parameter buckets must be a positive integer", "buckets");
    buckets = *v;
  }
  const auto fit = current_fit();
  if (!fit) return error(409, "no fit available");
  const auto state = store_->snapshot();
  std::map<std::string, std::set<AdversarialTactic>> annotated;
  json skipped = json::array();
  for (const auto& [qid, a] : state->annotations) {
    if (a.tactics.empty()) continue;
    if (fit->fit.params.question_index(qid)) annotated[qid] = a.tactics;
    else skipped.push_back(qid);
  }
  json out = reports::to_json(scoring::tactic_discriminability_profile(annotated, fit->fit.params, buckets));
  out["skipped_unfitted"] = skipped;
  return {200, std::move(out)};
}

Response Service::contingency(const std::map<std::string, std::string>& query) {
  const auto fit = current_fit();
  if (!fit) return error(409, "no fit available");
  const auto row = query.find("row");
  const auto col = query.find("col");
  if ((row == query.end()) != (col == query.end()))
    return error(400, "pair view needs both row and col subject ids", row == query.end() ? "row" : "col");
  if (row != query.end())
    return {200, reports::to_json(scoring::stump_contingency_pair(fit->matrix, row->second, col->second))};
  return {200, reports::to_json(scoring::stump_contingency(fit->matrix))};
}

Response Service::evidence_utility() {
  if (!current_fit()) return error(409, "no fit available");
  std::vector<std::string> systems;
  for (const auto& a : answerers_.list()) systems.push_back(a->id());
  return {200, reports::to_json(gateway::evidence_utility(store_->snapshot()->verdicts, systems))};
}

Response Service::state_summary() {
  const auto s = store_->snapshot();
  json answerers = json::array();
  for (const auto& a : answerers_.list()) answerers.push_back(a->id());
  return {200,
          {{"hash", s->hash()},
           {"questions", s->questions.size()},
           {"subjects", s->subjects.size()},
           {"responses", s->responses.size()},
           {"packets", s->packets.size()},
           {"answerers", answerers}}};
}

Response Service::mutate(const std::string& path, const std::string& body) {
  const json j = parse_body(body);
  auto each = [&](auto&& fn) {
    if (j.is_array())
      for (const auto& row : j) fn(row);
    else
      fn(j);
  };
  if (path == "/questions") {
    each([&](const json& row) { store_->register_question(question_from_json(row)); });
  } else if (path == "/subjects") {
    each([&](const json& row) { store_->register_subject(subject_from_json(row)); });
  } else if (path == "/responses") {
    std::vector<ResponseRecord> records;
    each([&](const json& row) { records.push_back(response_from_json(row)); });
    store_->record_responses(records);
  } else if (path == "/packets") {
    store::Packet p;
    p.author_id = j.at("author_id").get<std::string>();
    p.question_ids = j.at("question_ids").get<std::vector<std::string>>();
    p.quotas = store::quotas_from_json(j.value("quotas", json::object()));
    const auto violations = store::validate_packet(p, store_->snapshot()->questions, p.quotas);
    if (!violations.empty()) {
      json rows = json::array();
      for (const auto& v : violations)
        rows.push_back({{"category", std::string(to_string(v.category))}, {"want", v.want}, {"have", v.have}});
      Response r = error(422, "packet violates quotas");
      r.body["violations"] = rows;
      return r;
    }
    store_->submit_packet(p);
  } else if (path == "/annotations") {
    const auto a = store::annotation_from_json(j);
    store_->annotate(j.at("question_id").get<std::string>(), a.flaws, a.tactics);
  } else if (path == "/predictions") {
    gateway::Prediction p;
    p.answerer_id = j.at("answerer_id").get<std::string>();
    p.answer = j.at("answer").get<std::string>();
    const auto qid = j.at("question_id").get<std::string>();
    const auto state = store_->snapshot();
    auto it = state->questions.find(qid);
    if (it == state->questions.end()) throw NotFoundError("unknown question id: " + qid);
    p.fooled = !is_correct(p.answer, it->second);
    store_->store_prediction(qid, p);
  } else if (path == "/verdicts") {
    std::vector<gateway::EvidenceVerdict> verdicts;
    each([&](const json& row) { verdicts.push_back(store::verdict_from_json(row)); });
    store_->record_verdicts(verdicts);
  } else {
    return error(404, "no route for POST " + path);
  }
  return {200, {{"status", "ok"}}};
}

void Service::mount(httplib::Server& server) {
  auto bridge = [this](const char* method) {
    return [this, method](const httplib::Request& req, httplib::Response& res) {
      std::map<std::string, std::string> query;
      for (const auto& [k, v] : req.params) query.emplace(k, v);
      const Response r = handle(method, req.path, query, req.body);
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
  };
  server.Get(R"(/.*)", bridge("GET"));
  server.Post(R"(/.*)", bridge("POST"));
}

void serve(Service& service, const std::string& host, int port) {
  httplib::Server server;
  service.mount(server);
  if (!server.listen(host, port))
    throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace stumpforge::service
