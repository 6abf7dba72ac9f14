#include "stumpforge/fit_report.hpp"

#include "stumpforge/error.hpp"

namespace stumpforge {

namespace {

json keyed(const std::vector<std::string>& ids, const std::vector<double>& values) {
  json out = json::object();
  for (std::size_t k = 0; k < ids.size(); ++k) out[ids[k]] = values[k];
  return out;
}

std::vector<double> values_in_order(const json& obj, const std::vector<std::string>& ids,
                                    const char* what) {
  std::vector<double> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = obj.find(id);
    if (it == obj.end() || !it->is_number())
      throw ValidationError(std::string("fit report: missing ") + what + " for " + id);
    out.push_back(it->get<double>());
  }
  return out;
}

std::vector<std::string> order_or_keys(const json& j, const char* order_key, const json& obj) {
  if (auto it = j.find(order_key); it != j.end()) return it->get<std::vector<std::string>>();
  std::vector<std::string> ids;
  for (auto it = obj.begin(); it != obj.end(); ++it) ids.push_back(it.key());
  return ids;
}

}  // namespace

FitReport run_fit(const ResponseMatrix& matrix, const irt::FitConfig& config) {
  FitReport report;
  report.config = config;
  report.subjects = matrix.subjects();
  report.joint = irt::fit(matrix, config);
  bool has_human = false, has_machine = false;
  for (const auto& s : matrix.subjects()) {
    has_human |= s.kind == SubjectKind::Human;
    has_machine |= s.kind == SubjectKind::Machine;
  }
  if (has_human && has_machine) report.dual = irt::fit_dual(matrix, config);
  return report;
}

json to_json(const irt::FitConfig& c) {
  return {{"seed", c.seed},
          {"epochs", c.epochs},
          {"learning_rate", c.learning_rate},
          {"mc_samples", c.mc_samples},
          {"prior_std", c.prior_std},
          {"convergence_tol", c.convergence_tol}};
}

irt::FitConfig fit_config_from_json(const json& j, irt::FitConfig c) {
  if (j.is_null()) return c;
  if (!j.is_object()) throw ValidationError("config must be an object");
  c.seed = j.value("seed", c.seed);
  c.epochs = j.value("epochs", c.epochs);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.mc_samples = j.value("mc_samples", c.mc_samples);
  c.prior_std = j.value("prior_std", c.prior_std);
  c.convergence_tol = j.value("convergence_tol", c.convergence_tol);
  c.validate();
  return c;
}

json to_json(const FitReport& r) {
  const auto& p = r.joint.params;
  json out = {{"schema_version", 1},
              {"seed", r.config.seed},
              {"config", to_json(r.config)},
              {"elbo_trace", r.joint.state.elbo_trace},
              {"final_elbo", r.joint.state.final_elbo},
              {"sign_flipped", r.joint.state.sign_flipped},
              {"skills", keyed(p.subject_ids, p.skills)},
              {"difficulties", keyed(p.question_ids, p.difficulties)},
              {"discriminabilities", keyed(p.question_ids, p.discriminabilities)},
              {"subject_order", p.subject_ids},
              {"question_order", p.question_ids}};
  json subjects = json::array();
  for (const auto& s : r.subjects) subjects.push_back(to_json(s));
  out["subjects"] = std::move(subjects);
  if (r.dual) {
    const auto& d = r.dual->dual;
    out["dual"] = {{"question_order", d.question_ids},
                   {"human", keyed(d.question_ids, d.human)},
                   {"machine", keyed(d.question_ids, d.machine)},
                   {"human_elbo_trace", r.dual->human.state.elbo_trace},
                   {"machine_elbo_trace", r.dual->machine.state.elbo_trace}};
  } else {
    out["dual"] = nullptr;
  }
  return out;
}

LoadedFit fit_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("fit report must be a JSON object");
  for (const char* key : {"skills", "difficulties", "discriminabilities"})
    if (!j.contains(key) || !j[key].is_object())
      throw ValidationError(std::string("fit report: missing object '") + key + "'");

  LoadedFit f;
  f.params.subject_ids = order_or_keys(j, "subject_order", j["skills"]);
  f.params.question_ids = order_or_keys(j, "question_order", j["difficulties"]);
  f.params.skills = values_in_order(j["skills"], f.params.subject_ids, "skill");
  f.params.difficulties = values_in_order(j["difficulties"], f.params.question_ids, "difficulty");
  f.params.discriminabilities =
      values_in_order(j["discriminabilities"], f.params.question_ids, "discriminability");
  f.params.validate();
  f.elbo_trace = j.value("elbo_trace", std::vector<double>{});
  f.final_elbo = j.value("final_elbo", 0.0);
  if (auto it = j.find("subjects"); it != j.end() && it->is_array())
    for (const auto& s : *it) f.subjects.push_back(subject_from_json(s));

  if (auto it = j.find("dual"); it != j.end() && it->is_object()) {
    irt::DualDifficulty d;
    d.question_ids = order_or_keys(*it, "question_order", (*it)["human"]);
    d.human = values_in_order((*it)["human"], d.question_ids, "human difficulty");
    d.machine = values_in_order((*it)["machine"], d.question_ids, "machine difficulty");
    f.dual = std::move(d);
  }
  return f;
}

}  // namespace stumpforge
