#include "stumpforge/simulate.hpp"

#include "stumpforge/error.hpp"

#include <cstdio>
#include <random>

namespace stumpforge::simulate {

namespace {

std::string numbered(const char* prefix, std::size_t n, int width) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, n);
  return buf;
}

json keyed(const std::vector<std::string>& ids, const std::vector<double>& values) {
  json out = json::object();
  for (std::size_t k = 0; k < ids.size(); ++k) out[ids[k]] = values[k];
  return out;
}

}  // namespace

void SyntheticConfig::validate() const {
  if (subjects < 2) throw ValidationError("need at least two subjects");
  if (machines > subjects) throw ValidationError("machines cannot exceed subjects");
  if (questions < 1) throw ValidationError("need at least one question");
  if (authors < 1 || authors > questions) throw ValidationError("authors must be in [1, questions]");
  if (!(min_discriminability >= 0.0 && min_discriminability <= 1.0))
    throw ValidationError("min_discriminability must lie in [0, 1]");
}

SyntheticData generate(const SyntheticConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> symmetric(-1.0, 1.0);
  std::uniform_real_distribution<double> gamma(config.min_discriminability, 1.0);

  SyntheticData d;
  const std::size_t humans = config.subjects - config.machines;
  for (std::size_t i = 0; i < config.subjects; ++i) {
    Subject s;
    const bool machine = i >= humans;
    s.kind = machine ? SubjectKind::Machine : SubjectKind::Human;
    s.id = machine ? numbered("m", i - humans + 1, 3) : numbered("h", i + 1, 3);
    s.display_name = s.id;
    d.subjects.push_back(s);
    d.truth.subject_ids.push_back(s.id);
    d.truth.skills.push_back(symmetric(rng));
  }
  const auto& categories = all_categories();
  for (std::size_t j = 0; j < config.questions; ++j) {
    const std::string id = numbered("q", j + 1, 4);
    d.truth.question_ids.push_back(id);
    d.truth.difficulties.push_back(symmetric(rng));
    d.truth.discriminabilities.push_back(gamma(rng));
    d.questions.push_back(Question::make(id, "Synthetic question " + std::to_string(j + 1),
                                         "answer " + std::to_string(j + 1), {},
                                         categories[j % categories.size()],
                                         numbered("author-", j % config.authors + 1, 2), "synthetic"));
  }
  d.matrix = irt::sample_responses(d.truth, d.subjects, config.seed ^ 0x9e3779b97f4a7c15ULL);
  return d;
}

json truth_to_json(const SyntheticData& d, std::uint64_t seed) {
  return {{"schema_version", 1},
          {"seed", seed},
          {"skills", keyed(d.truth.subject_ids, d.truth.skills)},
          {"difficulties", keyed(d.truth.question_ids, d.truth.difficulties)},
          {"discriminabilities", keyed(d.truth.question_ids, d.truth.discriminabilities)}};
}

}  // namespace stumpforge::simulate
