#include "stumpforge/irt.hpp"

#include "stumpforge/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace stumpforge::irt {

namespace {

struct PresentCell {
  std::uint32_t subject;
  std::uint32_t question;
  bool correct;
};

std::vector<PresentCell> present_cells(const ResponseMatrix& m) {
  std::vector<PresentCell> cells;
  cells.reserve(m.present_count());
  for (std::size_t i = 0; i < m.subject_count(); ++i)
    for (std::size_t j = 0; j < m.question_count(); ++j)
      if (auto c = m.at(i, j))
        cells.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), *c});
  return cells;
}

// log sigmoid(x), stable for large |x|.
double log_sigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double cell_log_prob(double logit, bool correct) {
  return correct ? log_sigmoid(logit) : log_sigmoid(-logit);
}

void check_dims(const ResponseMatrix& m, const VariationalState& s) {
  if (s.skills.size() != m.subject_count() || s.difficulties.size() != m.question_count() ||
      s.discriminabilities.size() != m.question_count())
    throw ValidationError("variational state dimensions do not match the response matrix");
}

// One set of reparameterized draws z = mean + sd * eps for every latent.
struct Draw {
  std::vector<double> eps_skill, eps_diff, eps_disc;
};

Draw draw_noise(std::mt19937_64& rng, std::size_t subjects, std::size_t questions) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Draw d;
  d.eps_skill.resize(subjects);
  d.eps_diff.resize(questions);
  d.eps_disc.resize(questions);
  for (auto& e : d.eps_skill) e = normal(rng);
  for (auto& e : d.eps_diff) e = normal(rng);
  for (auto& e : d.eps_disc) e = normal(rng);
  return d;
}

double latent(const GaussianFactor& f, double eps) { return f.mean + std::exp(f.log_std) * eps; }

double expected_log_likelihood(const std::vector<PresentCell>& cells, const VariationalState& s,
                               const std::vector<Draw>& draws) {
  if (cells.empty()) return 0.0;
  const std::size_t I = s.skills.size();
  const std::size_t J = s.difficulties.size();
  std::vector<double> skill(I), diff(J), disc(J);
  double total = 0.0;
  for (const auto& d : draws) {
    for (std::size_t i = 0; i < I; ++i) skill[i] = squash_symmetric(latent(s.skills[i], d.eps_skill[i]));
    for (std::size_t j = 0; j < J; ++j) {
      diff[j] = squash_symmetric(latent(s.difficulties[j], d.eps_diff[j]));
      disc[j] = squash_unit(latent(s.discriminabilities[j], d.eps_disc[j]));
    }
    double sample = 0.0;
    for (const auto& c : cells)
      sample += cell_log_prob(disc[c.question] * (skill[c.subject] - diff[c.question]), c.correct);
    total += sample;
  }
  return total / static_cast<double>(draws.size());
}

double total_kl(const VariationalState& s, double prior_std) {
  double kl = 0.0;
  for (const auto& f : s.skills) kl += gaussian_kl(f, prior_std);
  for (const auto& f : s.difficulties) kl += gaussian_kl(f, prior_std);
  for (const auto& f : s.discriminabilities) kl += gaussian_kl(f, prior_std);
  return kl;
}

std::vector<Draw> seeded_draws(std::uint64_t seed, int samples, std::size_t I, std::size_t J) {
  std::mt19937_64 rng(seed);
  std::vector<Draw> draws;
  draws.reserve(static_cast<std::size_t>(samples));
  for (int s = 0; s < samples; ++s) draws.push_back(draw_noise(rng, I, J));
  return draws;
}

double elbo_with(const std::vector<PresentCell>& cells, const VariationalState& s,
                 const std::vector<Draw>& draws, double prior_std) {
  const double value = expected_log_likelihood(cells, s, draws) - total_kl(s, prior_std);
  if (!std::isfinite(value)) throw FitDivergedError("ELBO is not finite");
  return value;
}

// Gradient of the ELBO w.r.t. every factor's (mean, log_std), laid out as
// [skills..., difficulties..., discriminabilities...] pairs.
std::vector<double> elbo_gradient(const std::vector<PresentCell>& cells, const VariationalState& s,
                                  const std::vector<Draw>& draws, double prior_std) {
  const std::size_t I = s.skills.size();
  const std::size_t J = s.difficulties.size();
  const std::size_t n = I + 2 * J;
  std::vector<double> grad(2 * n, 0.0);

  std::vector<double> skill(I), diff(J), disc(J);
  std::vector<double> g_skill(I), g_diff(J), g_disc(J);
  const double inv_samples = 1.0 / static_cast<double>(draws.size());

  for (const auto& d : draws) {
    for (std::size_t i = 0; i < I; ++i) skill[i] = squash_symmetric(latent(s.skills[i], d.eps_skill[i]));
    for (std::size_t j = 0; j < J; ++j) {
      diff[j] = squash_symmetric(latent(s.difficulties[j], d.eps_diff[j]));
      disc[j] = squash_unit(latent(s.discriminabilities[j], d.eps_disc[j]));
    }
    std::fill(g_skill.begin(), g_skill.end(), 0.0);
    std::fill(g_diff.begin(), g_diff.end(), 0.0);
    std::fill(g_disc.begin(), g_disc.end(), 0.0);

    // d log p / d logit = r - sigmoid(logit)
    for (const auto& c : cells) {
      const double gap = skill[c.subject] - diff[c.question];
      const double logit = disc[c.question] * gap;
      const double residual = (c.correct ? 1.0 : 0.0) - squash_unit(logit);
      g_skill[c.subject] += residual * disc[c.question];
      g_diff[c.question] -= residual * disc[c.question];
      g_disc[c.question] += residual * gap;
    }

    auto accumulate = [&](std::size_t slot, const GaussianFactor& f, double eps, double d_value,
                          double d_squash) {
      const double g = d_value * d_squash;
      grad[2 * slot] += g * inv_samples;
      grad[2 * slot + 1] += g * eps * std::exp(f.log_std) * inv_samples;
    };
    for (std::size_t i = 0; i < I; ++i)
      accumulate(i, s.skills[i], d.eps_skill[i], g_skill[i], 1.0 - skill[i] * skill[i]);
    for (std::size_t j = 0; j < J; ++j) {
      accumulate(I + j, s.difficulties[j], d.eps_diff[j], g_diff[j], 1.0 - diff[j] * diff[j]);
      accumulate(I + J + j, s.discriminabilities[j], d.eps_disc[j], g_disc[j],
                 disc[j] * (1.0 - disc[j]));
    }
  }

  // Exact KL gradients.
  const double prior_var = prior_std * prior_std;
  auto kl_grad = [&](std::size_t slot, const GaussianFactor& f) {
    const double var = std::exp(2.0 * f.log_std);
    grad[2 * slot] -= f.mean / prior_var;
    grad[2 * slot + 1] -= var / prior_var - 1.0;
  };
  for (std::size_t i = 0; i < I; ++i) kl_grad(i, s.skills[i]);
  for (std::size_t j = 0; j < J; ++j) {
    kl_grad(I + j, s.difficulties[j]);
    kl_grad(I + J + j, s.discriminabilities[j]);
  }
  return grad;
}

GaussianFactor& factor_at(VariationalState& s, std::size_t slot) {
  const std::size_t I = s.skills.size();
  const std::size_t J = s.difficulties.size();
  if (slot < I) return s.skills[slot];
  if (slot < I + J) return s.difficulties[slot - I];
  return s.discriminabilities[slot - I - J];
}

class Adam {
 public:
  Adam(std::size_t n, double lr) : lr_(lr), m_(n, 0.0), v_(n, 0.0) {}

  // Ascent step.
  void step(VariationalState& s, const std::vector<double>& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, t_);
    const double c2 = 1.0 - std::pow(kBeta2, t_);
    for (std::size_t k = 0; k < grad.size(); ++k) {
      if (!std::isfinite(grad[k])) throw FitDivergedError("ELBO gradient is not finite");
      m_[k] = kBeta1 * m_[k] + (1.0 - kBeta1) * grad[k];
      v_[k] = kBeta2 * v_[k] + (1.0 - kBeta2) * grad[k] * grad[k];
      const double update = lr_ * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + kEps);
      GaussianFactor& f = factor_at(s, k / 2);
      if (k % 2 == 0) f.mean += update;
      else f.log_std += update;
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
  double lr_;
  int t_ = 0;
  std::vector<double> m_, v_;
};

std::vector<double> subject_accuracy(const ResponseMatrix& m) {
  std::vector<double> acc(m.subject_count(), 0.0);
  for (std::size_t i = 0; i < m.subject_count(); ++i) {
    double right = 0.0, seen = 0.0;
    for (std::size_t j = 0; j < m.question_count(); ++j) {
      if (auto c = m.at(i, j)) {
        seen += 1.0;
        if (*c) right += 1.0;
      }
    }
    acc[i] = seen > 0.0 ? right / seen : 0.0;
  }
  return acc;
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  std::size_t k = 0;
  while (k < order.size()) {
    std::size_t e = k;
    while (e + 1 < order.size() && v[order[e + 1]] == v[order[k]]) ++e;
    const double avg = (static_cast<double>(k) + static_cast<double>(e)) / 2.0 + 1.0;
    for (std::size_t t = k; t <= e; ++t) r[order[t]] = avg;
    k = e + 1;
  }
  return r;
}

// Iterations over which the relative ELBO change is measured.
constexpr std::size_t kConvergenceWindow = 10;

}  // namespace

void IrtParameters::validate() const {
  if (skills.size() != subject_ids.size())
    throw ValidationError("skills length does not match subject count");
  if (difficulties.size() != question_ids.size() || discriminabilities.size() != question_ids.size())
    throw ValidationError("question parameter lengths do not match question count");
  for (double b : skills)
    if (!(b >= -1.0 && b <= 1.0)) throw ValidationError("skill outside [-1, 1]");
  for (double t : difficulties)
    if (!(t >= -1.0 && t <= 1.0)) throw ValidationError("difficulty outside [-1, 1]");
  for (double g : discriminabilities)
    if (!(g >= 0.0 && g <= 1.0)) throw ValidationError("discriminability outside [0, 1]");
}

std::optional<std::size_t> IrtParameters::subject_index(std::string_view id) const {
  for (std::size_t i = 0; i < subject_ids.size(); ++i)
    if (subject_ids[i] == id) return i;
  return std::nullopt;
}

std::optional<std::size_t> IrtParameters::question_index(std::string_view id) const {
  for (std::size_t j = 0; j < question_ids.size(); ++j)
    if (question_ids[j] == id) return j;
  return std::nullopt;
}

std::optional<double> IrtParameters::discriminability(std::string_view question_id) const {
  if (auto j = question_index(question_id)) return discriminabilities[*j];
  return std::nullopt;
}

VariationalState VariationalState::at_prior(std::size_t subjects, std::size_t questions,
                                            double prior_std) {
  const GaussianFactor prior{0.0, std::log(prior_std)};
  VariationalState s;
  s.skills.assign(subjects, prior);
  s.difficulties.assign(questions, prior);
  s.discriminabilities.assign(questions, prior);
  return s;
}

void FitConfig::validate() const {
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (mc_samples < 1) throw ValidationError("mc_samples must be >= 1");
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (!(prior_std > 0.0)) throw ValidationError("prior_std must be positive");
  if (!(convergence_tol >= 0.0)) throw ValidationError("convergence_tol must be non-negative");
}

std::optional<std::size_t> DualDifficulty::index(std::string_view question_id) const {
  for (std::size_t j = 0; j < question_ids.size(); ++j)
    if (question_ids[j] == question_id) return j;
  return std::nullopt;
}

double squash_symmetric(double z) { return std::tanh(z); }

double squash_unit(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double response_probability(double skill, double difficulty, double discriminability) {
  return squash_unit(discriminability * (skill - difficulty));
}

double log_likelihood(const ResponseMatrix& matrix, const IrtParameters& params) {
  if (params.skills.size() != matrix.subject_count() ||
      params.difficulties.size() != matrix.question_count() ||
      params.discriminabilities.size() != matrix.question_count())
    throw ValidationError("parameter dimensions do not match the response matrix");
  double total = 0.0;
  for (std::size_t i = 0; i < matrix.subject_count(); ++i)
    for (std::size_t j = 0; j < matrix.question_count(); ++j)
      if (auto c = matrix.at(i, j))
        total += cell_log_prob(
            params.discriminabilities[j] * (params.skills[i] - params.difficulties[j]), *c);
  return total;
}

double gaussian_kl(const GaussianFactor& f, double prior_std) {
  const double var = std::exp(2.0 * f.log_std);
  const double prior_var = prior_std * prior_std;
  return std::log(prior_std) - f.log_std + (var + f.mean * f.mean) / (2.0 * prior_var) - 0.5;
}

double elbo(const ResponseMatrix& matrix, const VariationalState& state, const FitConfig& config) {
  config.validate();
  check_dims(matrix, state);
  const auto draws = seeded_draws(config.seed, config.mc_samples, matrix.subject_count(),
                                  matrix.question_count());
  return elbo_with(present_cells(matrix), state, draws, config.prior_std);
}

IrtParameters constrained_means(const ResponseMatrix& matrix, const VariationalState& state) {
  check_dims(matrix, state);
  IrtParameters p;
  for (const auto& s : matrix.subjects()) p.subject_ids.push_back(s.id);
  p.question_ids = matrix.questions();
  for (const auto& f : state.skills) p.skills.push_back(squash_symmetric(f.mean));
  for (const auto& f : state.difficulties) p.difficulties.push_back(squash_symmetric(f.mean));
  for (const auto& f : state.discriminabilities) p.discriminabilities.push_back(squash_unit(f.mean));
  p.validate();
  return p;
}

FitResult fit(const ResponseMatrix& matrix, const FitConfig& config) {
  config.validate();
  matrix.validate_for_fit();

  const std::size_t I = matrix.subject_count();
  const std::size_t J = matrix.question_count();
  const auto cells = present_cells(matrix);

  // The trace is evaluated on one fixed set of draws so successive entries
  // differ only through the parameters; gradient draws come from a separate
  // stream.
  const auto eval_draws = seeded_draws(config.seed, config.mc_samples, I, J);
  std::mt19937_64 grad_rng(config.seed ^ 0x9E3779B97F4A7C15ULL);

  VariationalState state = VariationalState::at_prior(I, J, config.prior_std);
  Adam adam(2 * (I + 2 * J), config.learning_rate);

  VariationalState best = state;
  double best_elbo = -std::numeric_limits<double>::infinity();

  auto run_epoch = [&] {
    const double value = elbo_with(cells, state, eval_draws, config.prior_std);
    state.elbo_trace.push_back(value);
    if (value > best_elbo) {
      best_elbo = value;
      best = state;
    }
    std::vector<Draw> draws;
    draws.reserve(static_cast<std::size_t>(config.mc_samples));
    for (int s = 0; s < config.mc_samples; ++s) draws.push_back(draw_noise(grad_rng, I, J));
    adam.step(state, elbo_gradient(cells, state, draws, config.prior_std));
  };

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    run_epoch();
    const auto& trace = state.elbo_trace;
    if (trace.size() > kConvergenceWindow) {
      const double then = trace[trace.size() - 1 - kConvergenceWindow];
      const double rel = std::abs(trace.back() - then) / std::max(std::abs(then), 1.0);
      if (rel < config.convergence_tol) break;
    }
  }

  const double last = elbo_with(cells, state, eval_draws, config.prior_std);
  if (last >= best_elbo) {
    best_elbo = last;
  } else {
    auto trace = std::move(state.elbo_trace);
    state = best;
    state.elbo_trace = std::move(trace);
  }

  // With discriminabilities constrained non-negative the only residual
  // symmetry is a joint sign flip of skills and difficulties.
  if (I > 1 && spearman(constrained_means(matrix, state).skills, subject_accuracy(matrix)) < 0.0) {
    for (auto& f : state.skills) f.mean = -f.mean;
    for (auto& f : state.difficulties) f.mean = -f.mean;
    state.sign_flipped = true;
    run_epoch();
    best_elbo = elbo_with(cells, state, eval_draws, config.prior_std);
  }

  state.final_elbo = best_elbo;
  FitResult result{constrained_means(matrix, state), std::move(state)};
  return result;
}

DualFit fit_dual(const ResponseMatrix& matrix, const FitConfig& config) {
  ResponseMatrix humans = matrix.select_kind(SubjectKind::Human);
  ResponseMatrix machines = matrix.select_kind(SubjectKind::Machine);
  if (humans.subject_count() == 0) throw ValidationError("no human subjects in the matrix");
  if (machines.subject_count() == 0) throw ValidationError("no machine subjects in the matrix");
  humans = humans.drop_empty_questions();
  machines = machines.drop_empty_questions();

  DualFit out{fit(humans, config), fit(machines, config), {}};
  for (const auto& q : matrix.questions()) {
    auto h = out.human.params.question_index(q);
    auto c = out.machine.params.question_index(q);
    if (!h || !c) continue;
    out.dual.question_ids.push_back(q);
    out.dual.human.push_back(out.human.params.difficulties[*h]);
    out.dual.machine.push_back(out.machine.params.difficulties[*c]);
  }
  return out;
}

std::vector<std::vector<double>> predict_matrix(const IrtParameters& params) {
  std::vector<std::vector<double>> grid(params.skills.size(),
                                        std::vector<double>(params.difficulties.size()));
  for (std::size_t i = 0; i < params.skills.size(); ++i)
    for (std::size_t j = 0; j < params.difficulties.size(); ++j)
      grid[i][j] = response_probability(params.skills[i], params.difficulties[j],
                                        params.discriminabilities[j]);
  return grid;
}

ResponseMatrix sample_responses(const IrtParameters& params, const std::vector<Subject>& subjects,
                                std::uint64_t seed) {
  if (subjects.size() != params.skills.size())
    throw ValidationError("subject list does not match skill count");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ResponseMatrix m(subjects, params.question_ids);
  const auto grid = predict_matrix(params);
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (std::size_t j = 0; j < grid[i].size(); ++j) m.set(i, j, unit(rng) < grid[i][j]);
  return m;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw ValidationError("pearson needs two equal-length samples");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sab += (a[k] - ma) * (b[k] - mb);
    saa += (a[k] - ma) * (a[k] - ma);
    sbb += (b[k] - mb) * (b[k] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  return pearson(ranks(a), ranks(b));
}

}  // namespace stumpforge::irt
