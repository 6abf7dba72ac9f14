#pragma once

#include "stumpforge/domain.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stumpforge::irt {

/// Two-parameter logistic item parameters. Skills and difficulties lie in
/// [-1, 1], discriminabilities in [0, 1].
struct IrtParameters {
  std::vector<std::string> subject_ids;
  std::vector<std::string> question_ids;
  std::vector<double> skills;
  std::vector<double> difficulties;
  std::vector<double> discriminabilities;

  /// Throws ValidationError on length mismatch or out-of-range values.
  void validate() const;

  std::optional<std::size_t> subject_index(std::string_view id) const;
  std::optional<std::size_t> question_index(std::string_view id) const;
  std::optional<double> discriminability(std::string_view question_id) const;
};

/// One Gaussian factor q(z) = N(mean, exp(log_std)^2) on the unconstrained scale.
struct GaussianFactor {
  double mean = 0.0;
  double log_std = 0.0;
};

struct VariationalState {
  std::vector<GaussianFactor> skills;
  std::vector<GaussianFactor> difficulties;
  std::vector<GaussianFactor> discriminabilities;
  /// ELBO at the start of each completed epoch; front() is the initial state.
  std::vector<double> elbo_trace;
  /// ELBO of the state the fit returned.
  double final_elbo = 0.0;
  bool sign_flipped = false;

  /// Factors equal to the prior N(0, prior_std^2).
  static VariationalState at_prior(std::size_t subjects, std::size_t questions, double prior_std);
  std::size_t epochs_completed() const { return elbo_trace.size(); }
};

struct FitConfig {
  std::uint64_t seed = 0;
  int epochs = 200;
  double learning_rate = 0.05;
  int mc_samples = 8;
  double prior_std = 1.0;
  double convergence_tol = 1e-4;

  void validate() const;
};

struct FitResult {
  IrtParameters params;
  VariationalState state;
};

/// Per-question human and machine difficulties from two separate fits.
struct DualDifficulty {
  std::vector<std::string> question_ids;
  std::vector<double> human;
  std::vector<double> machine;

  std::optional<std::size_t> index(std::string_view question_id) const;
};

struct DualFit {
  FitResult human;
  FitResult machine;
  DualDifficulty dual;
};

double squash_symmetric(double z);     // tanh, onto (-1, 1)
double squash_unit(double z);          // logistic, onto (0, 1)

double response_probability(double skill, double difficulty, double discriminability);

/// Sum over present cells of log P(r | params). Throws on dimension mismatch.
double log_likelihood(const ResponseMatrix& matrix, const IrtParameters& params);

/// KL(N(mean, sd^2) || N(0, prior_std^2)).
double gaussian_kl(const GaussianFactor& f, double prior_std);

/// Monte-Carlo ELBO with config.mc_samples draws seeded from config.seed.
/// Throws FitDivergedError on a non-finite value.
double elbo(const ResponseMatrix& matrix, const VariationalState& state, const FitConfig& config);

/// Constrained transforms of the variational means.
IrtParameters constrained_means(const ResponseMatrix& matrix, const VariationalState& state);

FitResult fit(const ResponseMatrix& matrix, const FitConfig& config = {});

/// Separate fits on the human rows and on the machine rows; the dual table
/// covers questions answered by both kinds, in matrix column order.
DualFit fit_dual(const ResponseMatrix& matrix, const FitConfig& config = {});

std::vector<std::vector<double>> predict_matrix(const IrtParameters& params);

/// Draws a binary matrix from the model; every cell present.
ResponseMatrix sample_responses(const IrtParameters& params,
                                const std::vector<Subject>& subjects, std::uint64_t seed);

double pearson(const std::vector<double>& a, const std::vector<double>& b);
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace stumpforge::irt
