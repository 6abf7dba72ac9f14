#include "stumpforge/error.hpp"
#include "stumpforge/irt.hpp"
#include "stumpforge/scoring.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace stumpforge;
using namespace stumpforge::irt;

namespace {

// Independent oracle: the logistic written out from scratch.
double oracle_p(double beta, double theta, double gamma) {
  return 1.0 / (1.0 + std::exp(-gamma * (beta - theta)));
}

IrtParameters params(std::vector<std::string> subjects, std::vector<std::string> questions,
                     std::vector<double> skills, std::vector<double> diffs, std::vector<double> gammas) {
  IrtParameters p;
  p.subject_ids = std::move(subjects);
  p.question_ids = std::move(questions);
  p.skills = std::move(skills);
  p.difficulties = std::move(diffs);
  p.discriminabilities = std::move(gammas);
  return p;
}

ResponseMatrix full(const std::vector<Subject>& subs, const std::vector<std::string>& qs,
                    const std::vector<std::vector<int>>& cells) {
  ResponseMatrix m(subs, qs);
  for (std::size_t i = 0; i < cells.size(); ++i)
    for (std::size_t j = 0; j < cells[i].size(); ++j)
      if (cells[i][j] >= 0) m.set(i, j, cells[i][j] == 1);
  return m;
}

void check_in_range(const IrtParameters& p) {
  for (double v : p.skills) CHECK((v >= -1.0 && v <= 1.0));
  for (double v : p.difficulties) CHECK((v >= -1.0 && v <= 1.0));
  for (double v : p.discriminabilities) CHECK((v >= 0.0 && v <= 1.0));
}

}  // namespace

TEST_CASE("response_probability fixed points") {
  CHECK(response_probability(0.3, 0.3, 0.9) == 0.5);
  CHECK(response_probability(-1.0, 1.0, 0.0) == 0.5);
  CHECK(std::abs(response_probability(1.0, 0.0, 1.0) - 0.7310585786) < 1e-9);
}

TEST_CASE("response_probability is monotone and symmetric over random triples") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> sym(-1.0, 1.0), unit(0.001, 1.0), step(1e-3, 0.5);
  for (int k = 0; k < 1000; ++k) {
    const double b = sym(rng), t = sym(rng), g = unit(rng), d = step(rng);
    const double p = response_probability(b, t, g);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
    CHECK(std::abs(p - oracle_p(b, t, g)) < 1e-15);
    CHECK(response_probability(b + d, t, g) > p);
    CHECK(response_probability(b, t + d, g) < p);
    // Swapping skill and difficulty negates the exponent.
    CHECK(std::abs(p + response_probability(t, b, g) - 1.0) < 1e-12);
  }
}

TEST_CASE("squashing maps onto the constrained ranges") {
  CHECK(squash_symmetric(0.0) == 0.0);
  CHECK(squash_unit(0.0) == 0.5);
  CHECK(squash_symmetric(50.0) <= 1.0);
  CHECK(squash_symmetric(-50.0) >= -1.0);
  CHECK(squash_unit(-50.0) >= 0.0);
}

TEST_CASE("log_likelihood matches a per-cell oracle") {
  const std::vector<Subject> subs{fixtures::human("a"), fixtures::human("b")};
  SUBCASE("no present cells") {
    ResponseMatrix m(subs, {"q1"});
    CHECK(log_likelihood(m, params({"a", "b"}, {"q1"}, {0.1, 0.2}, {0.0}, {0.5})) == 0.0);
  }
  SUBCASE("single cell at beta == theta") {
    ResponseMatrix m({fixtures::human("a")}, {"q1"});
    m.set(0, 0, true);
    CHECK(log_likelihood(m, params({"a"}, {"q1"}, {0.4}, {0.4}, {0.7})) == doctest::Approx(std::log(0.5)));
  }
  SUBCASE("2x2 all present") {
    const auto m = full(subs, {"q1", "q2"}, {{1, 0}, {0, 1}});
    const auto p = params({"a", "b"}, {"q1", "q2"}, {0.6, -0.2}, {-0.3, 0.5}, {0.8, 0.25});
    double oracle = 0.0;
    oracle += std::log(oracle_p(0.6, -0.3, 0.8));
    oracle += std::log(1.0 - oracle_p(0.6, 0.5, 0.25));
    oracle += std::log(1.0 - oracle_p(-0.2, -0.3, 0.8));
    oracle += std::log(oracle_p(-0.2, 0.5, 0.25));
    CHECK(log_likelihood(m, p) == doctest::Approx(oracle).epsilon(1e-14));
  }
  SUBCASE("dimension mismatch") {
    const auto m = full(subs, {"q1"}, {{1}, {0}});
    CHECK_THROWS_AS(log_likelihood(m, params({"a"}, {"q1"}, {0.0}, {0.0}, {0.5})), ValidationError);
  }
}

TEST_CASE("gaussian_kl matches the closed form") {
  for (double mean : {-1.3, 0.0, 0.7}) {
    for (double log_std : {-1.0, 0.0, 0.4}) {
      for (double prior : {0.5, 1.0, 2.0}) {
        const double s = std::exp(log_std);
        const double oracle = std::log(prior / s) + (s * s + mean * mean) / (2.0 * prior * prior) - 0.5;
        CHECK(gaussian_kl({mean, log_std}, prior) == doctest::Approx(oracle).epsilon(1e-12));
        CHECK(gaussian_kl({mean, log_std}, prior) >= 0.0);
      }
    }
  }
  CHECK(gaussian_kl({0.0, 0.0}, 1.0) == 0.0);
}

TEST_CASE("elbo without data is minus the summed KL") {
  const std::vector<Subject> subs{fixtures::human("a"), fixtures::human("b")};
  ResponseMatrix empty(subs, {"q1", "q2", "q3"});
  FitConfig cfg;
  auto state = VariationalState::at_prior(2, 3, cfg.prior_std);
  CHECK(elbo(empty, state, cfg) == 0.0);
  state.skills[0] = {0.5, -0.3};
  state.discriminabilities[2] = {-1.0, 0.2};
  const double expected = -(gaussian_kl(state.skills[0], 1.0) + gaussian_kl(state.discriminabilities[2], 1.0));
  CHECK(elbo(empty, state, cfg) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(elbo(empty, state, cfg) <= 0.0);
}

TEST_CASE("elbo is reproducible for a fixed seed") {
  const std::vector<Subject> subs{fixtures::human("a"), fixtures::human("b")};
  const auto m = full(subs, {"q1", "q2", "q3"}, {{1, 0, 1}, {0, -1, 1}});
  FitConfig cfg;
  cfg.seed = 42;
  auto state = VariationalState::at_prior(2, 3, 1.0);
  state.skills[1] = {0.3, -0.5};
  const double a = elbo(m, state, cfg);
  const double b = elbo(m, state, cfg);
  CHECK(a == b);
  cfg.seed = 43;
  CHECK(elbo(m, state, cfg) != a);
}

TEST_CASE("FitConfig validation") {
  FitConfig c;
  CHECK_NOTHROW(c.validate());
  c.epochs = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.mc_samples = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.prior_std = -1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.convergence_tol = -1e-3;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("fit on an all-correct matrix makes every question easy") {
  std::vector<Subject> subs;
  std::vector<std::vector<int>> cells;
  for (int i = 0; i < 6; ++i) {
    subs.push_back(fixtures::human("s" + std::to_string(i)));
    cells.push_back(std::vector<int>(5, 1));
  }
  const auto m = full(subs, {"q1", "q2", "q3", "q4", "q5"}, cells);
  const auto r = fit(m);
  check_in_range(r.params);
  const double median_skill = scoring::median(r.params.skills);
  for (double t : r.params.difficulties) CHECK(t < median_skill);
  for (const auto& row : predict_matrix(r.params))
    for (double p : row) CHECK(p > 0.5);
  CHECK(r.state.final_elbo >= r.state.elbo_trace.front());
}

TEST_CASE("single-cell fit stays near the prior and agrees with a grid posterior") {
  ResponseMatrix m({fixtures::human("a")}, {"q"});
  m.set(0, 0, true);
  const auto r = fit(m);
  check_in_range(r.params);
  CHECK(std::abs(r.params.skills[0] - 0.0) < 0.25);
  CHECK(std::abs(r.params.difficulties[0] - 0.0) < 0.25);
  CHECK(std::abs(r.params.discriminabilities[0] - 0.5) < 0.25);

  // Oracle: posterior means of the constrained values by quadrature over the
  // unconstrained N(0, 1)^3 prior with likelihood P(correct).
  const int n = 61;
  const double lo = -5.0, step = 10.0 / (n - 1);
  double z = 0.0, mb = 0.0, mt = 0.0, mg = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        const double u = lo + a * step, v = lo + b * step, w = lo + c * step;
        const double beta = std::tanh(u), theta = std::tanh(v), gamma = 1.0 / (1.0 + std::exp(-w));
        const double weight = std::exp(-0.5 * (u * u + v * v + w * w)) * oracle_p(beta, theta, gamma);
        z += weight;
        mb += weight * beta;
        mt += weight * theta;
        mg += weight * gamma;
      }
  mb /= z;
  mt /= z;
  mg /= z;
  CHECK(mb > 0.0);
  CHECK(mt < 0.0);
  CHECK(std::abs(r.params.skills[0] - mb) < 0.1);
  CHECK(std::abs(r.params.difficulties[0] - mt) < 0.1);
  CHECK(std::abs(r.params.discriminabilities[0] - mg) < 0.1);
  // A correct response nudges skill up and difficulty down.
  CHECK(r.params.skills[0] > 0.0);
  CHECK(r.params.difficulties[0] < 0.0);
}

TEST_CASE("fit is bit-reproducible and keeps outputs in range") {
  const std::vector<Subject> subs{fixtures::human("a"), fixtures::human("b"), fixtures::human("c")};
  const auto m = full(subs, {"q1", "q2", "q3", "q4"}, {{1, 1, 0, 1}, {0, 1, 0, -1}, {0, 0, 0, 1}});
  FitConfig cfg;
  cfg.seed = 5;
  const auto a = fit(m, cfg);
  const auto b = fit(m, cfg);
  CHECK(a.params.skills == b.params.skills);
  CHECK(a.params.difficulties == b.params.difficulties);
  CHECK(a.params.discriminabilities == b.params.discriminabilities);
  CHECK(a.state.elbo_trace == b.state.elbo_trace);
  check_in_range(a.params);
  CHECK(a.state.final_elbo >= a.state.elbo_trace.front());
  CHECK(a.state.epochs_completed() == a.state.elbo_trace.size());
  CHECK(a.state.epochs_completed() <= static_cast<std::size_t>(cfg.epochs));
  for (const auto& f : a.state.skills) CHECK(std::exp(f.log_std) > 0.0);
}

TEST_CASE("fitted skills rank with accuracy") {
  std::vector<Subject> subs;
  std::vector<std::vector<int>> cells;
  for (int i = 0; i < 5; ++i) {
    subs.push_back(fixtures::human("s" + std::to_string(i)));
    std::vector<int> row(10);
    for (int j = 0; j < 10; ++j) row[j] = j < 2 * i + 1 ? 1 : 0;
    cells.push_back(row);
  }
  std::vector<std::string> qs;
  for (int j = 0; j < 10; ++j) qs.push_back("q" + std::to_string(j));
  const auto r = fit(full(subs, qs, cells));
  for (int i = 1; i < 5; ++i) CHECK(r.params.skills[i] > r.params.skills[i - 1]);
}

TEST_CASE("fit rejects invalid matrices") {
  ResponseMatrix m({fixtures::human("a")}, {"q1", "q2"});
  m.set(0, 0, true);
  CHECK_THROWS_AS(fit(m), ValidationError);
  CHECK_THROWS_AS(fit(ResponseMatrix{}), ValidationError);
}

TEST_CASE("fit_dual separates human and machine difficulty") {
  std::vector<Subject> subs;
  std::vector<std::vector<int>> cells;
  // q0: humans right, machines wrong. Other questions mixed.
  for (int i = 0; i < 8; ++i) {
    subs.push_back(fixtures::human("h" + std::to_string(i)));
    cells.push_back({1, i % 2, (i / 2) % 2, 1});
  }
  for (int i = 0; i < 4; ++i) {
    subs.push_back(fixtures::machine("m" + std::to_string(i)));
    cells.push_back({0, i % 2, 1, (i / 2) % 2});
  }
  const auto m = full(subs, {"q0", "q1", "q2", "q3"}, cells);
  const auto d = fit_dual(m);
  const auto j = d.dual.index("q0");
  REQUIRE(j.has_value());
  CHECK(d.dual.machine[*j] > d.dual.human[*j]);
  CHECK(scoring::classify(d.dual.human[*j], d.dual.machine[*j], 0.0) ==
        scoring::QuadrantLabel::StumpsOnlyMachines);
  for (double v : d.dual.human) CHECK((v >= -1.0 && v <= 1.0));
  for (double v : d.dual.machine) CHECK((v >= -1.0 && v <= 1.0));
}

TEST_CASE("fit_dual gives matching difficulties for identical human and machine rows") {
  std::vector<Subject> subs;
  std::vector<std::vector<int>> rows{{1, 0, 1, 1}, {0, 0, 1, 0}, {1, 1, 1, 0}};
  std::vector<std::vector<int>> cells;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    subs.push_back(fixtures::human("h" + std::to_string(i)));
    cells.push_back(rows[i]);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    subs.push_back(fixtures::machine("m" + std::to_string(i)));
    cells.push_back(rows[i]);
  }
  const auto d = fit_dual(full(subs, {"a", "b", "c", "d"}, cells));
  for (std::size_t j = 0; j < d.dual.question_ids.size(); ++j)
    CHECK(std::abs(d.dual.human[j] - d.dual.machine[j]) <= 0.05);
}

TEST_CASE("fit_dual requires both kinds") {
  const std::vector<Subject> subs{fixtures::human("a"), fixtures::human("b")};
  CHECK_THROWS_AS(fit_dual(full(subs, {"q"}, {{1}, {0}})), ValidationError);
}

TEST_CASE("fit_dual covers only questions answered by both kinds") {
  const std::vector<Subject> subs{fixtures::human("h"), fixtures::machine("m")};
  const auto d = fit_dual(full(subs, {"both", "human-only"}, {{1, 0}, {0, -1}}));
  CHECK(d.dual.question_ids == std::vector<std::string>{"both"});
}

TEST_CASE("predict_matrix matches the cell-wise oracle") {
  const auto zero = params({"a", "b"}, {"x", "y"}, {0.9, -0.9}, {0.1, -0.4}, {0.0, 0.0});
  for (const auto& row : predict_matrix(zero))
    for (double p : row) CHECK(p == 0.5);

  const auto one = params({"a"}, {"x"}, {0.2}, {-0.1}, {0.6});
  CHECK(predict_matrix(one)[0][0] == response_probability(0.2, -0.1, 0.6));

  const auto p = params({"a", "b", "c"}, {"x", "y", "z"}, {-0.8, 0.1, 0.9}, {0.5, -0.5, 0.0},
                        {0.3, 0.9, 0.6});
  const auto grid = predict_matrix(p);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(grid[i][j] == doctest::Approx(oracle_p(p.skills[i], p.difficulties[j], p.discriminabilities[j]))
                              .epsilon(1e-15));
}

TEST_CASE("IrtParameters validation rejects out-of-range values") {
  auto p = params({"a"}, {"x"}, {0.0}, {0.0}, {0.5});
  CHECK_NOTHROW(p.validate());
  p.skills[0] = 1.5;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p.skills[0] = 0.0;
  p.discriminabilities[0] = -0.1;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p.discriminabilities = {};
  CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("sampled accuracy is monotone in skill at scale") {
  std::vector<Subject> subs;
  auto p = params({}, {}, {}, {}, {});
  for (int i = 0; i < 5; ++i) {
    subs.push_back(fixtures::human("s" + std::to_string(i)));
    p.subject_ids.push_back(subs.back().id);
    p.skills.push_back(-1.0 + 0.5 * i);
  }
  for (int j = 0; j < 4000; ++j) {
    p.question_ids.push_back("q" + std::to_string(j));
    p.difficulties.push_back(0.0);
    p.discriminabilities.push_back(1.0);
  }
  const auto m = sample_responses(p, subs, 9);
  std::vector<double> acc;
  for (std::size_t i = 0; i < m.subject_count(); ++i) {
    double c = 0;
    for (std::size_t j = 0; j < m.question_count(); ++j) c += *m.at(i, j) ? 1 : 0;
    acc.push_back(c / static_cast<double>(m.question_count()));
  }
  for (std::size_t i = 1; i < acc.size(); ++i) CHECK(acc[i] > acc[i - 1]);
  CHECK(acc[2] == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("pearson and spearman") {
  CHECK(pearson({1, 2, 3}, {2, 4, 6}) == doctest::Approx(1.0));
  CHECK(pearson({1, 2, 3}, {3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(spearman({1, 2, 3, 4}, {1, 8, 27, 64}) == doctest::Approx(1.0));
  CHECK(spearman({1, 1, 2}, {1, 1, 2}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(pearson({1}, {1}), ValidationError);
}
