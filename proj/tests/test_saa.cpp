#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "momopt/problems.hpp"
#include "momopt/saa.hpp"
#include "momopt/samplers.hpp"

using namespace momopt;

namespace {

/// Same problem with the closed-form dispatch disabled, to force the
/// projected-gradient path.
StochasticProblem iterative_only(StochasticProblem p) {
  p.closed_form = StochasticProblem::ClosedForm::none;
  return p;
}

/// Refining grid-search oracle: repeated 400 x 400 sweeps, each zooming
/// into the best cell of the previous stage.
Action grid_search_2d(const StochasticProblem& problem,
                      const ScenarioSample& sample, Eigen::Vector2d lo,
                      Eigen::Vector2d hi, int stages) {
  const int G = 400;
  Eigen::Vector2d best = 0.5 * (lo + hi);
  for (int stage = 0; stage < stages; ++stage) {
    double best_val = std::numeric_limits<double>::infinity();
    Eigen::Vector2d h = (hi - lo) / (G - 1);
    for (int i = 0; i < G; ++i) {
      for (int j = 0; j < G; ++j) {
        Eigen::Vector2d x(lo[0] + i * h[0], lo[1] + j * h[1]);
        const double f = empirical_objective(problem, sample, x);
        if (f < best_val) {
          best_val = f;
          best = x;
        }
      }
    }
    lo = best - 2.0 * h;
    hi = best + 2.0 * h;
  }
  return best;
}

}  // namespace

TEST_CASE("mean estimation solves in closed form with zero iterations") {
  const auto spec = DistributionSpec::standard_gaussian(3, 1);
  const auto problem = make_mean_estimation(spec);
  const auto sample = draw(spec, 64);
  const auto res = saa_minimize(problem, sample);
  CHECK(res.used_closed_form);
  CHECK(res.iterations == 0);
  CHECK(res.converged);
  CHECK(res.x.isApprox(Eigen::VectorXd(sample.scenarios.rowwise().mean()),
                       1e-14));
}

TEST_CASE("iterative and closed-form solutions agree to 1e-8") {
  SolverOptions tight;
  tight.tolerance = 1e-12;
  tight.max_iters = 200000;

  SUBCASE("mean estimation") {
    const auto spec = DistributionSpec::standard_gaussian(3, 2);
    const auto problem = make_mean_estimation(spec);
    const auto sample = draw(spec, 128);
    const auto exact = saa_minimize(problem, sample);
    const auto iter = saa_minimize(iterative_only(problem), sample, tight);
    CHECK(iter.converged);
    CHECK((exact.x - iter.x).norm() < 1e-8);
  }

  SUBCASE("ridge regression") {
    const auto x_spec = DistributionSpec::standard_gaussian(3, 3);
    Eigen::VectorXd coef(3);
    coef << 1, -0.5, 0.2;
    const auto pair = DistributionSpec::regression_pair(
        x_spec, coef, NoiseSpec::gaussian(0.0, 0.5), 3);
    const auto problem = make_ridge_regression(pair);
    const auto sample = draw(pair, 256);
    const auto exact = saa_minimize(problem, sample);
    const auto iter = saa_minimize(iterative_only(problem), sample, tight);
    CHECK(iter.converged);
    CHECK((exact.x - iter.x).norm() < 1e-8);
  }

  SUBCASE("quadratic") {
    Eigen::MatrixXd A(2, 2);
    A << 2, 0.4, 0.4, 1.2;
    const auto spec = DistributionSpec::quadratic_pair(
        Eigen::MatrixXd::Identity(2, 2), A, 0, 4);
    const auto problem = make_quadratic(spec);
    const auto sample = draw(spec, 300);
    const auto exact = saa_minimize(problem, sample);
    const auto iter = saa_minimize(iterative_only(problem), sample, tight);
    CHECK(iter.converged);
    CHECK((exact.x - iter.x).norm() < 1e-8);
  }
}

TEST_CASE("portfolio SAA matches a refining grid-search oracle at d=2") {
  Eigen::VectorXd coef(2);
  coef << 0.25, -0.15;
  const auto bach = DistributionSpec::bachelier_pair(
      Eigen::MatrixXd::Identity(2, 2), coef, NoiseSpec::gaussian(0.0, 0.2), 5);
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(2, -1.0);
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(2, 1.0);
  const auto model = make_portfolio(bach, Loss::exponential(),
                                    Eigen::VectorXd::Zero(2),
                                    FeasibleSet::box(lo, hi));
  const auto sample = draw(bach, 400);

  SolverOptions opts;
  opts.tolerance = 1e-9;
  opts.max_iters = 50000;
  const auto res = saa_minimize(model.problem, sample, opts);
  CHECK(res.converged);
  CHECK(res.projected_gradient_norm < 1e-8);

  const Action oracle = grid_search_2d(model.problem, sample,
                                       Eigen::Vector2d(-1, -1),
                                       Eigen::Vector2d(1, 1), 3);
  CHECK((res.x - oracle).norm() < 1e-4);
}

TEST_CASE("objective is non-increasing under backtracking") {
  Eigen::VectorXd coef(2);
  coef << 0.3, 0.2;
  const auto bach = DistributionSpec::bachelier_pair(
      Eigen::MatrixXd::Identity(2, 2), coef, NoiseSpec::gaussian(0.0, 0.3), 6);
  const auto model =
      make_portfolio(bach, Loss::exponential(), Eigen::VectorXd::Zero(2));
  const auto sample = draw(bach, 200);
  std::vector<double> objectives;
  SolverOptions opts;
  opts.on_iterate = [&](std::size_t, double f) { objectives.push_back(f); };
  const auto res = saa_minimize(model.problem, sample, opts);
  CHECK(res.converged);
  REQUIRE(objectives.size() > 1);
  for (std::size_t i = 1; i < objectives.size(); ++i) {
    // non-increasing up to the objective's floating resolution
    CHECK(objectives[i] <=
          objectives[i - 1] + 1e-13 * std::max(1.0, std::abs(objectives[i - 1])));
  }
}

TEST_CASE("iteration cap returns a flagged, usable result") {
  Eigen::VectorXd coef(2);
  coef << 0.4, -0.3;
  const auto bach = DistributionSpec::bachelier_pair(
      Eigen::MatrixXd::Identity(2, 2), coef, NoiseSpec::none(), 7);
  const auto model =
      make_portfolio(bach, Loss::exponential(), Eigen::VectorXd::Zero(2));
  const auto sample = draw(bach, 100);
  SolverOptions opts;
  opts.max_iters = 2;
  opts.tolerance = 1e-14;
  const auto res = saa_minimize(model.problem, sample, opts);
  CHECK_FALSE(res.converged);
  CHECK(res.x.allFinite());
  CHECK(res.projected_gradient_norm > 0.0);
}

TEST_CASE("constrained solve stays feasible and stops at the boundary") {
  Eigen::VectorXd mu(2);
  mu << -2.0, 1.0;
  const auto spec =
      DistributionSpec::gaussian(mu, Eigen::MatrixXd::Identity(2, 2), 8);
  const auto problem =
      make_mean_estimation(spec, FeasibleSet::nonneg_orthant());
  const auto sample = draw(spec, 1000);
  const auto res = saa_minimize(problem, sample);
  CHECK(res.converged);
  CHECK(problem.feasible_set.contains(res.x));
  // empirical minimiser over the orthant is the projected sample mean
  const Eigen::VectorXd target =
      Eigen::VectorXd(sample.scenarios.rowwise().mean()).cwiseMax(0.0);
  CHECK((res.x - target).norm() < 1e-9);
}

TEST_CASE("solver option validation") {
  const auto spec = DistributionSpec::standard_gaussian(2, 9);
  const auto problem = make_mean_estimation(spec);
  const auto sample = draw(spec, 10);
  SolverOptions bad;
  bad.tolerance = 0.0;
  CHECK_THROWS_AS(saa_minimize(problem, sample, bad), std::invalid_argument);
  ScenarioSample empty;
  empty.scenarios.resize(2, 0);
  CHECK_THROWS_AS(saa_minimize(problem, empty), std::invalid_argument);
}
