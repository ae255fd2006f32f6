#pragma once

#include <functional>
#include <optional>

#include "momopt/problem.hpp"

namespace momopt {

/// Projected-gradient options for the sample-average-approximation solve.
struct SolverOptions {
  enum class StepRule { fixed, backtracking };

  std::size_t max_iters = 10000;
  StepRule step_rule = StepRule::backtracking;
  double fixed_step = 1e-2;
  double armijo_c = 1e-4;
  double backtrack_rho = 0.5;
  double tolerance = 1e-10;  // on the projected-gradient norm
  std::optional<Action> initial_point;  // default: projected zero

  /// Observer invoked after every accepted step with the new objective.
  std::function<void(std::size_t iteration, double objective)> on_iterate;
};

struct SaaResult {
  Action x;
  std::size_t iterations = 0;
  double projected_gradient_norm = 0.0;
  bool converged = false;
  bool used_closed_form = false;
};

/// Minimizer of the empirical mean (1/N) sum_i F(., xi_i) over the feasible
/// set. Dispatches to the exact linear-algebra solution when the problem
/// admits one (for constrained sets the closed form warm-starts the
/// iterative path); otherwise projected gradient descent with Armijo
/// backtracking. Hitting the iteration cap returns the last iterate with
/// converged = false, never silently.
SaaResult saa_minimize(const StochasticProblem& problem,
                       const ScenarioSample& sample,
                       const SolverOptions& options = {});

/// Empirical objective and gradient, exposed for reuse by tests and the
/// tournament pool generation.
double empirical_objective(const StochasticProblem& problem,
                           const ScenarioSample& sample, const Action& x);
Eigen::VectorXd empirical_gradient(const StochasticProblem& problem,
                                   const ScenarioSample& sample,
                                   const Action& x);

}  // namespace momopt
