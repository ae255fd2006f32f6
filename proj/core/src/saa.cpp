#include "momopt/saa.hpp"

#include <cmath>
#include <stdexcept>

#include "momopt/problems.hpp"

namespace momopt {

double empirical_objective(const StochasticProblem& problem,
                           const ScenarioSample& sample, const Action& x) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < sample.size(); ++i) {
    sum += problem.objective(x, sample.scenario(i));
  }
  return sum / static_cast<double>(sample.size());
}

Eigen::VectorXd empirical_gradient(const StochasticProblem& problem,
                                   const ScenarioSample& sample,
                                   const Action& x) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(problem.dimension);
  for (Eigen::Index i = 0; i < sample.size(); ++i) {
    g += problem.gradient(x, sample.scenario(i));
  }
  return g / static_cast<double>(sample.size());
}

namespace {

/// Norm of the unit-step gradient mapping x - proj(x - g); zero exactly at
/// a constrained stationary point.
double projected_gradient_norm(const StochasticProblem& problem,
                               const Action& x, const Eigen::VectorXd& g) {
  return (x - problem.feasible_set.project(x - g)).norm();
}

}  // namespace

SaaResult saa_minimize(const StochasticProblem& problem,
                       const ScenarioSample& sample,
                       const SolverOptions& options) {
  if (sample.size() == 0) {
    throw std::invalid_argument("saa_minimize: empty sample");
  }
  if (options.tolerance <= 0.0 || options.max_iters == 0) {
    throw std::invalid_argument("saa_minimize: invalid solver options");
  }

  SaaResult result;
  const bool unconstrained =
      problem.feasible_set.kind() == FeasibleSet::Kind::all_of_space;

  Action x;
  if (problem.closed_form != StochasticProblem::ClosedForm::none) {
    const ClosedFormSolution cf = exact_saa_solution(problem, sample);
    if (unconstrained) {
      result.x = cf.action;
      result.used_closed_form = true;
      result.converged = true;
      result.projected_gradient_norm = projected_gradient_norm(
          problem, cf.action, empirical_gradient(problem, sample, cf.action));
      return result;
    }
    x = cf.action;  // projected closed form warm-starts the iterations
  } else if (options.initial_point.has_value()) {
    x = problem.feasible_set.project(*options.initial_point);
  } else {
    x = problem.feasible_set.project(
        Eigen::VectorXd::Zero(problem.dimension));
  }

  double fx = empirical_objective(problem, sample, x);
  double step = options.step_rule == SolverOptions::StepRule::fixed
                    ? options.fixed_step
                    : 1.0;

  for (std::size_t it = 0; it < options.max_iters; ++it) {
    const Eigen::VectorXd g = empirical_gradient(problem, sample, x);
    result.projected_gradient_norm = projected_gradient_norm(problem, x, g);
    result.iterations = it;
    if (result.projected_gradient_norm <= options.tolerance) {
      result.converged = true;
      break;
    }

    if (options.step_rule == SolverOptions::StepRule::fixed) {
      x = problem.feasible_set.project(x - step * g);
      fx = empirical_objective(problem, sample, x);
      if (options.on_iterate) options.on_iterate(it, fx);
      continue;
    }

    // Armijo backtracking on the projected step. Once the theoretical
    // decrease (c/t)|x - cand|^2 falls below the floating-point resolution
    // of f, sufficient decrease is unobservable; acceptance then switches
    // to a strict reduction of the projected-gradient norm, which keeps
    // converging far past the objective's ulp floor.
    bool accepted = false;
    double t = step * 2.0;  // allow growth after easy accepts
    for (int bt = 0; bt < 60; ++bt) {
      const Action cand = problem.feasible_set.project(x - t * g);
      const Eigen::VectorXd move = x - cand;
      if (move.isZero(0.0)) {
        t *= options.backtrack_rho;
        continue;
      }
      const double fc = empirical_objective(problem, sample, cand);
      const double decrease = options.armijo_c / t * move.squaredNorm();
      const double noise = 1e-14 * std::max(1.0, std::abs(fx));
      bool ok = false;
      if (decrease > noise) {
        ok = fc <= fx - decrease;
      } else if (fc <= fx + noise) {
        const Eigen::VectorXd gc = empirical_gradient(problem, sample, cand);
        ok = projected_gradient_norm(problem, cand, gc) <
             result.projected_gradient_norm;
      }
      if (ok) {
        x = cand;
        fx = fc;
        step = t;
        accepted = true;
        if (options.on_iterate) options.on_iterate(it, fx);
        break;
      }
      t *= options.backtrack_rho;
    }
    if (!accepted) {
      // progress has hit numerical resolution at this point
      break;
    }
  }

  result.x = x;
  const Eigen::VectorXd g = empirical_gradient(problem, sample, x);
  result.projected_gradient_norm = projected_gradient_norm(problem, x, g);
  result.converged = result.projected_gradient_norm <= options.tolerance;
  return result;
}

}  // namespace momopt
