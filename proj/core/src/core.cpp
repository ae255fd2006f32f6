#include "momopt/core.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <stdexcept>

namespace momopt {

ScenarioSample ScenarioSample::slice(Eigen::Index begin,
                                     Eigen::Index count) const {
  if (begin < 0 || count < 0 || begin + count > size()) {
    throw std::out_of_range("ScenarioSample::slice: range out of bounds");
  }
  ScenarioSample out;
  out.scenarios = scenarios.middleCols(begin, count);
  out.seed = seed;
  out.generator_id = generator_id + "[" + std::to_string(begin) + ":" +
                     std::to_string(begin + count) + ")";
  return out;
}

HNorm HNorm::identity(int dimension) {
  return from_matrix(Eigen::MatrixXd::Identity(dimension, dimension));
}

HNorm HNorm::from_matrix(const Eigen::MatrixXd& H) {
  if (H.rows() != H.cols()) {
    throw std::invalid_argument("HNorm: matrix must be square");
  }
  if (!H.isApprox(H.transpose(), 1e-10)) {
    throw std::invalid_argument("HNorm: matrix must be symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (H + H.transpose()));
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("HNorm: matrix is not positive definite");
  }
  HNorm h;
  h.H_ = 0.5 * (H + H.transpose());
  h.L_ = llt.matrixL();
  return h;
}

double HNorm::norm(const Eigen::VectorXd& z) const {
  if (z.size() != H_.rows()) {
    throw std::invalid_argument("HNorm::norm: dimension mismatch");
  }
  // ||z||^2 = z^T L L^T z = |L^T z|_2^2
  return (L_.transpose() * z).norm();
}

double HNorm::dual_norm(const Eigen::VectorXd& y) const {
  if (y.size() != H_.rows()) {
    throw std::invalid_argument("HNorm::dual_norm: dimension mismatch");
  }
  // ||y||_*^2 = y^T H^{-1} y = |L^{-1} y|_2^2
  return L_.triangularView<Eigen::Lower>().solve(y).norm();
}

Eigen::MatrixXd HNorm::whiten(const Eigen::MatrixXd& B) const {
  if (B.rows() != H_.rows() || B.cols() != H_.cols()) {
    throw std::invalid_argument("HNorm::whiten: dimension mismatch");
  }
  Eigen::MatrixXd tmp = L_.triangularView<Eigen::Lower>().solve(B);
  Eigen::MatrixXd out =
      L_.triangularView<Eigen::Lower>().solve(tmp.transpose()).transpose();
  return 0.5 * (out + out.transpose());
}

const char* to_string(ParameterTier tier) {
  switch (tier) {
    case ParameterTier::exact:
      return "exact";
    case ParameterTier::user_supplied:
      return "user";
    case ParameterTier::empirical:
      return "empirical";
  }
  return "unknown";
}

Diagnostics compute_diagnostics(const StochasticProblem& problem, double r) {
  if (!problem.ground_truth.has_value()) {
    throw std::invalid_argument("compute_diagnostics: ground truth missing");
  }
  if (r <= 0.0) {
    throw std::invalid_argument("compute_diagnostics: r must be > 0");
  }
  const auto& gt = *problem.ground_truth;
  const HNorm h = HNorm::from_matrix(gt.hessian);  // throws if H singular
  const Eigen::MatrixXd W = h.whiten(gt.grad_cov);

  Diagnostics d;
  d.r = r;
  d.N_G = W.trace() / (r * r);  // trace(H^{-1/2} G H^{-1/2}) = trace(H^{-1} G)
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(W);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("compute_diagnostics: eigensolver failed");
  }
  d.sigma2 = es.eigenvalues().maxCoeff();
  d.c_H = problem.c_H.value_or(1.0);
  return d;
}

HNorm estimate_hessian_norm(const StochasticProblem& problem,
                            const Action& pilot, const ScenarioSample& sample,
                            double regularization_scale) {
  if (sample.size() == 0) {
    throw std::invalid_argument("estimate_hessian_norm: empty sample");
  }
  if (!problem.feasible_set.contains(pilot)) {
    throw std::invalid_argument("estimate_hessian_norm: pilot infeasible");
  }
  const int d = problem.dimension;
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < sample.size(); ++i) {
    mean += problem.hessian(pilot, sample.scenario(i));
  }
  mean /= static_cast<double>(sample.size());
  mean = 0.5 * (mean + mean.transpose()).eval();

  const double mean_diag = mean.trace() / static_cast<double>(d);
  if (mean_diag <= 0.0) {
    throw std::runtime_error(
        "estimate_hessian_norm: degenerate norm (all-zero Hessian sample)");
  }
  const double floor = regularization_scale * mean_diag;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mean);
  if (es.eigenvalues().minCoeff() < floor) {
    mean += floor * Eigen::MatrixXd::Identity(d, d);
  }
  return HNorm::from_matrix(mean);
}

Eigen::VectorXd finite_difference_gradient(const StochasticProblem& problem,
                                           const Action& x, const Scenario& xi,
                                           double step) {
  const int d = problem.dimension;
  Eigen::VectorXd g(d);
  for (int i = 0; i < d; ++i) {
    const double h = step * std::max(1.0, std::abs(x[i]));
    Action xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (problem.objective(xp, xi) - problem.objective(xm, xi)) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd finite_difference_hessian(const StochasticProblem& problem,
                                          const Action& x, const Scenario& xi,
                                          double step) {
  const int d = problem.dimension;
  Eigen::MatrixXd H(d, d);
  for (int i = 0; i < d; ++i) {
    const double h = step * std::max(1.0, std::abs(x[i]));
    Action xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    H.col(i) =
        (problem.gradient(xp, xi) - problem.gradient(xm, xi)) / (2.0 * h);
  }
  return 0.5 * (H + H.transpose());
}

}  // namespace momopt
