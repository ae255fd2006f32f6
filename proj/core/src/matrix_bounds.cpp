#include "momopt/matrix_bounds.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "momopt/stats.hpp"

namespace momopt {

namespace {

double lambda_min(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  return es.eigenvalues().minCoeff();
}

double lambda_max_abs(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

EnsembleDraw EnsembleDraw::from_matrices(
    std::vector<Eigen::MatrixXd> matrices,
    std::optional<Eigen::MatrixXd> exact_mean, std::uint64_t seed) {
  if (matrices.empty()) {
    throw std::invalid_argument("EnsembleDraw: empty matrix list");
  }
  const Eigen::Index d = matrices.front().rows();
  for (auto& A : matrices) {
    if (A.rows() != d || A.cols() != d) {
      throw std::invalid_argument("EnsembleDraw: inconsistent dimensions");
    }
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 *
            std::max(1.0, A.cwiseAbs().maxCoeff())) {
      throw std::invalid_argument("EnsembleDraw: matrix not symmetric");
    }
    A = 0.5 * (A + A.transpose()).eval();
    if (lambda_min(A) < -1e-10) {
      throw std::invalid_argument("EnsembleDraw: matrix not PSD");
    }
  }

  EnsembleDraw draw;
  draw.seed = seed;
  if (exact_mean.has_value()) {
    draw.mean = std::move(*exact_mean);
    draw.mean_is_exact = true;
  } else {
    draw.mean = Eigen::MatrixXd::Zero(d, d);
    for (const auto& A : matrices) draw.mean += A;
    draw.mean /= static_cast<double>(matrices.size());
  }
  draw.matrices = std::move(matrices);
  return draw;
}

EnsembleDraw gaussian_outer_product_ensemble(int dim, int count,
                                             std::uint64_t seed) {
  if (dim < 1 || count < 1) {
    throw std::invalid_argument("gaussian_outer_product_ensemble: bad size");
  }
  Rng rng(seed);
  std::vector<Eigen::MatrixXd> mats;
  mats.reserve(static_cast<std::size_t>(count));
  Eigen::VectorXd x(dim);
  for (int i = 0; i < count; ++i) {
    for (int j = 0; j < dim; ++j) x[j] = rng.normal();
    mats.push_back(x * x.transpose());
  }
  return EnsembleDraw::from_matrices(std::move(mats),
                                     Eigen::MatrixXd::Identity(dim, dim),
                                     seed);
}

EnsembleDraw wishart_ensemble(int dim, int degrees, int count,
                              const Eigen::MatrixXd& base,
                              std::uint64_t seed) {
  if (dim < 1 || count < 1 || degrees < 1) {
    throw std::invalid_argument("wishart_ensemble: bad size");
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(base);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("wishart_ensemble: base must be positive definite");
  }
  const Eigen::MatrixXd L = llt.matrixL();
  Rng rng(seed);
  std::vector<Eigen::MatrixXd> mats;
  mats.reserve(static_cast<std::size_t>(count));
  Eigen::VectorXd z(dim);
  for (int i = 0; i < count; ++i) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
    for (int k = 0; k < degrees; ++k) {
      for (int j = 0; j < dim; ++j) z[j] = rng.normal();
      const Eigen::VectorXd v = L * z;
      A += v * v.transpose();
    }
    mats.push_back(A / static_cast<double>(degrees));
  }
  return EnsembleDraw::from_matrices(std::move(mats), base, seed);
}

double empirical_min_eig_ratio(const EnsembleDraw& draw) {
  const double denom = lambda_min(draw.mean);
  if (denom <= 0.0) {
    throw std::invalid_argument("empirical_min_eig_ratio: singular expectation");
  }
  Eigen::MatrixXd empirical =
      Eigen::MatrixXd::Zero(draw.dimension(), draw.dimension());
  for (const auto& A : draw.matrices) empirical += A;
  empirical /= static_cast<double>(draw.matrices.size());
  return lambda_min(empirical) / denom;
}

SlbCertification slb_certify(const std::function<double(Rng&)>& sampler,
                             double mean_square, const SLBParams& params,
                             int trials, std::uint64_t seed, double ci_level) {
  if (trials < 1) throw std::invalid_argument("slb_certify: trials must be >= 1");
  if (params.m == 0 || params.l > params.m || params.gamma <= 0.0 ||
      params.gamma >= 1.0 || params.k < 0.0) {
    throw std::invalid_argument("slb_certify: invalid SLB parameters");
  }
  if (mean_square <= 0.0) {
    throw std::invalid_argument("slb_certify: degenerate E[h^2]");
  }

  const double bound = (1.0 - params.gamma) * mean_square;
  int failures = 0;
  std::vector<double> sq(params.m);
  for (int t = 0; t < trials; ++t) {
    Rng rng(split_seed(seed, static_cast<std::uint64_t>(t)));
    double total = 0.0;
    for (std::size_t i = 0; i < params.m; ++i) {
      const double h = sampler(rng);
      sq[i] = h * h;
      total += sq[i];
    }
    // worst J: drop the l largest squares
    std::nth_element(sq.begin(), sq.begin() + static_cast<long>(params.m - params.l),
                     sq.end());
    double removed = 0.0;
    for (std::size_t i = params.m - params.l; i < params.m; ++i) removed += sq[i];
    const double trimmed = (total - removed) / static_cast<double>(params.m);
    if (trimmed < bound) ++failures;
  }

  SlbCertification cert;
  cert.trials = trials;
  cert.failure_frequency = static_cast<double>(failures) / trials;
  cert.threshold = 2.0 * std::exp(-params.k);
  cert.certified = cert.failure_frequency <= cert.threshold;
  const auto [lo, hi] = wilson_interval(failures, trials, ci_level);
  cert.ci_lo = lo;
  cert.ci_hi = hi;
  return cert;
}

SlbCertification slb_certify_calibrated(
    const std::function<double(Rng&)>& sampler, const SLBParams& params,
    int trials, int calibration_size, std::uint64_t seed, double ci_level) {
  if (calibration_size < 1) {
    throw std::invalid_argument("slb_certify_calibrated: empty calibration");
  }
  // calibration stream is split off separately from every trial stream
  Rng cal(split_seed(seed, 0xCA11B8A7E5ULL));
  double mean_square = 0.0;
  for (int i = 0; i < calibration_size; ++i) {
    const double h = sampler(cal);
    mean_square += h * h;
  }
  mean_square /= static_cast<double>(calibration_size);
  return slb_certify(sampler, mean_square, params, trials, seed, ci_level);
}

bool mom_quadratic_lower(const EnsembleDraw& draw,
                         const BlockPartition& partition,
                         const Eigen::VectorXd& x, double gamma, double tau,
                         std::size_t l) {
  if (x.size() != draw.dimension()) {
    throw std::invalid_argument("mom_quadratic_lower: dimension mismatch");
  }
  if (partition.covered() > draw.matrices.size()) {
    throw std::invalid_argument("mom_quadratic_lower: partition exceeds draw");
  }
  if (l > partition.block_size) {
    throw std::invalid_argument("mom_quadratic_lower: l exceeds block size");
  }
  const double norm_sq = x.dot(draw.mean * x);
  if (norm_sq <= 0.0) {
    throw std::invalid_argument("mom_quadratic_lower: x has zero mean-norm");
  }
  const double bound = (1.0 - gamma) * norm_sq;
  const std::size_t m = partition.block_size;

  std::size_t good_blocks = 0;
  std::vector<double> q(m);
  for (std::size_t j = 0; j < partition.n; ++j) {
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      q[i] = x.dot(draw.matrices[partition.begin(j) + i] * x);
      total += q[i];
    }
    std::nth_element(q.begin(), q.begin() + static_cast<long>(m - l), q.end());
    double removed = 0.0;
    for (std::size_t i = m - l; i < m; ++i) removed += q[i];
    if ((total - removed) / static_cast<double>(m) >= bound) ++good_blocks;
  }
  return static_cast<double>(good_blocks) >=
         (1.0 - tau) * static_cast<double>(partition.n);
}

double op_norm_under_H(const Eigen::MatrixXd& B, const HNorm& h) {
  if (!B.isApprox(B.transpose(), 1e-10)) {
    throw std::invalid_argument("op_norm_under_H: B must be symmetric");
  }
  return lambda_max_abs(h.whiten(B));
}

SandwichBounds sandwich_bounds_check(const EnsembleDraw& draw) {
  const HNorm h = HNorm::from_matrix(draw.mean);  // throws on singular mean
  const int d = draw.dimension();
  Eigen::MatrixXd mean_f2 = Eigen::MatrixXd::Zero(d, d);
  double mean_norm = 0.0;
  for (const auto& A : draw.matrices) {
    const Eigen::MatrixXd F = h.whiten(A);
    const Eigen::MatrixXd F2 = F * F;
    mean_f2 += F2;
    mean_norm += lambda_max_abs(F2);
  }
  const double count = static_cast<double>(draw.matrices.size());
  SandwichBounds out;
  out.lhs = lambda_max_abs(mean_f2 / count);
  out.mid = mean_norm / count;
  out.rhs = static_cast<double>(d) * out.lhs;
  return out;
}

}  // namespace momopt
