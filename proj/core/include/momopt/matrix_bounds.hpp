#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "momopt/hnorm.hpp"
#include "momopt/mom.hpp"
#include "momopt/rng.hpp"

namespace momopt {

/// A batch of i.i.d. PSD matrices (A_i) together with their expectation
/// (exact when known, otherwise the empirical mean, flagged).
struct EnsembleDraw {
  std::vector<Eigen::MatrixXd> matrices;
  Eigen::MatrixXd mean;  // E[A]
  bool mean_is_exact = false;
  std::uint64_t seed = 0;

  /// Validates symmetry (to 1e-12) and rejects eigenvalues below -1e-10.
  static EnsembleDraw from_matrices(
      std::vector<Eigen::MatrixXd> matrices,
      std::optional<Eigen::MatrixXd> exact_mean = std::nullopt,
      std::uint64_t seed = 0);

  int dimension() const {
    return matrices.empty() ? 0 : static_cast<int>(matrices.front().rows());
  }
};

/// A = X (x) X with X standard Gaussian; E[A] = Id exactly.
EnsembleDraw gaussian_outer_product_ensemble(int dim, int count,
                                             std::uint64_t seed);

/// Wishart-style A = average of `degrees` outer products of N(0, base)
/// draws; E[A] = base exactly.
EnsembleDraw wishart_ensemble(int dim, int degrees, int count,
                              const Eigen::MatrixXd& base, std::uint64_t seed);

/// lambda_min(empirical mean) / lambda_min(E[A]). Requires a nonsingular
/// expectation.
double empirical_min_eig_ratio(const EnsembleDraw& draw);

/// Stable-lower-bound parameters (m, gamma, l, k): after removing any l of
/// m draws, the block average of h^2 stays above (1-gamma) E[h^2], except
/// with probability 2 exp(-k).
struct SLBParams {
  std::size_t m = 0;
  double gamma = 0.5;
  std::size_t l = 0;
  double k = 0.0;
};

struct SlbCertification {
  double failure_frequency = 0.0;
  double threshold = 0.0;  // 2 exp(-k)
  bool certified = false;
  int trials = 0;
  double ci_lo = 0.0, ci_hi = 0.0;  // Wilson band on the frequency
};

/// Monte-Carlo certification of a stable lower bound for a scalar-form
/// family h. Per trial, m draws of h are taken and the worst removal set
/// (the l largest h^2, exactly adversarial for a sum of non-negative
/// terms) is applied; the trial fails when the trimmed block mean drops
/// below (1-gamma) E[h^2]. `mean_square` must come from exact knowledge or
/// an independent calibration draw, never the certified draws themselves.
SlbCertification slb_certify(const std::function<double(Rng&)>& sampler,
                             double mean_square, const SLBParams& params,
                             int trials, std::uint64_t seed,
                             double ci_level = 0.99);

/// Convenience wrapper estimating E[h^2] on an independent calibration
/// stream of `calibration_size` draws before certifying.
SlbCertification slb_certify_calibrated(
    const std::function<double(Rng&)>& sampler, const SLBParams& params,
    int trials, int calibration_size, std::uint64_t seed,
    double ci_level = 0.99);

/// Block-majority quadratic lower bound: true iff at least (1-tau) n blocks
/// keep (1/m) sum_{i in I_j \ J_j} <A_i x, x> >= (1-gamma) ||x||^2 under the
/// adversarial removal J_j = the l largest terms of block j. The norm is
/// the one induced by E[A].
bool mom_quadratic_lower(const EnsembleDraw& draw,
                         const BlockPartition& partition,
                         const Eigen::VectorXd& x, double gamma, double tau,
                         std::size_t l);

/// Operator norm of a symmetric B w.r.t. the H-induced norm, i.e. the
/// spectral norm of H^{-1/2} B H^{-1/2}.
double op_norm_under_H(const Eigen::MatrixXd& B, const HNorm& h);

/// The three quantities of the operator-norm sandwich
///   1 <= ||E[A A^-1_mean A]||_op <= E[||A A^-1_mean A||_op]
///     <= d ||E[A A^-1_mean A]||_op,
/// evaluated empirically; the caller asserts the chain.
struct SandwichBounds {
  double lhs = 0.0;  // ||E[A A^-1 A]||_op
  double mid = 0.0;  // E[||A A^-1 A||_op]
  double rhs = 0.0;  // d * lhs
};
SandwichBounds sandwich_bounds_check(const EnsembleDraw& draw);

}  // namespace momopt
