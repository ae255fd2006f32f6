#include "momopt/mom.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace momopt {

BlockPartition make_partition(std::size_t N, std::size_t n) {
  if (n == 0 || n > N) {
    throw std::invalid_argument("make_partition: need 1 <= n <= N");
  }
  BlockPartition p;
  p.n = n;
  p.block_size = N / n;
  p.discarded = N - p.n * p.block_size;
  return p;
}

BlockPartition make_partition_by_block_size(std::size_t N, std::size_t m) {
  if (m == 0 || m > N) {
    throw std::invalid_argument("make_partition_by_block_size: need 1 <= m <= N");
  }
  BlockPartition p;
  p.n = N / m;
  p.block_size = m;
  p.discarded = N - p.n * p.block_size;
  return p;
}

Eigen::VectorXd block_means(const Eigen::VectorXd& values,
                            const BlockPartition& partition) {
  if (static_cast<std::size_t>(values.size()) < partition.covered()) {
    throw std::invalid_argument("block_means: values shorter than partition");
  }
  Eigen::VectorXd means(static_cast<Eigen::Index>(partition.n));
  for (std::size_t j = 0; j < partition.n; ++j) {
    means[static_cast<Eigen::Index>(j)] =
        values.segment(static_cast<Eigen::Index>(partition.begin(j)),
                       static_cast<Eigen::Index>(partition.block_size))
            .mean();
  }
  return means;
}

double median(Eigen::VectorXd values) {
  const Eigen::Index n = values.size();
  if (n == 0) throw std::invalid_argument("median: empty input");
  double* begin = values.data();
  double* end = begin + n;
  double* mid = begin + n / 2;
  std::nth_element(begin, mid, end);
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(begin, mid);
  return 0.5 * (lower + upper);
}

double median_of_means(const Eigen::VectorXd& values, std::size_t n) {
  const auto partition =
      make_partition(static_cast<std::size_t>(values.size()), n);
  return median(block_means(values, partition));
}

std::size_t choose_block_count(std::size_t N, double r, double sigma2,
                               double theta) {
  if (N == 0) throw std::invalid_argument("choose_block_count: N must be >= 1");
  if (r <= 0.0 || sigma2 <= 0.0) {
    throw std::invalid_argument("choose_block_count: r and sigma2 must be > 0");
  }
  if (theta <= 0.0 || theta >= 1.0) {
    throw std::invalid_argument("choose_block_count: theta must be in (0,1)");
  }
  const double ratio = std::min(1.0, r * r / sigma2);
  const double raw = std::round(theta * static_cast<double>(N) * ratio);
  const double clamped = std::clamp(raw, 1.0, static_cast<double>(N));
  return static_cast<std::size_t>(clamped);
}

}  // namespace momopt
