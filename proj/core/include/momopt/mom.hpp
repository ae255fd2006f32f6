#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace momopt {

/// Disjoint split of sample indices {0..N-1} into n contiguous blocks of
/// equal size m = floor(N/n); the trailing N - n*m indices are discarded
/// (equal block sizes are assumed throughout the block-majority analysis,
/// so truncation is preferred over ragged blocks). The discard count is
/// kept so callers can report it.
struct BlockPartition {
  std::size_t n = 0;           // block count
  std::size_t block_size = 0;  // m
  std::size_t discarded = 0;   // N - n*m

  std::size_t covered() const { return n * block_size; }
  std::size_t begin(std::size_t j) const { return j * block_size; }
  std::size_t end(std::size_t j) const { return (j + 1) * block_size; }
};

/// Contiguous equal-size partition of N indices into n blocks.
/// Requires 1 <= n <= N.
BlockPartition make_partition(std::size_t N, std::size_t n);

/// Partition driven by a target block size m (the m = 3 sigma^2 / r^2
/// convention); n = floor(N/m). Requires 1 <= m <= N.
BlockPartition make_partition_by_block_size(std::size_t N, std::size_t m);

/// Per-block arithmetic means. values must cover the partition's range.
Eigen::VectorXd block_means(const Eigen::VectorXd& values,
                            const BlockPartition& partition);

/// Median of a vector; for even length, the midpoint of the two central
/// order statistics.
double median(Eigen::VectorXd values);

/// Median of the n block means. With n = 1 this is the sample mean.
double median_of_means(const Eigen::VectorXd& values, std::size_t n);

/// Tuned block count n = clamp(round(theta * N * min{1, r^2/sigma2}), 1, N).
/// Requires r > 0, sigma2 > 0, 0 < theta < 1.
std::size_t choose_block_count(std::size_t N, double r, double sigma2,
                               double theta);

}  // namespace momopt
