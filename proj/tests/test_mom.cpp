#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <vector>

#include "momopt/mom.hpp"
#include "momopt/rng.hpp"

using namespace momopt;

TEST_CASE("make_partition splits evenly") {
  const auto p = make_partition(6, 3);
  CHECK(p.n == 3);
  CHECK(p.block_size == 2);
  CHECK(p.discarded == 0);
  CHECK(p.begin(0) == 0);
  CHECK(p.end(0) == 2);
  CHECK(p.begin(2) == 4);
  CHECK(p.end(2) == 6);
}

TEST_CASE("make_partition discards the remainder") {
  const auto p = make_partition(7, 3);
  CHECK(p.n == 3);
  CHECK(p.block_size == 2);
  CHECK(p.discarded == 1);
  CHECK(p.covered() == 6);
}

TEST_CASE("make_partition degenerate single block") {
  const auto p = make_partition(5, 1);
  CHECK(p.n == 1);
  CHECK(p.block_size == 5);
  CHECK(p.discarded == 0);
}

TEST_CASE("make_partition rejects bad block counts") {
  CHECK_THROWS_AS(make_partition(5, 0), std::invalid_argument);
  CHECK_THROWS_AS(make_partition(5, 6), std::invalid_argument);
}

TEST_CASE("make_partition_by_block_size uses the m convention") {
  // the 'm = 3 sigma^2 / r^2' parameterization
  const auto p = make_partition_by_block_size(100, 30);
  CHECK(p.block_size == 30);
  CHECK(p.n == 3);
  CHECK(p.discarded == 10);
  CHECK_THROWS_AS(make_partition_by_block_size(10, 0), std::invalid_argument);
  CHECK_THROWS_AS(make_partition_by_block_size(10, 11), std::invalid_argument);
}

TEST_CASE("block_means on 1..6") {
  Eigen::VectorXd v(6);
  v << 1, 2, 3, 4, 5, 6;
  const auto means = block_means(v, make_partition(6, 3));
  CHECK(means[0] == doctest::Approx(1.5));
  CHECK(means[1] == doctest::Approx(3.5));
  CHECK(means[2] == doctest::Approx(5.5));
}

TEST_CASE("block_means of a constant vector is constant") {
  const Eigen::VectorXd v = Eigen::VectorXd::Constant(12, 2.5);
  const auto means = block_means(v, make_partition(12, 4));
  for (Eigen::Index j = 0; j < means.size(); ++j) {
    CHECK(means[j] == doctest::Approx(2.5));
  }
}

TEST_CASE("block_means with one block is the sample mean") {
  Eigen::VectorXd v(5);
  v << 1, 2, 3, 4, 10;
  const auto means = block_means(v, make_partition(5, 1));
  CHECK(means.size() == 1);
  CHECK(means[0] == doctest::Approx(4.0));
}

TEST_CASE("block_means rejects short input") {
  Eigen::VectorXd v(3);
  v << 1, 2, 3;
  CHECK_THROWS_AS(block_means(v, make_partition(6, 3)), std::invalid_argument);
}

TEST_CASE("median handles odd and even lengths") {
  Eigen::VectorXd odd(3);
  odd << 3, 1, 2;
  CHECK(median(odd) == doctest::Approx(2.0));
  Eigen::VectorXd even(4);
  even << 4, 1, 3, 2;
  CHECK(median(even) == doctest::Approx(2.5));
}

TEST_CASE("median_of_means on 1..6 with three blocks") {
  Eigen::VectorXd v(6);
  v << 1, 2, 3, 4, 5, 6;
  CHECK(median_of_means(v, 3) == doctest::Approx(3.5));
}

TEST_CASE("median_of_means with n=1 equals the sample mean exactly") {
  Rng rng(17);
  Eigen::VectorXd v(101);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.pareto(2.5, 1.0);
  CHECK(median_of_means(v, 1) == v.mean());
}

TEST_CASE("median_of_means kills a single adversarial outlier") {
  // one nonzero draw of magnitude N*r among zeros; with 5 blocks four
  // block means are zero, so the median is zero
  const std::size_t N = 100;
  const double r = 0.5;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N));
  v[37] = static_cast<double>(N) * r;
  CHECK(median_of_means(v, 5) == 0.0);
  // the empirical mean is shifted to exactly r
  CHECK(v.mean() == doctest::Approx(r));
}

TEST_CASE("breakdown: minority of contaminated blocks cannot move the median") {
  const std::size_t n = 7;
  const std::size_t m = 10;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n * m));
  // contaminate 3 of 7 blocks (< ceil(n/2)) with huge values
  for (std::size_t j : {0UL, 2UL, 4UL}) {
    v[static_cast<Eigen::Index>(j * m)] = 1e9;
  }
  CHECK(median_of_means(v, n) == 0.0);
  // contaminate one more block: the majority is reached and the median moves
  v[static_cast<Eigen::Index>(6 * m)] = 1e9;
  CHECK(median_of_means(v, n) > 0.0);
}

TEST_CASE("translation and scale equivariance") {
  Rng rng(4);
  Eigen::VectorXd v(60);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
  for (std::size_t n : {1UL, 3UL, 4UL, 6UL}) {
    const double base = median_of_means(v, n);
    const double a = -2.25, b = 0.75;
    const double transformed =
        median_of_means((a * v.array() + b).matrix(), n);
    CHECK(transformed == doctest::Approx(a * base + b).epsilon(1e-12));
  }
}

TEST_CASE("permutations within and of whole blocks leave the result unchanged") {
  Rng rng(9);
  Eigen::VectorXd v(24);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
  const std::size_t n = 4, m = 6;
  const double base = median_of_means(v, n);

  // swap two entries inside block 1
  Eigen::VectorXd within = v;
  std::swap(within[static_cast<Eigen::Index>(m) + 1],
            within[static_cast<Eigen::Index>(m) + 4]);
  CHECK(median_of_means(within, n) == base);

  // swap whole blocks 0 and 3
  Eigen::VectorXd blocks = v;
  blocks.segment(0, m).swap(blocks.segment(3 * m, m));
  CHECK(median_of_means(blocks, n) == base);
}

TEST_CASE("choose_block_count follows theta N min(1, r^2/sigma^2)") {
  CHECK(choose_block_count(1000, 1.0, 1.0, 0.1) == 100);
  CHECK(choose_block_count(1000, 0.1, 1.0, 0.1) == 1);  // 0.1*1000*0.01
  CHECK(choose_block_count(10, 1e-3, 1.0, 0.1) == 1);   // clamped at 1
  CHECK(choose_block_count(4, 100.0, 1.0, 0.9) == 4);   // clamped at N
}

TEST_CASE("choose_block_count validates inputs") {
  CHECK_THROWS_AS(choose_block_count(0, 1, 1, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(choose_block_count(10, 0, 1, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(choose_block_count(10, 1, 0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(choose_block_count(10, 1, 1, 1.0), std::invalid_argument);
}
