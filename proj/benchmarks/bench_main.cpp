#include <benchmark/benchmark.h>

#include "momopt/matrix_bounds.hpp"
#include "momopt/mom.hpp"
#include "momopt/problems.hpp"
#include "momopt/samplers.hpp"
#include "momopt/tournament.hpp"

namespace {

using namespace momopt;

void BM_median_of_means(benchmark::State& state) {
  const Eigen::Index N = state.range(0);
  Rng rng(1);
  Eigen::VectorXd values(N);
  for (Eigen::Index i = 0; i < N; ++i) values[i] = rng.normal();
  const std::size_t n = static_cast<std::size_t>(N) / 25;
  for (auto _ : state) {
    benchmark::DoNotOptimize(median_of_means(values, n));
  }
  state.SetItemsProcessed(state.iterations() * N);
}
BENCHMARK(BM_median_of_means)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20);

void BM_gaussian_draw(benchmark::State& state) {
  const auto spec = DistributionSpec::standard_gaussian(8, 42);
  const Eigen::Index count = state.range(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(draw(spec, count));
  }
  state.SetItemsProcessed(state.iterations() * count);
}
BENCHMARK(BM_gaussian_draw)->Arg(1 << 10)->Arg(1 << 14);

void BM_tournament_mean(benchmark::State& state) {
  const Eigen::Index N = state.range(0);
  const auto spec = DistributionSpec::standard_gaussian(4, 7);
  const auto problem = make_mean_estimation(spec);
  const auto sample = draw(spec, N);
  TournamentConfig cfg;
  cfg.r = std::sqrt(32.0 / static_cast<double>(N));
  cfg.sigma2 = 1.0;
  cfg.norm = HNorm::identity(4);
  cfg.candidate_policy = CandidatePolicy::blockwise_saa(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_tournament(problem, sample, cfg));
  }
}
BENCHMARK(BM_tournament_mean)->Arg(1 << 12)->Arg(1 << 14);

void BM_min_eig_ratio(benchmark::State& state) {
  const auto draw_ = gaussian_outer_product_ensemble(10, 2000, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(empirical_min_eig_ratio(draw_));
  }
}
BENCHMARK(BM_min_eig_ratio);

}  // namespace

BENCHMARK_MAIN();
