#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace momopt {

/// 64-bit mixing finalizer (the splitmix64 output function).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stream-split discipline: the seed of the `index`-th child stream of
/// `root`. Double mixing keeps sibling streams far apart in the splitmix
/// orbit, so parallel workers draw from non-overlapping sequences. This is
/// the only sanctioned way to derive per-trial / per-worker seeds.
constexpr std::uint64_t split_seed(std::uint64_t root, std::uint64_t index) {
  return mix64(root ^ mix64(0x5851f42d4c957f2dULL * (index + 1)));
}

/// Self-contained counter-based PRNG with explicit sampling transforms.
///
/// Standard-library distributions are not pinned across implementations;
/// every transform here is spelled out so that (seed, call sequence)
/// reproduces bit-identical streams on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform on (0, 1]: 53-bit mantissa, never exactly zero.
  double uniform01() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; two uniforms per call, the second
  /// branch of the pair is discarded to keep the call sequence stateless.
  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Gamma(shape, 1) by Marsaglia-Tsang squeeze; shape > 0.
  double gamma(double shape) {
    if (shape <= 0.0) throw std::invalid_argument("gamma: shape must be > 0");
    if (shape < 1.0) {
      // boost to shape+1 and scale back
      const double u = uniform01();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = uniform01();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
        return d * v;
      }
    }
  }

  double chi_square(double dof) { return 2.0 * gamma(0.5 * dof); }

  /// Student-t with `dof` degrees of freedom (unit scale).
  double student_t(double dof) {
    return normal() / std::sqrt(chi_square(dof) / dof);
  }

  /// Pareto with tail index alpha and minimum `scale` (support [scale, inf)).
  double pareto(double alpha, double scale) {
    return scale * std::pow(uniform01(), -1.0 / alpha);
  }

  /// Child generator for sub-stream `index` (documented split discipline).
  Rng split(std::uint64_t index) const {
    return Rng(split_seed(state_, index));
  }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

}  // namespace momopt
