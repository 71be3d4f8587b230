#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <random>

namespace lspinet {

/// SplitMix64 finalizer. Used to derive independent stream seeds from a
/// master seed; the exact construction is part of the reproducibility
/// contract (rerunning with the same master seed must reproduce every byte).
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Stream seed = mix64 chain over (master, run_id, stream).
///   master  - user-facing seed
///   run_id  - work item index (seed index within a sweep/lesion cell)
///   stream  - purpose tag, see `streams` below
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t run_id,
                                 std::uint64_t stream) {
  std::uint64_t h = mix64(master + 0x9E3779B97F4A7C15ull);
  h = mix64(h ^ (run_id + 0x9E3779B97F4A7C15ull));
  h = mix64(h ^ (stream + 0x9E3779B97F4A7C15ull));
  return h;
}

/// Fixed stream tags. Episode k draws from stream `episode_base + k`, so a
/// lesioned run and its baseline see identical exploration noise when they
/// share (master, run_id).
namespace streams {
inline constexpr std::uint64_t plant = 0;
inline constexpr std::uint64_t initial_policy = 1;
inline constexpr std::uint64_t probe_states = 2;
inline constexpr std::uint64_t episode_base = 16;
}  // namespace streams

/// Deterministic random stream. mt19937_64 is fully specified by the
/// standard and the Gaussian transform below consumes exactly two engine
/// draws per variate, so the stream layout is identical on every platform.
class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (cosine branch only; the sine branch is
  /// discarded to keep a fixed two-draws-per-variate layout).
  double gaussian() {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  Eigen::VectorXd gaussian_vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = gaussian();
    return v;
  }

  /// Matrix of i.i.d. uniforms, filled row by row.
  Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd a(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) a(i, j) = uniform();
    return a;
  }

  Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd a(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) a(i, j) = gaussian();
    return a;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lspinet
