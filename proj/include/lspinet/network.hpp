#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <utility>

#include "lspinet/plant.hpp"
#include "lspinet/rng.hpp"

namespace lspinet {

/// Linear feedback u = W omega. Columns are partitioned [W_psi | W_nu | W_x]
/// with n = rows and m = (cols - rows) / 2.
struct Policy {
  Eigen::MatrixXd W;

  Policy() = default;
  explicit Policy(Eigen::MatrixXd w) : W(std::move(w)) {
    if (W.cols() < W.rows() || (W.cols() - W.rows()) % 2 != 0)
      throw std::invalid_argument("Policy: W must be n x (2m+n)");
  }

  int n() const { return static_cast<int>(W.rows()); }
  int m() const { return static_cast<int>((W.cols() - W.rows()) / 2); }

  auto w_psi() const { return W.leftCols(m()); }
  auto w_nu() const { return W.middleCols(m(), m()); }
  auto w_x() const { return W.rightCols(n()); }

  static Policy zero(int m, int n) {
    return Policy(Eigen::MatrixXd::Zero(n, 2 * m + n));
  }
};

struct ExplorationConfig {
  double sigma_y2 = 0.01;  // exploration variance sigma_y^2
  std::uint64_t seed = 0;

  void validate() const {
    if (sigma_y2 < 0.0)
      throw std::invalid_argument("ExplorationConfig: sigma_y2 must be >= 0");
  }
};

/// Deterministic policy action u = W omega.
inline Eigen::VectorXd act(const Policy& policy, const Eigen::VectorXd& omega) {
  if (omega.size() != policy.W.cols())
    throw std::invalid_argument("act: state length does not match policy");
  return policy.W * omega;
}

inline Eigen::VectorXd act(const Policy& policy, const AugmentedState& state) {
  return act(policy, state.omega);
}

/// Exploratory action u = W omega + eps with eps ~ N(0, sigma_y^2 I_n).
/// Always consumes exactly n Gaussian draws, even at sigma_y^2 = 0, so runs
/// that differ only in the exploration variance share the same stream layout.
inline Eigen::VectorXd act_explore(const Policy& policy,
                                   const Eigen::VectorXd& omega,
                                   const ExplorationConfig& cfg,
                                   NoiseStream& stream) {
  cfg.validate();
  const double sigma = std::sqrt(cfg.sigma_y2);
  return act(policy, omega) + sigma * stream.gaussian_vector(policy.n());
}

inline Eigen::VectorXd act_explore(const Policy& policy,
                                   const AugmentedState& state,
                                   const ExplorationConfig& cfg,
                                   NoiseStream& stream) {
  return act_explore(policy, state.omega, cfg, stream);
}

/// Fast-timescale integrator x_{t+1} = x_t + dt u_t.
inline Eigen::VectorXd advance_network(const Eigen::VectorXd& x,
                                       const Eigen::VectorXd& u, double dt) {
  if (dt <= 0.0) throw std::invalid_argument("advance_network: dt must be > 0");
  if (x.size() != u.size())
    throw std::invalid_argument("advance_network: x and u sizes differ");
  return x + dt * u;
}

}  // namespace lspinet
