#pragma once

#include <Eigen/Core>
#include <Eigen/SVD>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lspinet/network.hpp"

namespace lspinet {

/// Raised when the policy-evaluation regression cannot determine the value
/// parameters: the episode was too short or exploration too weak for the
/// feature matrix to reach full column rank on the symmetric subspace, or
/// the H22 block is too badly conditioned to invert.
class EstimationError : public std::runtime_error {
 public:
  EstimationError(std::string what, Eigen::Index rank, Eigen::Index required)
      : std::runtime_error(std::move(what)), rank_(rank), required_(required) {}

  Eigen::Index rank() const { return rank_; }
  Eigen::Index required() const { return required_; }

 private:
  Eigen::Index rank_;
  Eigen::Index required_;
};

/// Quadratic state-action value estimate Q(omega, u) = z' H z, z = [omega; u].
/// theta is the flat parameter vector with row-major pairing
/// theta[i*d + j] = H(i, j); H is the unpacked matrix after symmetrization.
struct ValueEstimate {
  Eigen::VectorXd theta;   // length (n' + n)^2
  Eigen::MatrixXd H;       // (n' + n) x (n' + n), symmetric
  int state_dim = 0;       // n'
  int input_dim = 0;       // n
  double residual = 0.0;   // ||Phi' theta - c||_2 of the fitting problem
  Eigen::Index rank = 0;   // numerical rank of the regression matrix

  int dim() const { return state_dim + input_dim; }

  auto h11() const { return H.topLeftCorner(state_dim, state_dim); }
  auto h12() const { return H.topRightCorner(state_dim, input_dim); }
  auto h21() const { return H.bottomLeftCorner(input_dim, state_dim); }
  auto h22() const { return H.bottomRightCorner(input_dim, input_dim); }

  double evaluate(const Eigen::VectorXd& omega, const Eigen::VectorXd& u) const {
    Eigen::VectorXd z(dim());
    z << omega, u;
    return z.dot(H * z);
  }

  static ValueEstimate from_theta(Eigen::VectorXd theta, int state_dim,
                                  int input_dim) {
    const int d = state_dim + input_dim;
    if (theta.size() != static_cast<Eigen::Index>(d) * d)
      throw std::invalid_argument("ValueEstimate: theta length must be d^2");
    ValueEstimate e;
    e.state_dim = state_dim;
    e.input_dim = input_dim;
    e.H.resize(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) e.H(i, j) = theta[i * d + j];
    e.H = 0.5 * (e.H + e.H.transpose()).eval();
    e.theta = std::move(theta);
    return e;
  }

  static ValueEstimate from_matrix(Eigen::MatrixXd H, int state_dim,
                                   int input_dim) {
    const int d = state_dim + input_dim;
    if (H.rows() != d || H.cols() != d)
      throw std::invalid_argument("ValueEstimate: H must be d x d");
    ValueEstimate e;
    e.state_dim = state_dim;
    e.input_dim = input_dim;
    e.H = 0.5 * (H + H.transpose()).eval();
    e.theta.resize(d * d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) e.theta[i * d + j] = e.H(i, j);
    return e;
  }
};

/// One transition observed while probing the system.
struct EpisodeStep {
  Eigen::VectorXd omega;
  Eigen::VectorXd u;
  double cost = 0.0;
  Eigen::VectorXd omega_next;
};

/// Dataset D collected over one episode.
struct EpisodeData {
  std::vector<EpisodeStep> steps;
  int state_dim = 0;  // n'
  int input_dim = 0;  // n

  int length() const { return static_cast<int>(steps.size()); }

  double total_cost() const {
    double s = 0.0;
    for (const auto& r : steps) s += r.cost;
    return s;
  }
};

/// Quadratic feature map phi(omega, u) = z (x) z with z = [omega; u];
/// phi[i*d + j] = z_i z_j.
inline Eigen::VectorXd feature_phi(const Eigen::VectorXd& omega,
                                   const Eigen::VectorXd& u) {
  const Eigen::Index d = omega.size() + u.size();
  Eigen::VectorXd z(d);
  z << omega, u;
  Eigen::VectorXd phi(d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) phi[i * d + j] = z[i] * z[j];
  return phi;
}

/// Temporal-difference feature Phi_t = phi(omega_t, u_t)
///                                   - gamma phi(omega_{t+1}, W omega_{t+1}).
inline Eigen::VectorXd regression_feature(const EpisodeStep& record,
                                          const Policy& policy_eval,
                                          double gamma) {
  if (gamma < 0.0 || gamma > 1.0)
    throw std::invalid_argument("regression_feature: gamma must be in [0, 1]");
  return feature_phi(record.omega, record.u) -
         gamma * feature_phi(record.omega_next, act(policy_eval, record.omega_next));
}

struct EstimateOptions {
  /// When true, estimate only the d(d+1)/2 upper-triangular parameters
  /// (off-diagonal features doubled) instead of the full d^2 vector. Both
  /// routes produce the same symmetric H; the reduced one needs fewer rows.
  bool symmetric_features = false;
};

namespace detail {

inline Eigen::VectorXd symmetric_feature(const Eigen::VectorXd& phi, int d) {
  Eigen::VectorXd out(d * (d + 1) / 2);
  int idx = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j)
      out[idx++] = (i == j) ? phi[i * d + j] : phi[i * d + j] + phi[j * d + i];
  return out;
}

inline Eigen::MatrixXd unpack_symmetric(const Eigen::VectorXd& theta_sym, int d) {
  Eigen::MatrixXd H(d, d);
  int idx = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      H(i, j) = theta_sym[idx];
      H(j, i) = theta_sym[idx];
      ++idx;
    }
  return H;
}

}  // namespace detail

/// Least-squares policy evaluation: finds theta minimizing
/// sum_t (c_t - theta' Phi_t)^2 and unpacks it into H. The minimum-norm
/// solution is taken via SVD; the numerical rank is reported and must reach
/// the symmetric-subspace dimension d(d+1)/2 (quadratic features of d
/// variables can never exceed it, regardless of the episode length).
inline ValueEstimate estimate_theta(const EpisodeData& data,
                                    const Policy& policy_eval, double gamma,
                                    const EstimateOptions& options = {}) {
  if (data.length() < 1)
    throw std::invalid_argument("estimate_theta: empty episode");
  const int d = data.state_dim + data.input_dim;
  const Eigen::Index required = static_cast<Eigen::Index>(d) * (d + 1) / 2;
  const Eigen::Index cols =
      options.symmetric_features ? required : static_cast<Eigen::Index>(d) * d;

  const int T = data.length();
  Eigen::MatrixXd Phi(T, cols);
  Eigen::VectorXd c(T);
  for (int t = 0; t < T; ++t) {
    Eigen::VectorXd row = regression_feature(data.steps[t], policy_eval, gamma);
    Phi.row(t) = options.symmetric_features
                     ? detail::symmetric_feature(row, d).transpose()
                     : row.transpose();
    c[t] = data.steps[t].cost;
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(Phi,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::Index rank = svd.rank();
  if (rank < required) {
    throw EstimationError(
        "estimate_theta: regression matrix is rank deficient (rank " +
            std::to_string(rank) + " < " + std::to_string(required) +
            "); episode too short or exploration insufficient",
        rank, required);
  }

  const Eigen::VectorXd sol = svd.solve(c);
  const double residual = (Phi * sol - c).norm();

  ValueEstimate estimate =
      options.symmetric_features
          ? ValueEstimate::from_matrix(detail::unpack_symmetric(sol, d),
                                       data.state_dim, data.input_dim)
          : ValueEstimate::from_theta(sol, data.state_dim, data.input_dim);
  estimate.residual = residual;
  estimate.rank = rank;
  return estimate;
}

/// Greedy policy improvement W = -H22^{-1} H21. Refuses to invert an H22
/// whose condition number exceeds the ceiling.
inline Policy improve_policy(const ValueEstimate& estimate,
                             double cond_ceiling = 1e8) {
  const Eigen::MatrixXd h22 = estimate.h22();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(h22,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  if (!(smin > 0.0) || smax / smin > cond_ceiling) {
    throw EstimationError(
        "improve_policy: H22 is singular or badly conditioned", svd.rank(),
        h22.rows());
  }
  return Policy(-svd.solve(estimate.h21()));
}

}  // namespace lspinet
