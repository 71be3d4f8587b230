#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <stdexcept>
#include <string>

#include "lspinet/plant.hpp"
#include "lspinet/value_estimation.hpp"

namespace lspinet {

/// Riccati fixed-point iteration failed to converge: the (sqrt(gamma)-scaled)
/// pair is effectively unstabilizable for the requested tolerance.
class RiccatiError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The closed loop is not stable under the discount, so the policy value is
/// infinite; reported instead of computed.
class InstabilityError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

/// Spectral norm of a symmetric matrix (largest |eigenvalue|).
inline double spectral_norm_sym(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline double spectral_radius(const Eigen::MatrixXd& M) {
  return M.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace detail

struct RiccatiOptions {
  double tol = 1e-10;   // spectral-norm tolerance on the fixed-point residual
  int max_iter = 100000;
};

struct RiccatiSolution {
  Eigen::MatrixXd P;       // value matrix, V_*(omega) = omega' P omega
  Eigen::MatrixXd W_star;  // optimal gain, u = W_star omega
  ValueEstimate H_star;    // exact state-action value matrix
  int iterations = 0;
  double residual = 0.0;
};

/// State-action value matrix for a given value matrix P:
///   H = [Q + g A'PA   g A'PB    ]
///       [g B'PA       R + g B'PB]
inline Eigen::MatrixXd hamiltonian_matrix(const Eigen::MatrixXd& A,
                                          const Eigen::MatrixXd& B,
                                          const Eigen::MatrixXd& Q,
                                          const Eigen::MatrixXd& R,
                                          const Eigen::MatrixXd& P,
                                          double gamma) {
  const Eigen::Index np = A.rows();
  const Eigen::Index n = B.cols();
  Eigen::MatrixXd H(np + n, np + n);
  H.topLeftCorner(np, np) = Q + gamma * A.transpose() * P * A;
  H.topRightCorner(np, n) = gamma * A.transpose() * P * B;
  H.bottomLeftCorner(n, np) = gamma * B.transpose() * P * A;
  H.bottomRightCorner(n, n) = R + gamma * B.transpose() * P * B;
  return H;
}

/// Solves the discounted discrete-time Riccati equation
///   P = Q + g A'PA - g^2 A'PB (R + g B'PB)^{-1} B'PA
/// by fixed-point iteration from P0 = Q. Returns the iterate whose residual
/// (in spectral norm) is below tol, together with the optimal gain
///   W_star = -g (R + g B'PB)^{-1} B'PA
/// and the exact H matrix.
inline RiccatiSolution solve_discounted_riccati(const Eigen::MatrixXd& A,
                                                const Eigen::MatrixXd& B,
                                                const Eigen::MatrixXd& Q,
                                                const Eigen::MatrixXd& R,
                                                double gamma,
                                                const RiccatiOptions& options = {}) {
  if (gamma <= 0.0 || gamma > 1.0)
    throw std::invalid_argument("solve_discounted_riccati: gamma must be in (0, 1]");
  if (A.rows() != A.cols() || B.rows() != A.rows() || Q.rows() != A.rows() ||
      Q.cols() != A.rows() || R.rows() != B.cols() || R.cols() != B.cols())
    throw std::invalid_argument("solve_discounted_riccati: inconsistent sizes");

  Eigen::MatrixXd P = Q;
  for (int it = 1; it <= options.max_iter; ++it) {
    const Eigen::MatrixXd BtP = B.transpose() * P;
    const Eigen::MatrixXd G = R + gamma * BtP * B;
    const Eigen::MatrixXd K = G.ldlt().solve(BtP * A);  // (R+gB'PB)^{-1} B'PA
    Eigen::MatrixXd next = Q + gamma * A.transpose() * P * A -
                           gamma * gamma * (BtP * A).transpose() * K;
    next = 0.5 * (next + next.transpose()).eval();
    const double diff = detail::spectral_norm_sym(next - P);
    if (diff < options.tol) {
      RiccatiSolution sol;
      sol.P = P;
      sol.iterations = it;
      sol.residual = diff;
      const Eigen::MatrixXd G2 = R + gamma * B.transpose() * P * B;
      sol.W_star = -gamma * G2.ldlt().solve(B.transpose() * P * A);
      sol.H_star = ValueEstimate::from_matrix(
          hamiltonian_matrix(A, B, Q, R, P, gamma), static_cast<int>(A.rows()),
          static_cast<int>(B.cols()));
      return sol;
    }
    P = next;
  }
  throw RiccatiError(
      "solve_discounted_riccati: no convergence within max_iter (system not "
      "stabilizable at this discount?)");
}

inline RiccatiSolution solve_discounted_riccati(const AugmentedSystem& sys,
                                                double gamma,
                                                const RiccatiOptions& options = {}) {
  return solve_discounted_riccati(sys.A, sys.B, sys.Q, sys.R, gamma, options);
}

/// Exact discounted value of a fixed linear policy:
///   P_W = (Q + W'RW) + g (A + BW)' P_W (A + BW),
/// solved directly through the vectorized linear system. Throws
/// InstabilityError when sqrt(g)(A + BW) is not Schur stable.
inline Eigen::MatrixXd evaluate_policy_value(const Eigen::MatrixXd& A,
                                             const Eigen::MatrixXd& B,
                                             const Eigen::MatrixXd& Q,
                                             const Eigen::MatrixXd& R,
                                             const Eigen::MatrixXd& W,
                                             double gamma) {
  if (W.rows() != B.cols() || W.cols() != A.rows())
    throw std::invalid_argument("evaluate_policy_value: W must be n x n'");
  const Eigen::MatrixXd A_cl = A + B * W;
  const double rho = detail::spectral_radius(std::sqrt(gamma) * A_cl);
  if (rho >= 1.0)
    throw InstabilityError(
        "evaluate_policy_value: closed loop unstable under discount "
        "(spectral radius " + std::to_string(rho) + "), value is infinite");

  const Eigen::Index np = A.rows();
  const Eigen::MatrixXd Q_cl = Q + W.transpose() * R * W;
  // vec(A' P A) = (A' (x) A') vec(P), column-major
  Eigen::MatrixXd kron(np * np, np * np);
  const Eigen::MatrixXd At = A_cl.transpose();
  for (Eigen::Index i = 0; i < np; ++i)
    for (Eigen::Index j = 0; j < np; ++j)
      kron.block(i * np, j * np, np, np) = At(i, j) * At;
  Eigen::MatrixXd lhs =
      Eigen::MatrixXd::Identity(np * np, np * np) - gamma * kron;
  Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(Q_cl.data(), np * np);
  Eigen::VectorXd vec_p = lhs.partialPivLu().solve(rhs);
  Eigen::MatrixXd P = Eigen::Map<Eigen::MatrixXd>(vec_p.data(), np, np);
  return 0.5 * (P + P.transpose()).eval();
}

inline Eigen::MatrixXd evaluate_policy_value(const AugmentedSystem& sys,
                                             const Policy& policy,
                                             double gamma) {
  return evaluate_policy_value(sys.A, sys.B, sys.Q, sys.R, policy.W, gamma);
}

/// Exact state-action value through the Bellman form:
///   Q(omega, u) = c(omega, u) + g (A omega + B u)' P_W (A omega + B u).
inline double exact_q(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                      const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                      const Eigen::MatrixXd& P_W, double gamma,
                      const Eigen::VectorXd& omega, const Eigen::VectorXd& u) {
  const double c = omega.dot(Q * omega) + u.dot(R * u);
  const Eigen::VectorXd next = A * omega + B * u;
  return c + gamma * next.dot(P_W * next);
}

inline double exact_q(const AugmentedSystem& sys, const Eigen::MatrixXd& P_W,
                      double gamma, const Eigen::VectorXd& omega,
                      const Eigen::VectorXd& u) {
  return exact_q(sys.A, sys.B, sys.Q, sys.R, P_W, gamma, omega, u);
}

}  // namespace lspinet
