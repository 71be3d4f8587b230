#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include "lspinet/rng.hpp"

namespace lspinet {

/// Second-order linear plant
///   psi_{t+1} = psi_t + C nu_t
///   nu_{t+1}  = A_psi psi_t + A_nu nu_t + B_x x_t
/// where x is the activity of the n controller units. The learner never sees
/// these matrices; they exist to simulate the environment and to build the
/// ground-truth oracle.
struct PlantDynamics {
  Eigen::MatrixXd A_psi;  // m x m
  Eigen::MatrixXd A_nu;   // m x m
  Eigen::MatrixXd B_x;    // m x n
  Eigen::MatrixXd C;      // m x m
  double dt = 0.1;

  int m() const { return static_cast<int>(A_psi.rows()); }
  int n() const { return static_cast<int>(B_x.cols()); }

  void validate() const {
    const int mm = m();
    if (A_psi.cols() != mm || A_nu.rows() != mm || A_nu.cols() != mm ||
        C.rows() != mm || C.cols() != mm || B_x.rows() != mm) {
      throw std::invalid_argument("PlantDynamics: inconsistent block sizes");
    }
    if (dt <= 0.0) throw std::invalid_argument("PlantDynamics: dt must be > 0");
    if (n() <= mm) {
      throw std::invalid_argument(
          "PlantDynamics: controller network must be larger than the plant "
          "(n > m)");
    }
  }
};

/// State of the combined plant + controller-network system,
/// omega = [psi; nu; x] with the partition fixed by (m, n).
struct AugmentedState {
  Eigen::VectorXd omega;
  int m = 0;
  int n = 0;

  AugmentedState() = default;
  AugmentedState(Eigen::VectorXd w, int m_, int n_)
      : omega(std::move(w)), m(m_), n(n_) {
    if (omega.size() != 2 * m + n)
      throw std::invalid_argument("AugmentedState: length must be 2m+n");
  }

  auto psi() const { return omega.segment(0, m); }
  auto nu() const { return omega.segment(m, m); }
  auto x() const { return omega.tail(n); }
};

/// Combined system omega_{t+1} = A omega_t + B u_t with stage cost
/// c_t = omega' Q omega + u' R u.
struct AugmentedSystem {
  Eigen::MatrixXd A;  // n' x n'
  Eigen::MatrixXd B;  // n' x n
  Eigen::MatrixXd Q;  // n' x n', symmetric PSD
  Eigen::MatrixXd R;  // n  x n,  symmetric PD
  int m = 0;
  int n = 0;

  int n_prime() const { return 2 * m + n; }

  AugmentedState make_state(Eigen::VectorXd omega) const {
    return AugmentedState(std::move(omega), m, n);
  }
};

/// Number of functioning units and when the lesion is applied relative to
/// the adaptation loop.
enum class LesionTiming { before_learning, during_learning, after_learning };

struct LesionSpec {
  int n_f = 0;
  LesionTiming when = LesionTiming::before_learning;
  int k1 = 5;  // episode index for during_learning

  void validate(int n) const {
    if (n_f < 0 || n_f > n)
      throw std::invalid_argument("LesionSpec: n_f must be in [0, n]");
    if (when == LesionTiming::during_learning && k1 < 1)
      throw std::invalid_argument("LesionSpec: k1 must be >= 1");
  }
};

/// Assembles the block system
///   A = [I_m  C    0  ]      B = [0; 0; dt I_n]
///       [A_psi A_nu B_x]
///       [0    0    I_n ]
/// with Q = blkdiag(Q_plant, S) where Q_plant weights [psi; nu].
inline AugmentedSystem build_augmented(const PlantDynamics& plant,
                                       const Eigen::MatrixXd& Q_plant,
                                       const Eigen::MatrixXd& S,
                                       const Eigen::MatrixXd& R) {
  plant.validate();
  const int m = plant.m();
  const int n = plant.n();
  if (Q_plant.rows() != 2 * m || Q_plant.cols() != 2 * m)
    throw std::invalid_argument("build_augmented: Q_plant must be 2m x 2m");
  if (S.rows() != n || S.cols() != n)
    throw std::invalid_argument("build_augmented: S must be n x n");
  if (R.rows() != n || R.cols() != n)
    throw std::invalid_argument("build_augmented: R must be n x n");
  if (!S.isApprox(S.transpose()) || !R.isApprox(R.transpose()))
    throw std::invalid_argument("build_augmented: S and R must be symmetric");
  // PD check on R: Cholesky must succeed.
  Eigen::LLT<Eigen::MatrixXd> llt(R);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("build_augmented: R must be positive definite");

  const int np = 2 * m + n;
  AugmentedSystem sys;
  sys.m = m;
  sys.n = n;
  sys.A = Eigen::MatrixXd::Zero(np, np);
  sys.A.block(0, 0, m, m) = Eigen::MatrixXd::Identity(m, m);
  sys.A.block(0, m, m, m) = plant.C;
  sys.A.block(m, 0, m, m) = plant.A_psi;
  sys.A.block(m, m, m, m) = plant.A_nu;
  sys.A.block(m, 2 * m, m, n) = plant.B_x;
  sys.A.block(2 * m, 2 * m, n, n) = Eigen::MatrixXd::Identity(n, n);
  sys.B = Eigen::MatrixXd::Zero(np, n);
  sys.B.block(2 * m, 0, n, n) = plant.dt * Eigen::MatrixXd::Identity(n, n);
  sys.Q = Eigen::MatrixXd::Zero(np, np);
  sys.Q.block(0, 0, 2 * m, 2 * m) = Q_plant;
  sys.Q.block(2 * m, 2 * m, n, n) = S;
  sys.R = R;
  return sys;
}

/// Inverse of build_augmented's block placement; used to check that the
/// layout round-trips.
inline PlantDynamics extract_plant(const AugmentedSystem& sys, double dt) {
  const int m = sys.m;
  const int n = sys.n;
  PlantDynamics p;
  p.C = sys.A.block(0, m, m, m);
  p.A_psi = sys.A.block(m, 0, m, m);
  p.A_nu = sys.A.block(m, m, m, m);
  p.B_x = sys.A.block(m, 2 * m, m, n);
  p.dt = dt;
  return p;
}

struct PointMassParams {
  double dt = 0.1;
  double lambda_v = 0.25;                 // velocity dissipation
  Eigen::Vector2d target{1.0, 0.0};       // p_T
};

struct PointMassSystem {
  PlantDynamics plant;
  Eigen::Vector2d target;
};

/// Unit point mass navigating a plane (m = 2):
///   p_{t+1} = p_t + dt v_t
///   v_{t+1} = (1 - dt lambda_v) v_t + dt b x_t
/// Entries of b are uniform on [0, 1) from the seeded stream.
inline PointMassSystem make_point_mass(int n, std::uint64_t seed,
                                       const PointMassParams& params = {}) {
  if (n <= 2) throw std::invalid_argument("make_point_mass: requires n > 2");
  const int m = 2;
  NoiseStream rng(seed);
  PlantDynamics p;
  p.dt = params.dt;
  p.A_psi = Eigen::MatrixXd::Zero(m, m);
  p.A_nu = (1.0 - params.dt * params.lambda_v) * Eigen::MatrixXd::Identity(m, m);
  p.C = params.dt * Eigen::MatrixXd::Identity(m, m);
  p.B_x = params.dt * rng.uniform_matrix(m, n);
  p.validate();
  return PointMassSystem{std::move(p), params.target};
}

struct PendulumParams {
  double pole_mass = 0.2;      // m
  double pole_length = 0.3;    // l
  double inertia = 0.006;      // I
  double cart_mass = 0.5;      // M
  double cart_friction = 0.1;  // b
  double gravity = 9.8;        // g
  double dt = 0.1;
};

/// Inverted pendulum on a cart, linearized about the upright position.
/// psi = [p, theta], nu = [v, omega]. The cart velocity and the angular
/// velocity are both driven by scaled copies of the same random 1 x n
/// projection row, so a single actuation channel is distributed over the
/// network. The (2,1) velocity coupling follows the equations of motion
/// (friction term), not the appendix-style m^2 g l^2 entry.
inline PlantDynamics make_pendulum(int n, std::uint64_t seed,
                                   const PendulumParams& params = {}) {
  if (n <= 2) throw std::invalid_argument("make_pendulum: requires n > 2");
  const int m = 2;
  const double mp = params.pole_mass;
  const double l = params.pole_length;
  const double inertia = params.inertia;
  const double M = params.cart_mass;
  const double bf = params.cart_friction;
  const double g = params.gravity;
  const double dt = params.dt;
  const double den = inertia * (M + mp) + M * mp * l * l;

  NoiseStream rng(seed);
  const Eigen::MatrixXd b = rng.uniform_matrix(1, n);

  PlantDynamics p;
  p.dt = dt;
  p.C = dt * Eigen::MatrixXd::Identity(m, m);
  p.A_psi = Eigen::MatrixXd::Zero(m, m);
  p.A_psi(0, 1) = dt * mp * mp * g * l * l / den;
  p.A_psi(1, 1) = dt * mp * g * l * (M + mp) / den;
  p.A_nu = Eigen::MatrixXd::Identity(m, m);
  p.A_nu(0, 0) += dt * (-(inertia + mp * l * l) * bf / den);
  p.A_nu(1, 0) += dt * (-(mp * l) * bf / den);
  p.B_x = Eigen::MatrixXd(m, n);
  p.B_x.row(0) = dt * ((inertia + mp * l * l) / den) * b;
  p.B_x.row(1) = dt * (mp * l / den) * b;
  p.validate();
  return p;
}

/// Zeroes the projection columns of the (n - n_f) failed units. The input
/// plant is left untouched.
inline PlantDynamics apply_lesion(const PlantDynamics& plant, int n_f) {
  if (n_f < 0 || n_f > plant.n())
    throw std::invalid_argument("apply_lesion: n_f must be in [0, n]");
  PlantDynamics lesioned = plant;
  lesioned.B_x.rightCols(plant.n() - n_f).setZero();
  return lesioned;
}

/// One simulation step: next state and the stage cost c_t.
inline std::pair<AugmentedState, double> step(const AugmentedSystem& sys,
                                              const AugmentedState& state,
                                              const Eigen::VectorXd& u) {
  if (state.omega.size() != sys.n_prime() || state.m != sys.m ||
      state.n != sys.n)
    throw std::invalid_argument("step: state does not match system partition");
  if (u.size() != sys.n)
    throw std::invalid_argument("step: input length must be n");
  Eigen::VectorXd next = sys.A * state.omega + sys.B * u;
  const double cost = state.omega.dot(sys.Q * state.omega) + u.dot(sys.R * u);
  return {AugmentedState(std::move(next), sys.m, sys.n), cost};
}

}  // namespace lspinet
