#pragma once

#include <Eigen/Dense>

#include "roa/dynamics.hpp"

namespace roa {

using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Matrix62 = Eigen::Matrix<double, 6, 2>;
using Matrix26 = Eigen::Matrix<double, 2, 6>;

// Linear model  xdot = A x + B u  about hover.
struct StateSpace {
  Matrix6 a_matrix = Matrix6::Zero();
  Matrix62 b_matrix = Matrix62::Zero();
};

// Diagonal LQR weights. Q >= 0, R > 0 entrywise.
struct LqrWeights {
  Vector6 q_diag = (Vector6() << 1, 100, 10, 100, 10, 1000).finished();
  Vector2 r_diag{10000, 10000};

  Matrix6 q_matrix() const { return q_diag.asDiagonal(); }
  Eigen::Matrix2d r_matrix() const { return r_diag.asDiagonal(); }

  void validate() const;
};

struct LqrSolution {
  Matrix26 k_gain = Matrix26::Zero();
  Matrix6 s_matrix = Matrix6::Zero();
};

// Linearization of nominal_dynamics at hover with u = (mg/2, mg/2).
StateSpace nominal_state_space(const PlantConfig& cfg);

// Stabilizing solution S of A'S + SA - S B R^-1 B' S + Q = 0 for arbitrary
// dimensions. Hamiltonian eigenvector seed followed by Newton-Kleinman
// refinement. Throws Error(NoStabilizingSolution) when the max-norm residual
// stays above 1e-8 or the closed loop is not Hurwitz.
Eigen::MatrixXd solve_care(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                           const Eigen::MatrixXd& q, const Eigen::MatrixXd& r);

LqrSolution solve_care(const StateSpace& ss, const LqrWeights& w);

// max |A'S + SA - S B R^-1 B' S + Q|
double care_residual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& q,
                     const Eigen::MatrixXd& r, const Eigen::MatrixXd& s);

// Solves A'X + XA = -M by Kronecker vectorization.
Eigen::MatrixXd solve_continuous_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& m);

// Largest real part of eig(A - BK).
double closed_loop_spectral_abscissa(const StateSpace& ss, const Matrix26& k);

// u_eq - K (s - s_des)
ControlInput lqr_control(const LqrSolution& sol, const State& s, const State& s_des,
                         const ControlInput& u_eq);

}  // namespace roa
