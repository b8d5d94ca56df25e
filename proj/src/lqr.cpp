#include "roa/lqr.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <string>

#include "roa/error.hpp"

namespace roa {

using Eigen::MatrixXd;

namespace {

constexpr double kResidualTolerance = 1e-8;
constexpr int kMaxNewtonSteps = 60;

[[noreturn]] void fail(const std::string& what) {
  throw Error(ErrorKind::NoStabilizingSolution, "care: " + what);
}

MatrixXd symmetrize(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

// Stable invariant subspace of the Hamiltonian: S = X2 X1^-1.
MatrixXd hamiltonian_seed(const MatrixXd& a, const MatrixXd& g, const MatrixXd& q) {
  const Eigen::Index n = a.rows();
  MatrixXd h(2 * n, 2 * n);
  h << a, -g, -q, -a.transpose();

  Eigen::EigenSolver<MatrixXd> es(h);
  if (es.info() != Eigen::Success) fail("Hamiltonian eigendecomposition failed");

  Eigen::MatrixXcd basis(2 * n, n);
  Eigen::Index found = 0;
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    if (es.eigenvalues()(i).real() < 0.0) {
      if (found == n) fail("Hamiltonian has more than n stable eigenvalues");
      basis.col(found++) = es.eigenvectors().col(i);
    }
  }
  if (found != n) fail("Hamiltonian has eigenvalues on the imaginary axis");

  const Eigen::MatrixXcd x1 = basis.topRows(n);
  const Eigen::MatrixXcd x2 = basis.bottomRows(n);
  const Eigen::MatrixXcd s = x1.transpose().fullPivLu().solve(x2.transpose()).transpose();
  return symmetrize(s.real());
}

using MatrixXe = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

// Solves A'X + XA = -M via the Kronecker form.
template <typename Mat>
Mat lyapunov_kron(const Mat& a, const Mat& m) {
  using Scalar = typename Mat::Scalar;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index n = a.rows();
  const Mat eye = Mat::Identity(n, n);
  // Column-major vec: vec(A'X) = (I kron A') vec X, vec(XA) = (A' kron I) vec X.
  Mat op = Mat::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      op.block(i * n, j * n, n, n) += eye(i, j) * a.transpose();
      op.block(i * n, j * n, n, n) += a(j, i) * eye;
    }
  }
  const Vec rhs = -Eigen::Map<const Vec>(m.data(), n * n);
  const Vec x = op.fullPivLu().solve(rhs);
  return Eigen::Map<const Mat>(x.data(), n, n);
}

// A few Newton corrections in extended precision. Badly conditioned systems
// (|S| ~ 1e5) otherwise stall a little above the residual tolerance.
MatrixXd polish(const MatrixXd& a, const MatrixXd& b, const MatrixXd& q, const MatrixXd& r, const MatrixXd& s0) {
  const MatrixXe ae = a.cast<long double>(), be = b.cast<long double>(), qe = q.cast<long double>();
  const MatrixXe g = be * r.cast<long double>().llt().solve(be.transpose());
  MatrixXe s = s0.cast<long double>();
  for (int it = 0; it < 3; ++it) {
    const MatrixXe res = ae.transpose() * s + s * ae - s * g * s + qe;
    const MatrixXe delta = lyapunov_kron<MatrixXe>(ae - g * s, res);
    s += 0.5L * (delta + delta.transpose());
  }
  return s.cast<double>();
}

double spectral_abscissa(const MatrixXd& m) {
  Eigen::EigenSolver<MatrixXd> es(m, false);
  return es.eigenvalues().real().maxCoeff();
}

}  // namespace

void LqrWeights::validate() const {
  if (!q_diag.allFinite() || (q_diag.array() < 0.0).any()) {
    throw Error(ErrorKind::InvalidConfiguration, "weights: Q diagonal must be finite and >= 0");
  }
  if (!r_diag.allFinite() || (r_diag.array() <= 0.0).any()) {
    throw Error(ErrorKind::InvalidConfiguration, "weights: R diagonal must be finite and > 0");
  }
}

StateSpace nominal_state_space(const PlantConfig& cfg) {
  StateSpace ss;
  ss.a_matrix(0, 1) = 1.0;
  ss.a_matrix(1, 4) = -cfg.gravity;
  ss.a_matrix(2, 3) = 1.0;
  ss.a_matrix(4, 5) = 1.0;
  ss.b_matrix(3, 0) = 1.0 / cfg.mass;
  ss.b_matrix(3, 1) = 1.0 / cfg.mass;
  ss.b_matrix(5, 0) = cfg.arm / cfg.inertia;
  ss.b_matrix(5, 1) = -cfg.arm / cfg.inertia;
  return ss;
}

double care_residual(const MatrixXd& a, const MatrixXd& b, const MatrixXd& q, const MatrixXd& r,
                     const MatrixXd& s) {
  const MatrixXd rinv_bt = r.llt().solve(b.transpose());
  const MatrixXd res = a.transpose() * s + s * a - s * b * rinv_bt * s + q;
  return res.cwiseAbs().maxCoeff();
}

MatrixXd solve_continuous_lyapunov(const MatrixXd& a, const MatrixXd& m) {
  return lyapunov_kron<MatrixXd>(a, m);
}

MatrixXd solve_care(const MatrixXd& a, const MatrixXd& b, const MatrixXd& q, const MatrixXd& r) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.rows() != n || q.rows() != n || q.cols() != n || r.rows() != b.cols() ||
      r.cols() != b.cols()) {
    throw Error(ErrorKind::InvalidConfiguration, "care: inconsistent matrix dimensions");
  }
  Eigen::LLT<MatrixXd> r_llt(r);
  if (r_llt.info() != Eigen::Success) {
    throw Error(ErrorKind::InvalidConfiguration, "care: R must be positive definite");
  }
  const MatrixXd rinv_bt = r_llt.solve(b.transpose());
  const MatrixXd g = b * rinv_bt;

  MatrixXd s = hamiltonian_seed(a, g, q);
  double residual = care_residual(a, b, q, r, s);

  // Newton-Kleinman from the seed; each step solves a Lyapunov equation for
  // the current closed loop. Keep the best iterate since the last steps sit at
  // the rounding floor.
  MatrixXd best = s;
  double best_residual = residual;
  for (int it = 0; it < kMaxNewtonSteps && residual > 0.0; ++it) {
    const MatrixXd k = rinv_bt * s;
    const MatrixXd acl = a - b * k;
    if (spectral_abscissa(acl) >= 0.0) break;
    s = symmetrize(solve_continuous_lyapunov(acl, q + k.transpose() * r * k));
    if (!s.allFinite()) break;
    residual = care_residual(a, b, q, r, s);
    if (residual < best_residual) {
      best = s;
      best_residual = residual;
    } else if (best_residual <= kResidualTolerance) {
      break;
    }
  }

  if (best_residual > 0.0) {
    const MatrixXd polished = polish(a, b, q, r, best);
    const double polished_residual = care_residual(a, b, q, r, polished);
    if (polished.allFinite() && polished_residual < best_residual) {
      best = polished;
      best_residual = polished_residual;
    }
  }

  if (!(best_residual <= kResidualTolerance)) {
    char msg[64];
    std::snprintf(msg, sizeof msg, "residual %.3g exceeds tolerance", best_residual);
    fail(msg);
  }
  if (spectral_abscissa(a - g * best) >= 0.0) fail("closed loop is not Hurwitz");
  return best;
}

LqrSolution solve_care(const StateSpace& ss, const LqrWeights& w) {
  w.validate();
  const MatrixXd s = solve_care(ss.a_matrix, ss.b_matrix, w.q_matrix(), w.r_matrix());
  LqrSolution sol;
  sol.s_matrix = s;
  sol.k_gain = w.r_matrix().llt().solve(ss.b_matrix.transpose() * sol.s_matrix);
  return sol;
}

double closed_loop_spectral_abscissa(const StateSpace& ss, const Matrix26& k) {
  return spectral_abscissa(ss.a_matrix - ss.b_matrix * k);
}

ControlInput lqr_control(const LqrSolution& sol, const State& s, const State& s_des,
                         const ControlInput& u_eq) {
  const Vector6 error = s.vector() - s_des.vector();
  return ControlInput(u_eq.vector() - sol.k_gain * error);
}

}  // namespace roa
