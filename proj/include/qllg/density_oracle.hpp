#pragma once

// Small-system density-matrix oracle for the dissipative master equation
//
//   rho_dot = (i/hbar)[rho, H] + i kappa [rho, rho_dot],
//
// which is implicit in rho_dot. Each evaluation rearranges it as
//   (1 - i kappa ad_rho) rho_dot = (i/hbar)[rho, H],   ad_rho X = rho X - X rho,
// and solves the vectorized dense linear system of dimension 4^N. The
// operator is never singular for a valid state: its eigenvalues are
// 1 - i kappa (lambda_a - lambda_b) with lambda the populations of rho, so
// every eigenvalue has unit real part. Deliberately capped at N <= 4 — this
// is a cross-check oracle, not a production path.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "qllg/dynamics.hpp"
#include "qllg/hamiltonian.hpp"

namespace qllg {

struct DensityMatrix {
  Eigen::MatrixXcd rho;

  static DensityMatrix pure(const StateVector& psi) {
    DensityMatrix d;
    d.rho = psi.amps * psi.amps.adjoint();
    return d;
  }

  double trace_real() const { return rho.trace().real(); }
  double purity() const { return rho.squaredNorm(); }  // Tr(rho^2) for Hermitian rho
  double hermiticity_error() const { return (rho - rho.adjoint()).norm(); }
  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

  void validate(double tol = 1e-8) const {
    if (rho.rows() != rho.cols()) throw std::invalid_argument("DensityMatrix: not square");
    if (hermiticity_error() > tol) throw std::invalid_argument("DensityMatrix: not Hermitian");
    if (std::abs(trace_real() - 1.0) > tol) throw std::invalid_argument("DensityMatrix: trace != 1");
    if (min_eigenvalue() < -1e-10) throw std::invalid_argument("DensityMatrix: negative eigenvalue");
  }
};

// (1/2)||a - b||_1 for Hermitian a, b.
inline double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a - b, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

struct DensityTrajectory {
  std::vector<double> times;
  std::vector<Eigen::MatrixXcd> states;      // recorded every record_stride steps
  std::vector<double> energies;              // Tr(H rho)
  std::vector<double> trace_drifts;          // |Tr rho - 1| per step, before correction
  std::vector<double> purities;
  double max_trace_drift = 0.0;
};

namespace detail {

// Solves (1 - i kappa ad_rho) X = C via column-major vectorization:
//   M[v(i,j), v(k,l)] = delta_ik delta_jl - i kappa (rho_ik delta_jl - rho_lj delta_ik).
inline Eigen::MatrixXcd solve_implicit(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& c,
                                       double kappa) {
  const Eigen::Index d = rho.rows();
  const Eigen::Index dd = d * d;
  const cplx ik(0.0, kappa);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(dd, dd);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index k = 0; k < d; ++k)
      for (Eigen::Index i = 0; i < d; ++i)
        m(i + d * j, k + d * j) -= ik * rho(i, k);
  for (Eigen::Index l = 0; l < d; ++l)
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index i = 0; i < d; ++i)
        m(i + d * j, i + d * l) += ik * rho(l, j);
  Eigen::VectorXcd x = m.partialPivLu().solve(Eigen::Map<const Eigen::VectorXcd>(c.data(), dd));
  if (!x.allFinite())
    throw std::runtime_error("density solve produced non-finite derivative (implicit operator near-singular?)");
  return Eigen::Map<const Eigen::MatrixXcd>(x.data(), d, d);
}

inline Eigen::MatrixXcd density_rhs(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& hdense,
                                    double kappa, double hbar) {
  Eigen::MatrixXcd comm = rho * hdense - hdense * rho;
  Eigen::MatrixXcd c = (cplx(0.0, 1.0) / hbar) * comm;
  if (kappa == 0.0) return c;  // von Neumann limit, no solve needed
  return solve_implicit(rho, c, kappa);
}

}  // namespace detail

inline DensityTrajectory density_qllg_evolve(const DensityMatrix& rho0, const HamiltonianOp& h,
                                             const QLLGParams& p_in, int n_cap = 4) {
  QLLGParams p = p_in;
  p.validate();
  if (h.n_sites() > n_cap)
    throw std::runtime_error("density_qllg_evolve: " + std::to_string(h.n_sites()) +
                             " sites exceeds oracle cap " + std::to_string(n_cap));
  rho0.validate();
  if (rho0.rho.rows() != h.dim()) throw std::invalid_argument("density_qllg_evolve: dimension mismatch");
  if (p.dt <= 0.0) p.dt = stability_dt(h, p);
  if (!(p.t_max >= p.dt)) throw std::invalid_argument("density_qllg_evolve: t_max must be at least dt");

  const Eigen::MatrixXcd hd = h.to_dense();
  Eigen::MatrixXcd rho = rho0.rho;
  const long long n_steps = (long long)std::ceil(p.t_max / p.dt - 1e-9);

  DensityTrajectory out;
  auto record = [&](double t) {
    out.times.push_back(t);
    out.states.push_back(rho);
    out.energies.push_back((hd * rho).trace().real());
    out.purities.push_back(rho.squaredNorm());
  };

  record(0.0);
  for (long long step = 0; step < n_steps; ++step) {
    if (p.integrator == Integrator::euler) {
      rho += p.dt * detail::density_rhs(rho, hd, p.kappa, p.hbar);
    } else {
      Eigen::MatrixXcd k1 = detail::density_rhs(rho, hd, p.kappa, p.hbar);
      Eigen::MatrixXcd k2 = detail::density_rhs(rho + (0.5 * p.dt) * k1, hd, p.kappa, p.hbar);
      Eigen::MatrixXcd k3 = detail::density_rhs(rho + (0.5 * p.dt) * k2, hd, p.kappa, p.hbar);
      Eigen::MatrixXcd k4 = detail::density_rhs(rho + p.dt * k3, hd, p.kappa, p.hbar);
      rho += (p.dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    // Hygiene: the exact flow preserves Hermiticity and trace; discrete steps
    // drift at rounding/truncation level. Record the drift, then correct.
    double tr = rho.trace().real();
    double drift = std::abs(tr - 1.0);
    out.trace_drifts.push_back(drift);
    out.max_trace_drift = std::max(out.max_trace_drift, drift);
    if (!std::isfinite(tr) || tr <= 0.0)
      throw std::runtime_error("density_qllg_evolve: non-finite trace (step-size instability)");
    rho = ((rho + rho.adjoint()) * 0.5).eval();
    rho /= tr;
    if ((step + 1) % p.record_stride == 0 || step + 1 == n_steps)
      record(double(step + 1) * p.dt);
  }
  return out;
}

}  // namespace qllg
