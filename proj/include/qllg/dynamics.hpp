#pragma once

// Real-time integration of the nonlinear dissipative pure-state flow
//
//   d|psi>/dt = -(kappa + i)/(hbar (1 + kappa^2)) (H - <psi|H|psi>) |psi>,
//
// whose fixed points are exactly the eigenstates of H, plus a closed-form
// propagator in the eigenbasis used as a cross-validation oracle.

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "qllg/hamiltonian.hpp"
#include "qllg/spectral.hpp"
#include "qllg/state.hpp"

namespace qllg {

enum class Integrator { euler, rk4 };

inline const char* to_string(Integrator i) { return i == Integrator::euler ? "euler" : "rk4"; }
inline Integrator integrator_from_string(const std::string& s) {
  if (s == "euler") return Integrator::euler;
  if (s == "rk4") return Integrator::rk4;
  throw std::invalid_argument("unknown integrator '" + s + "' (euler|rk4)");
}

struct QLLGParams {
  double kappa = 0.3;
  double hbar = 1.0;
  double dt = 0.0;            // <= 0: pick the stability step at evolve() entry
  double t_max = 0.0;
  double residual_tol = 1e-8; // stop when ||(H - <H>)psi|| <= residual_tol * ||H||_bound
  Integrator integrator = Integrator::rk4;
  int record_stride = 1;

  // Derived quantities are recomputed on demand, never cached.
  cplx flow_prefactor() const { return -cplx(kappa, 1.0) / (hbar * (1.0 + kappa * kappa)); }
  cplx heff_scale() const { return cplx(1.0, -kappa) / (1.0 + kappa * kappa); }
  double gamma() const { return kappa / (hbar * (1.0 + kappa * kappa)); }

  void validate() const {
    // kappa == 0 is accepted deliberately: the unitary limit is a required
    // regression point even though damping nominally means kappa > 0.
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw std::invalid_argument("QLLGParams: kappa must be >= 0");
    if (!(hbar > 0.0)) throw std::invalid_argument("QLLGParams: hbar must be > 0");
    if (!(residual_tol >= 0.0)) throw std::invalid_argument("QLLGParams: residual_tol must be >= 0");
    if (record_stride < 1) throw std::invalid_argument("QLLGParams: record_stride must be >= 1");
  }
};

// Largest step we consider safe: keeps the per-step rotation angle of the
// effective generator below ~0.1 rad relative to the spectral-radius bound.
inline double stability_dt(const HamiltonianOp& h, double kappa, double hbar) {
  return 0.1 * hbar * (1.0 + kappa * kappa) / ((1.0 + kappa) * h.norm_bound());
}
inline double stability_dt(const HamiltonianOp& h, const QLLGParams& p) {
  return stability_dt(h, p.kappa, p.hbar);
}

// Time derivative of a normalized state. Vanishes on eigenstates.
inline Vector qllg_rhs(const HamiltonianOp& h, const StateVector& psi, const QLLGParams& p) {
  Vector hp;
  h.apply_into(psi.amps, hp);
  double e = psi.amps.dot(hp).real();
  return p.flow_prefactor() * (hp - e * psi.amps);
}

// ||(H - <H>)psi|| recovered from the rhs vector. Computing it this way
// avoids the catastrophic cancellation of ||H psi||^2 - <H>^2 near fixed
// points.
inline double stationarity_residual(const Vector& rhs, const QLLGParams& p) {
  return rhs.norm() * p.hbar * std::sqrt(1.0 + p.kappa * p.kappa);
}

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<double> energies;        // <H>
  std::vector<double> norm_residuals;  // | ||psi|| - 1 | before renormalization
  std::vector<double> excited_weights; // 1 - ||P0 psi||^2, present when a spectrum was supplied
  std::vector<double> infidelities;    // 1 - ||P0 psi||, distance to the nearest ground-space state
  bool converged = false;
  double t_final = 0.0;
  double final_residual = 0.0;         // stationarity residual at the last step
  long long steps = 0;
  StateVector final_state;
  QLLGParams params;

  bool has_weights() const { return !excited_weights.empty(); }
  double initial_ground_weight() const {
    if (!has_weights()) throw std::runtime_error("trajectory recorded without a spectrum");
    return 1.0 - excited_weights.front();
  }
};

using StepObserver = std::function<void(double t, const StateVector& psi)>;

// Integrates the flow from psi0. Records observables every record_stride
// steps (plus the final step); stops early once the stationarity residual
// drops below residual_tol * ||H||_bound.
//
// `deflate`, when given, re-projects the state off that subspace after every
// step. The continuous flow preserves orthogonality to any eigenspace
// exactly, but discrete arithmetic re-seeds the projected-out component at
// rounding level, and the flow then amplifies it exponentially whenever the
// subspace lies below the target level. Deflation is how an excited-state
// run maintains the zero-overlap premise it started from; leave it null for
// plain ground-state relaxation.
inline TrajectoryRecord evolve(const StateVector& psi0, const HamiltonianOp& h, QLLGParams p,
                               const Spectrum* spectrum = nullptr,
                               const EnergyProjector* deflate = nullptr,
                               const StepObserver& observer = {}) {
  p.validate();
  if (p.dt <= 0.0) p.dt = stability_dt(h, p);
  if (!(p.t_max >= p.dt)) throw std::invalid_argument("evolve: t_max must be at least dt");
  if (psi0.dim() != h.dim()) throw std::invalid_argument("evolve: dimension mismatch");

  StateVector psi = psi0;
  normalize(psi);
  const cplx pref = p.flow_prefactor();
  const double bound = h.norm_bound();
  const double stop_level = p.residual_tol * bound;
  const long long n_steps = (long long)std::ceil(p.t_max / p.dt - 1e-9);

  EnergyProjector p0;
  if (spectrum) p0 = ground_projector(*spectrum);

  TrajectoryRecord rec;
  rec.params = p;

  Vector hp, k1, k2, k3, k4, phi;
  h.apply_into(psi.amps, hp);
  double e = psi.amps.dot(hp).real();
  double drift = 0.0;
  long long last_recorded = -1;

  auto rayleigh_rhs = [&](const Vector& v, Vector& out) {
    // Rayleigh-quotient form: reduces to the normalized rhs on unit vectors
    // and keeps the norm of the continuous flow exact at RK stage points.
    h.apply_into(v, phi);
    double r = v.dot(phi).real() / v.squaredNorm();
    out = pref * (phi - r * v);
  };

  auto record = [&](long long step, double t) {
    if (step == last_recorded) return;
    last_recorded = step;
    rec.times.push_back(t);
    rec.energies.push_back(e);
    rec.norm_residuals.push_back(drift);
    if (spectrum) {
      double w = p0.weight(psi);
      rec.excited_weights.push_back(1.0 - w);
      rec.infidelities.push_back(1.0 - std::sqrt(std::max(w, 0.0)));
    }
    if (observer) observer(t, psi);
  };

  long long step = 0;
  double t = 0.0;
  while (true) {
    double resid = (hp - e * psi.amps).norm();
    bool stop = resid <= stop_level;
    bool horizon = step >= n_steps;
    if (step % p.record_stride == 0 || stop || horizon) record(step, t);
    if (stop || horizon) {
      rec.converged = stop;
      rec.final_residual = resid;
      break;
    }

    if (p.integrator == Integrator::euler) {
      psi.amps += p.dt * (pref * (hp - e * psi.amps));
    } else {
      k1 = pref * (hp - e * psi.amps);
      rayleigh_rhs(psi.amps + (0.5 * p.dt) * k1, k2);
      rayleigh_rhs(psi.amps + (0.5 * p.dt) * k2, k3);
      rayleigh_rhs(psi.amps + p.dt * k3, k4);
      psi.amps += (p.dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    double norm = psi.amps.norm();
    if (!std::isfinite(norm) || norm == 0.0)
      throw std::runtime_error("evolve: non-finite amplitudes at t=" + std::to_string(t) +
                               " (step-size instability; dt=" + std::to_string(p.dt) + ")");
    drift = std::abs(norm - 1.0);
    psi.amps /= norm;
    if (deflate) {
      psi.amps -= deflate->apply(psi.amps);
      psi.amps /= psi.amps.norm();
    }
    h.apply_into(psi.amps, hp);
    e = psi.amps.dot(hp).real();
    if (!std::isfinite(e))
      throw std::runtime_error("evolve: non-finite energy at t=" + std::to_string(t));
    ++step;
    t = double(step) * p.dt;
  }

  rec.t_final = t;
  rec.steps = step;
  rec.final_state = std::move(psi);
  return rec;
}

struct SpectralCoefficients {
  Vector coeffs;  // c_i = <E_i|psi0>, unit norm
  const Spectrum* spectrum = nullptr;
};

inline SpectralCoefficients decompose(const Spectrum& s, const StateVector& psi) {
  if (psi.dim() != s.dim()) throw std::invalid_argument("decompose: dimension mismatch");
  SpectralCoefficients c;
  c.coeffs = s.eigenvectors.adjoint() * psi.amps;
  c.spectrum = &s;
  double n = c.coeffs.norm();
  if (std::abs(n - 1.0) > 1e-10)
    throw std::runtime_error("decompose: coefficients not normalized (input state norm " +
                             std::to_string(n) + ")");
  return c;
}

// Closed-form state at time t:
//   c_i(t) ~ c_i exp(-gamma (E_i - E_0) t) exp(-i (E_i - E_0) t / (hbar (1+kappa^2))),
// renormalized. E_0 is factored out of the exponentials and the weights are
// additionally shifted by the largest log-weight, so no intermediate quantity
// can overflow or underflow collectively. The global phase from E_0 is
// dropped; all downstream comparisons are phase-invariant.
inline StateVector spectral_propagate(const SpectralCoefficients& c0, double t,
                                      const QLLGParams& p) {
  if (!c0.spectrum) throw std::invalid_argument("spectral_propagate: missing spectrum");
  p.validate();
  const Spectrum& s = *c0.spectrum;
  const double gamma = p.gamma();
  const double omega_scale = 1.0 / (p.hbar * (1.0 + p.kappa * p.kappa));
  const double e0 = s.ground_energy();

  const Eigen::Index d = s.dim();
  double lmax = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd logw(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    double a = std::abs(c0.coeffs[i]);
    logw[i] = (a == 0.0) ? -std::numeric_limits<double>::infinity()
                         : std::log(a) - gamma * (s.energies[i] - e0) * t;
    lmax = std::max(lmax, logw[i]);
  }
  if (!std::isfinite(lmax))
    throw std::runtime_error("spectral_propagate: all spectral weights vanished");

  Vector c(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!std::isfinite(logw[i])) { c[i] = 0.0; continue; }
    double mag = std::exp(logw[i] - lmax);
    double phase = std::arg(c0.coeffs[i]) - (s.energies[i] - e0) * t * omega_scale;
    c[i] = std::polar(mag, phase);
  }
  Vector out = s.eigenvectors * c;
  return normalized(std::move(out));
}

}  // namespace qllg
