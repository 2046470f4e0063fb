#pragma once

// Convergence diagnostics: phase-invariant distances, excited-weight decay
// fits, and the predicted convergence-time formulas they are checked against.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "qllg/dynamics.hpp"
#include "qllg/spectral.hpp"
#include "qllg/state.hpp"

namespace qllg {

// 1 - |<a|b>|: invariant under independent global phases.
inline double infidelity(const StateVector& a, const StateVector& b) {
  return 1.0 - std::abs(overlap(a, b));
}

// Probability weight outside the projector's subspace.
inline double excited_weight(const StateVector& psi, const EnergyProjector& p) {
  return 1.0 - p.weight(psi);
}

struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RateFit {
  double rate = 0.0;       // positive decay rate of the fitted exponential
  double intercept = 0.0;  // log-weight at t = 0 extrapolated from the window
  double r_squared = 0.0;
  int n_points = 0;
};

// Least-squares slope of log(weight) vs t restricted to weight in (lo, hi).
// The window keeps early multi-mode transients (above hi) and the floating
// point noise floor (below lo) out of the fit.
inline RateFit fit_decay_rate(const std::vector<double>& times,
                              const std::vector<double>& weights, double lo = 1e-10,
                              double hi = 1e-1) {
  if (times.size() != weights.size()) throw std::invalid_argument("fit_decay_rate: length mismatch");
  std::vector<double> t, y;
  for (std::size_t i = 0; i < times.size(); ++i)
    if (weights[i] > lo && weights[i] < hi) {
      t.push_back(times[i]);
      y.push_back(std::log(weights[i]));
    }
  if (t.size() < 10)
    throw FitError("fit_decay_rate: only " + std::to_string(t.size()) +
                   " points inside the decay window [" + std::to_string(lo) + ", " +
                   std::to_string(hi) + "]");
  const double n = double(t.size());
  double st = 0, sy = 0, stt = 0, sty = 0, syy = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    st += t[i];
    sy += y[i];
    stt += t[i] * t[i];
    sty += t[i] * y[i];
    syy += y[i] * y[i];
  }
  double denom = n * stt - st * st;
  if (denom <= 0.0) throw FitError("fit_decay_rate: degenerate time window");
  RateFit f;
  double slope = (n * sty - st * sy) / denom;
  f.rate = -slope;
  f.intercept = (sy - slope * st) / n;
  double ss_tot = syy - sy * sy / n;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    double r = y[i] - (f.intercept + slope * t[i]);
    ss_res += r * r;
  }
  f.r_squared = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
  f.n_points = int(t.size());
  return f;
}

inline RateFit fit_decay_rate(const TrajectoryRecord& traj, double lo = 1e-10, double hi = 1e-1) {
  if (!traj.has_weights())
    throw FitError("fit_decay_rate: trajectory has no excited-weight record");
  return fit_decay_rate(traj.times, traj.excited_weights, lo, hi);
}

// Amplitude-level decay rate gamma * gap. The probability weight fitted by
// fit_decay_rate decays at twice this value.
inline double predicted_rate(double kappa, double hbar, double gap) {
  return kappa * gap / (hbar * (1.0 + kappa * kappa));
}

// Convergence-time estimate ln(2) * hbar (1+kappa^2) / (kappa gap) * N for a
// random initial state on N sites.
inline double predicted_tau(double kappa, double hbar, double gap, int n_sites) {
  if (!(kappa > 0.0) || !(hbar > 0.0) || !(gap > 0.0) || n_sites < 1)
    throw std::invalid_argument("predicted_tau: all arguments must be positive");
  return std::log(2.0) * hbar * (1.0 + kappa * kappa) / (kappa * gap) * double(n_sites);
}

// Time for the p0-relative error to fall below eps:
//   t = hbar (1+kappa^2) / (kappa gap) * (-ln eps - ln p0).
// With p0 = 2^-N and eps = 1 this is exactly predicted_tau.
inline double time_to_epsilon(double kappa, double hbar, double gap, double p0, double eps) {
  if (!(p0 > 0.0) || p0 > 1.0)
    throw std::invalid_argument("time_to_epsilon: p0 must be in (0, 1] (zero ground overlap never converges to the ground space)");
  if (!(eps > 0.0) || eps > 1.0) throw std::invalid_argument("time_to_epsilon: eps must be in (0, 1]");
  if (!(kappa > 0.0) || !(hbar > 0.0) || !(gap > 0.0))
    throw std::invalid_argument("time_to_epsilon: kappa, hbar, gap must be positive");
  return hbar * (1.0 + kappa * kappa) / (kappa * gap) * (-std::log(eps) - std::log(p0));
}

struct ConvergenceReport {
  double e_exact = 0.0;
  double e_sim = 0.0;
  double energy_error = 0.0;
  double infidelity = 0.0;           // 1 - ||P0 psi||: exact for a nondegenerate target
  double subspace_infidelity = 0.0;  // 1 - ||P0 psi||^2: the metric near degeneracies
  double fitted_rate = 0.0;          // probability-weight rate, ~2x predicted_rate; 0 if the fit window was empty
  double predicted_rate = 0.0;       // gamma * gap (amplitude level)
  double tau_predicted = 0.0;
  double t_converged = -1.0;         // -1 when the run hit t_max unconverged
  double p0 = -1.0;                  // initial ground weight; -1 if not recorded
  bool converged = false;
};

inline ConvergenceReport compare_to_exact(const TrajectoryRecord& traj, const Spectrum& spectrum) {
  ConvergenceReport r;
  r.e_exact = spectrum.ground_energy();
  r.e_sim = traj.energies.back();
  r.energy_error = std::abs(r.e_exact - r.e_sim);
  EnergyProjector p0 = ground_projector(spectrum);
  double w = p0.weight(traj.final_state);
  r.infidelity = 1.0 - std::sqrt(std::max(w, 0.0));
  r.subspace_infidelity = 1.0 - w;
  double gap = spectral_gap(spectrum);
  r.predicted_rate = predicted_rate(traj.params.kappa, traj.params.hbar, gap);
  r.tau_predicted = (traj.params.kappa > 0.0)
                        ? predicted_tau(traj.params.kappa, traj.params.hbar, gap,
                                        traj.final_state.n_sites)
                        : 0.0;
  r.converged = traj.converged;
  r.t_converged = traj.converged ? traj.t_final : -1.0;
  if (traj.has_weights()) r.p0 = traj.initial_ground_weight();
  try {
    r.fitted_rate = fit_decay_rate(traj).rate;
  } catch (const FitError&) {
    r.fitted_rate = 0.0;  // trajectory never traversed the fit window
  }
  return r;
}

}  // namespace qllg
