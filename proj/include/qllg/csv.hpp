#pragma once

// CSV output with deterministic, locale-independent formatting. Doubles are
// printed via std::to_chars shortest round-trip form, so identical inputs
// produce byte-identical files on any platform.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qllg/analysis.hpp"
#include "qllg/dynamics.hpp"
#include "qllg/sampling.hpp"
#include "qllg/spectral.hpp"

namespace qllg::csv {

inline std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, p);
}

inline std::string format_u64(std::uint64_t v) {
  char buf[24];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("format_u64 failed");
  return std::string(buf, p);
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);  // binary: no newline translation anywhere
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  return f;
}

// t,energy,norm_residual,excited_weight,infidelity — the last two columns are
// empty when the trajectory was recorded without a spectrum.
inline void write_trajectory(const std::string& path, const TrajectoryRecord& traj) {
  auto f = open_out(path);
  f << "t,energy,norm_residual,excited_weight,infidelity\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    f << format_double(traj.times[i]) << ',' << format_double(traj.energies[i]) << ','
      << format_double(traj.norm_residuals[i]) << ',';
    if (traj.has_weights())
      f << format_double(traj.excited_weights[i]) << ',' << format_double(traj.infidelities[i]);
    else
      f << ',';
    f << '\n';
  }
}

// index,energy,degeneracy_group
inline void write_spectrum(const std::string& path, const Spectrum& s) {
  auto f = open_out(path);
  f << "index,energy,degeneracy_group\n";
  for (Eigen::Index i = 0; i < s.dim(); ++i)
    f << i << ',' << format_double(s.energies[i]) << ',' << s.group[std::size_t(i)] << '\n';
}

// dim,n_samples,mean_p0,stderr,window_lo,window_hi,empirical_frac,analytic_frac
// One row per probe window; analytic_frac carries the standard-normal
// integral (the nonstandard-prefactor variant is reported separately by
// callers that want it).
inline void write_overlap_stats(const std::string& path, const OverlapStats& st) {
  auto f = open_out(path);
  f << "dim,n_samples,mean_p0,stderr,window_lo,window_hi,empirical_frac,analytic_frac\n";
  for (const auto& w : st.windows) {
    f << st.dim << ',' << st.n_samples << ',' << format_double(st.mean_p0) << ','
      << format_double(st.stderr_p0) << ',' << format_double(w.eps1) << ','
      << format_double(w.eps2) << ',' << format_double(w.empirical_frac) << ','
      << format_double(w.analytic_standard) << '\n';
  }
}

// Checkpoint: commented header carrying {n_sites, t_final, seed}, then one
// (re, im) row per amplitude.
inline void write_checkpoint(const std::string& path, const StateVector& psi, double t_final,
                             std::uint64_t seed) {
  auto f = open_out(path);
  f << "# n_sites=" << psi.n_sites << " t_final=" << format_double(t_final)
    << " seed=" << format_u64(seed) << "\n";
  f << "re,im\n";
  for (Eigen::Index k = 0; k < psi.dim(); ++k)
    f << format_double(psi.amps[k].real()) << ',' << format_double(psi.amps[k].imag()) << '\n';
}

struct Checkpoint {
  StateVector state;
  double t_final = 0.0;
  std::uint64_t seed = 0;
};

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open checkpoint " + path);
  std::string line;
  if (!std::getline(f, line) || line.rfind("# n_sites=", 0) != 0)
    throw std::runtime_error("bad checkpoint header in " + path);
  Checkpoint c;
  int n_sites = 0;
  if (std::sscanf(line.c_str(), "# n_sites=%d t_final=%lf seed=%llu", &n_sites, &c.t_final,
                  reinterpret_cast<unsigned long long*>(&c.seed)) != 3)
    throw std::runtime_error("unparseable checkpoint header in " + path);
  std::getline(f, line);  // column header
  Vector a(Eigen::Index{1} << n_sites);
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    if (!std::getline(f, line)) throw std::runtime_error("truncated checkpoint " + path);
    auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("bad checkpoint row in " + path);
    a[k] = cplx(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
  }
  c.state = StateVector{std::move(a), n_sites};
  return c;
}

// h,seed,p0,E_exact,E_sim,energy_error,infidelity,subspace_infidelity,
// fitted_rate,predicted_rate,tau_predicted,t_converged,converged
inline void write_report_header(std::ofstream& f) {
  f << "h,seed,p0,E_exact,E_sim,energy_error,infidelity,subspace_infidelity,"
       "fitted_rate,predicted_rate,tau_predicted,t_converged,converged\n";
}

inline void write_report_row(std::ofstream& f, double h, std::uint64_t seed,
                             const ConvergenceReport& r) {
  f << format_double(h) << ',' << format_u64(seed) << ',' << format_double(r.p0) << ','
    << format_double(r.e_exact) << ',' << format_double(r.e_sim) << ','
    << format_double(r.energy_error) << ',' << format_double(r.infidelity) << ','
    << format_double(r.subspace_infidelity) << ',' << format_double(r.fitted_rate) << ','
    << format_double(r.predicted_rate) << ',' << format_double(r.tau_predicted) << ',';
  if (r.t_converged >= 0.0) f << format_double(r.t_converged);
  f << ',' << (r.converged ? "true" : "false") << '\n';
}

}  // namespace qllg::csv
