#pragma once

// Seeded Haar-random states and the overlap statistics of random initial
// conditions against the ground space.
//
// Reproducibility contract: a (seed, stream) pair fully determines a state,
// bit for bit, on any platform. The generator is std::mt19937_64 (output
// pinned by the C++ standard), seeded from splitmix64(seed + C*(stream+1))
// with C = 0x9E3779B97F4A7C15. Uniforms take the top 53 bits; normals come
// from an explicit Box-Muller transform (no rejection, fixed draw count).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "qllg/spectral.hpp"
#include "qllg/state.hpp"

namespace qllg {

struct SeededSource {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::mt19937_64 make_engine(const SeededSource& src) {
  return std::mt19937_64(splitmix64(src.seed + 0x9E3779B97F4A7C15ull * (src.stream + 1)));
}

inline double next_uniform(std::mt19937_64& eng) {
  return double(eng() >> 11) * 0x1.0p-53;  // [0, 1)
}

// One Box-Muller pair of independent standard normals.
inline std::pair<double, double> next_normal_pair(std::mt19937_64& eng) {
  double u1 = 1.0 - next_uniform(eng);  // (0, 1]: keeps the log finite
  double u2 = next_uniform(eng);
  double r = std::sqrt(-2.0 * std::log(u1));
  double t = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(t), r * std::sin(t)};
}

// Amplitudes drawn as independent complex Gaussians, then normalized: Haar
// measure on the unit sphere. Exactly one normal pair per amplitude.
inline StateVector haar_random_state(int n_sites, const SeededSource& src) {
  auto eng = make_engine(src);
  Vector a(Eigen::Index{1} << n_sites);
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    auto [g1, g2] = next_normal_pair(eng);
    a[k] = cplx(g1, g2);
  }
  return normalized(std::move(a));
}

// P(eps1/D < p0 < eps2/D) under a Gaussian model of the ground-state
// overlap, evaluated as
//   2 * int_{sqrt(eps1)}^{sqrt(eps2)} c * exp(-z^2/2) dz
// for the two prefactor conventions in circulation: `standard` uses the
// standard-normal density c = 1/sqrt(2pi); `nonstandard` uses c = 1/(2pi),
// under which the full half-line carries mass 1/sqrt(2pi) instead of 1. For
// Haar states the true distribution of D*p0 is Beta(1, D-1) — approximately
// Exp(1) — so both are approximations; empirical fractions are reported
// alongside rather than gated against either.
struct WindowProbability {
  double nonstandard = 0.0;
  double standard = 0.0;
};

inline WindowProbability window_probability(double eps1, double eps2) {
  if (eps1 < 0.0 || eps1 > eps2)
    throw std::invalid_argument("window_probability: need 0 <= eps1 <= eps2");
  double lo = std::erf(std::sqrt(eps1 / 2.0));
  double hi = std::erf(std::sqrt(eps2 / 2.0));
  WindowProbability w;
  w.standard = hi - lo;
  w.nonstandard = (hi - lo) / std::sqrt(2.0 * std::numbers::pi);
  return w;
}

struct WindowStat {
  double eps1 = 0.0, eps2 = 0.0;   // window is (eps1/D, eps2/D) in p0
  double empirical_frac = 0.0;
  double analytic_nonstandard = 0.0;
  double analytic_standard = 0.0;
};

struct OverlapStats {
  Eigen::Index dim = 0;
  int n_samples = 0;
  double mean_p0 = 0.0;
  double stderr_p0 = 0.0;
  double min_p0 = 0.0;
  double max_p0 = 0.0;
  std::vector<WindowStat> windows;
};

inline const std::vector<std::pair<double, double>>& default_window_probes() {
  static const std::vector<std::pair<double, double>> probes = {
      {0.01, 0.1}, {0.1, 1.0}, {1.0, 4.0}};
  return probes;
}

// Samples p0 = ||P_ground psi||^2 over Haar states. Sample i is drawn from
// stream src.stream + i, so aggregation is order-independent and the work can
// be partitioned across streams.
inline OverlapStats overlap_statistics(
    const Spectrum& spec, int n_samples, const SeededSource& src,
    const std::vector<std::pair<double, double>>& probes = default_window_probes()) {
  if (n_samples < 2) throw std::invalid_argument("overlap_statistics: need at least 2 samples");
  const int n_sites = sites_for_dim(spec.dim());
  EnergyProjector p0 = ground_projector(spec);

  OverlapStats st;
  st.dim = spec.dim();
  st.n_samples = n_samples;
  st.min_p0 = 1.0;
  st.max_p0 = 0.0;
  std::vector<std::size_t> counts(probes.size(), 0);
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    StateVector psi = haar_random_state(n_sites, {src.seed, src.stream + std::uint64_t(i)});
    double p = p0.weight(psi);
    sum += p;
    sumsq += p * p;
    st.min_p0 = std::min(st.min_p0, p);
    st.max_p0 = std::max(st.max_p0, p);
    for (std::size_t w = 0; w < probes.size(); ++w)
      if (p > probes[w].first / double(st.dim) && p < probes[w].second / double(st.dim))
        ++counts[w];
  }
  st.mean_p0 = sum / n_samples;
  double var = (sumsq - sum * sum / n_samples) / (n_samples - 1);
  st.stderr_p0 = std::sqrt(std::max(var, 0.0) / n_samples);
  for (std::size_t w = 0; w < probes.size(); ++w) {
    WindowStat ws;
    ws.eps1 = probes[w].first;
    ws.eps2 = probes[w].second;
    ws.empirical_frac = double(counts[w]) / n_samples;
    auto an = window_probability(ws.eps1, ws.eps2);
    ws.analytic_nonstandard = an.nonstandard;
    ws.analytic_standard = an.standard;
    st.windows.push_back(ws);
  }
  return st;
}

}  // namespace qllg
