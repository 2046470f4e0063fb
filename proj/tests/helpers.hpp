#pragma once

// Shared test utilities. dense_oracle() rebuilds operators from their term
// lists with explicit 2x2 Kronecker products — a deliberately independent
// code path from the bit-manipulation apply().

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "qllg/hamiltonian.hpp"
#include "qllg/state.hpp"

namespace test {

inline Eigen::Matrix2cd pauli_matrix(qllg::Axis ax) {
  using qllg::cplx;
  Eigen::Matrix2cd m;
  switch (ax) {
    case qllg::Axis::X: m << 0, 1, 1, 0; break;
    case qllg::Axis::Y: m << cplx(0, 0), cplx(0, -1), cplx(0, 1), cplx(0, 0); break;
    case qllg::Axis::Z: m << 1, 0, 0, -1; break;
  }
  return m;
}

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Site 0 is the least-significant bit, so the site-s factor sits innermost:
// full = I_{2^(N-1-s)} (x) P (x) I_{2^s}.
inline Eigen::MatrixXcd site_operator(qllg::Axis ax, int site, int n_sites) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(Eigen::Index{1} << site, Eigen::Index{1} << site);
  m = kron(pauli_matrix(ax), m);
  Eigen::Index hi = Eigen::Index{1} << (n_sites - 1 - site);
  return kron(Eigen::MatrixXcd::Identity(hi, hi), m);
}

inline Eigen::MatrixXcd dense_oracle(const qllg::HamiltonianOp& h) {
  const Eigen::Index d = h.dim();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d, d);
  for (const auto& t : h.terms()) {
    Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(d, d);
    for (auto [site, ax] : t.sites) term = term * site_operator(ax, site, h.n_sites());
    out += t.coeff * term;
  }
  return out;
}

// Random chain parameters away from zero couplings.
inline qllg::SpinChainParams random_chain(std::mt19937_64& rng, int n_sites) {
  std::uniform_real_distribution<double> uj(0.5, 3.0), uh(0.0, 4.0);
  return {n_sites, uj(rng), uh(rng)};
}

// A random Hermitian Pauli-sum on n sites (not necessarily a chain), with
// strings of weight 1..3 and coefficients in [-2, 2].
inline qllg::HamiltonianOp random_pauli_sum(std::mt19937_64& rng, int n_sites, int n_terms) {
  std::uniform_int_distribution<int> nsites_d(1, std::min(3, n_sites));
  std::uniform_int_distribution<int> site_d(0, n_sites - 1);
  std::uniform_int_distribution<int> axis_d(0, 2);
  std::uniform_real_distribution<double> coeff_d(-2.0, 2.0);
  std::vector<qllg::PauliString> terms;
  for (int t = 0; t < n_terms; ++t) {
    int w = nsites_d(rng);
    std::vector<int> sites;
    while (int(sites.size()) < w) {
      int s = site_d(rng);
      bool dup = false;
      for (int x : sites) dup |= (x == s);
      if (!dup) sites.push_back(s);
    }
    std::sort(sites.begin(), sites.end());
    qllg::PauliString ps;
    for (int s : sites)
      ps.sites.emplace_back(s, std::array<qllg::Axis, 3>{qllg::Axis::X, qllg::Axis::Y,
                                                         qllg::Axis::Z}[axis_d(rng)]);
    ps.coeff = coeff_d(rng);
    terms.push_back(std::move(ps));
  }
  return qllg::HamiltonianOp(n_sites, std::move(terms));
}

inline qllg::StateVector random_state(std::mt19937_64& rng, int n_sites) {
  std::normal_distribution<double> g;
  qllg::Vector a(Eigen::Index{1} << n_sites);
  for (Eigen::Index k = 0; k < a.size(); ++k) a[k] = qllg::cplx(g(rng), g(rng));
  return qllg::normalized(std::move(a));
}

// Two-sample Kolmogorov-Smirnov p-value (asymptotic).
inline double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) ++i;
    else ++j;
    double f1 = double(i) / a.size(), f2 = double(j) / b.size();
    d = std::max(d, std::abs(f1 - f2));
  }
  double ne = double(a.size()) * b.size() / (a.size() + b.size());
  double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k)
    p += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace test
