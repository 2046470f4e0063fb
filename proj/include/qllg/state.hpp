#pragma once

// State vectors over an N-qubit register and the few primitives everything
// else builds on. Convention used throughout: site 0 is the least-significant
// bit of the basis index, and sigma^z|0> = +|0>, so basis index 0 is the
// all-up product state.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>

namespace qllg {

using cplx = std::complex<double>;
using Vector = Eigen::VectorXcd;

inline int sites_for_dim(Eigen::Index dim) {
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if ((Eigen::Index{1} << n) != dim)
    throw std::invalid_argument("state dimension is not a power of two");
  return n;
}

struct StateVector {
  Vector amps;
  int n_sites = 0;

  StateVector() = default;
  StateVector(Vector a, int n) : amps(std::move(a)), n_sites(n) {
    if (n < 0 || amps.size() != (Eigen::Index{1} << n))
      throw std::invalid_argument("StateVector: amplitude count != 2^n_sites");
  }
  explicit StateVector(Vector a) : amps(std::move(a)) { n_sites = sites_for_dim(amps.size()); }

  Eigen::Index dim() const { return amps.size(); }
};

inline void normalize(StateVector& s) {
  double n = s.amps.norm();
  if (!std::isfinite(n) || n <= 0.0)
    throw std::runtime_error("cannot normalize zero or non-finite state");
  s.amps /= n;
}

inline StateVector normalized(Vector a) {
  StateVector s{std::move(a)};
  normalize(s);
  return s;
}

inline StateVector basis_state(int n_sites, Eigen::Index k) {
  Vector a = Vector::Zero(Eigen::Index{1} << n_sites);
  a[k] = 1.0;
  return {std::move(a), n_sites};
}

// <a|b>; Eigen's dot conjugates the left factor.
inline cplx overlap(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("overlap: dimension mismatch");
  return a.amps.dot(b.amps);
}

// Total-z magnetization of basis state k: (# up) - (# down). Bit value 0 is up.
inline int magnetization(std::uint64_t k, int n_sites) {
  int down = 0;
  for (int b = 0; b < n_sites; ++b) down += int((k >> b) & 1u);
  return n_sites - 2 * down;
}

}  // namespace qllg
