#pragma once

// Many-body spin Hamiltonians as weighted Pauli strings, applied matrix-free
// by bit manipulation. The dense realization exists only as a small-system
// oracle; all dynamics run through apply().

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "qllg/state.hpp"

namespace qllg {

enum class Axis : char { X = 'X', Y = 'Y', Z = 'Z' };

inline Axis axis_from_char(char c) {
  switch (c) {
    case 'X': case 'x': return Axis::X;
    case 'Y': case 'y': return Axis::Y;
    case 'Z': case 'z': return Axis::Z;
  }
  throw std::invalid_argument(std::string("unknown Pauli axis '") + c + "'");
}

// One product of single-site Pauli operators with a real coefficient.
// Real coefficients force Hermiticity term by term.
struct PauliString {
  std::vector<std::pair<int, Axis>> sites;  // site indices strictly increasing
  double coeff = 0.0;

  void validate(int n_sites) const {
    int prev = -1;
    for (auto [s, ax] : sites) {
      (void)ax;
      if (s <= prev) throw std::invalid_argument("PauliString: site indices must be strictly increasing");
      if (s < 0 || s >= n_sites) throw std::invalid_argument("PauliString: site index out of range");
      prev = s;
    }
    if (!std::isfinite(coeff)) throw std::invalid_argument("PauliString: non-finite coefficient");
  }
};

struct SpinChainParams {
  int n_sites = 2;
  double J = 1.0;  // uniform nearest-neighbour exchange
  double h = 0.0;  // uniform z field

  void validate() const {
    if (n_sites < 2) throw std::invalid_argument("SpinChainParams: need at least 2 sites");
    if (!std::isfinite(J) || !std::isfinite(h))
      throw std::invalid_argument("SpinChainParams: non-finite coupling");
  }
};

class HamiltonianOp {
 public:
  HamiltonianOp(int n_sites, std::vector<PauliString> terms)
      : n_sites_(n_sites), terms_(std::move(terms)) {
    if (n_sites_ < 1 || n_sites_ > 62) throw std::invalid_argument("HamiltonianOp: bad site count");
    norm_bound_ = 0.0;
    for (const auto& t : terms_) {
      t.validate(n_sites_);
      norm_bound_ += std::abs(t.coeff);
    }
    compile();
  }

  int n_sites() const { return n_sites_; }
  Eigen::Index dim() const { return Eigen::Index{1} << n_sites_; }
  const std::vector<PauliString>& terms() const { return terms_; }

  // Sum of |coefficient|: upper bound on the spectral radius since each
  // Pauli string has unit operator norm.
  double norm_bound() const { return norm_bound_; }

  // out = H * in, without materializing the matrix. O(2^N) per term group.
  void apply_into(const Vector& in, Vector& out) const {
    if (in.size() != dim()) throw std::invalid_argument("apply: dimension mismatch");
    const Eigen::Index d = dim();
    out.resize(d);
    if (diag_.size() > 0)
      out.array() = diag_.array() * in.array();
    else
      out.setZero();
    for (const auto& g : groups_) {
      const std::uint64_t flip = g.flip;
      for (std::uint64_t k = 0; k < std::uint64_t(d); ++k) {
        cplx acc = 0.0;
        for (const auto& [sgn, w] : g.parts)
          acc += (std::popcount(k & sgn) & 1) ? -w : w;
        out[Eigen::Index(k ^ flip)] += acc * in[Eigen::Index(k)];
      }
    }
  }

  Vector apply(const StateVector& psi) const {
    Vector out;
    apply_into(psi.amps, out);
    return out;
  }

  // Re<psi|H|psi>. The imaginary part is a Hermiticity health check.
  double expectation(const StateVector& psi) const {
    Vector hp;
    apply_into(psi.amps, hp);
    cplx e = psi.amps.dot(hp);
    if (std::abs(e.imag()) >= 1e-10)
      throw std::logic_error("expectation: non-Hermitian residual " + std::to_string(e.imag()));
    return e.real();
  }

  // Dense oracle; refuses to allocate above the cap.
  Eigen::MatrixXcd to_dense(int cap = 14) const {
    if (n_sites_ > cap)
      throw std::runtime_error("to_dense: " + std::to_string(n_sites_) +
                               " sites exceeds dense cap " + std::to_string(cap));
    const Eigen::Index d = dim();
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
    for (Eigen::Index k = 0; k < d; ++k)
      m.diagonal()[k] += (diag_.size() > 0) ? diag_[k] : 0.0;
    for (const auto& g : groups_)
      for (std::uint64_t k = 0; k < std::uint64_t(d); ++k) {
        cplx acc = 0.0;
        for (const auto& [sgn, w] : g.parts)
          acc += (std::popcount(k & sgn) & 1) ? -w : w;
        m(Eigen::Index(k ^ g.flip), Eigen::Index(k)) += acc;
      }
    return m;
  }

 private:
  // A Pauli string acts on basis states as |k> -> phi(k) |k ^ flip> with
  // flip = x|y bits and phi(k) = i^{n_y} (-1)^{popcount(k & (y|z))}.
  // Strings sharing a flip mask are grouped; purely diagonal strings are
  // fused into one precomputed real diagonal.
  struct FlipGroup {
    std::uint64_t flip = 0;
    std::vector<std::pair<std::uint64_t, cplx>> parts;  // (sign mask, weight)
  };

  void compile() {
    std::map<std::uint64_t, FlipGroup> by_flip;
    std::vector<std::pair<std::uint64_t, double>> diag_parts;
    for (const auto& t : terms_) {
      if (t.coeff == 0.0) continue;
      std::uint64_t mx = 0, my = 0, mz = 0;
      for (auto [s, ax] : t.sites) {
        std::uint64_t bit = std::uint64_t{1} << s;
        if (ax == Axis::X) mx |= bit;
        else if (ax == Axis::Y) my |= bit;
        else mz |= bit;
      }
      const std::uint64_t flip = mx | my;
      const std::uint64_t sgn = my | mz;
      static constexpr cplx i_pow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
      const cplx w = t.coeff * i_pow[std::popcount(my) & 3];
      if (flip == 0) {
        diag_parts.emplace_back(sgn, w.real());  // n_y = 0 here, so w is real
      } else {
        auto& g = by_flip[flip];
        g.flip = flip;
        g.parts.emplace_back(sgn, w);
      }
    }
    if (!diag_parts.empty()) {
      diag_ = Eigen::VectorXd::Zero(dim());
      for (std::uint64_t k = 0; k < std::uint64_t(dim()); ++k) {
        double v = 0.0;
        for (auto [sgn, w] : diag_parts) v += (std::popcount(k & sgn) & 1) ? -w : w;
        diag_[Eigen::Index(k)] = v;
      }
    }
    groups_.reserve(by_flip.size());
    for (auto& [flip, g] : by_flip) groups_.push_back(std::move(g));
  }

  int n_sites_;
  std::vector<PauliString> terms_;
  double norm_bound_ = 0.0;
  Eigen::VectorXd diag_;  // empty when there are no diagonal strings
  std::vector<FlipGroup> groups_;
};

// Open-boundary Heisenberg chain with a uniform z field:
//   H = sum_{i<N-1} J (X_i X_{i+1} + Y_i Y_{i+1} + Z_i Z_{i+1}) - h sum_i Z_i.
// Couplings are between literal Pauli matrices, not spin-1/2 operators.
inline HamiltonianOp build_spin_chain(const SpinChainParams& p) {
  p.validate();
  std::vector<PauliString> terms;
  for (int i = 0; i + 1 < p.n_sites; ++i)
    for (Axis ax : {Axis::X, Axis::Y, Axis::Z}) {
      if (p.J == 0.0) continue;
      PauliString t;
      t.sites = {{i, ax}, {i + 1, ax}};
      t.coeff = p.J;
      terms.push_back(std::move(t));
    }
  for (int i = 0; i < p.n_sites; ++i) {
    if (p.h == 0.0) continue;
    PauliString t;
    t.sites = {{i, Axis::Z}};
    t.coeff = -p.h;
    terms.push_back(std::move(t));
  }
  return HamiltonianOp(p.n_sites, std::move(terms));
}

}  // namespace qllg
