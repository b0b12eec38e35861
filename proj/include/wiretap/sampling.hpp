#pragma once

#include <cstdint>
#include <random>

#include "wiretap/linalg.hpp"

namespace wiretap {

/// Seeded generator for reproducible sampling. Every stochastic code path in
/// the library draws through one of these; the seed travels in configs and
/// run manifests.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }

  double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen_); }

  std::uint64_t next_seed() { return gen_(); }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

inline Matrix random_gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

/// Haar-ish random orthogonal matrix via QR of a Gaussian sample.
inline Matrix random_orthogonal(Rng& rng, Eigen::Index n) {
  const Matrix g = random_gaussian(rng, n, n);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  // Fix signs so the distribution does not depend on the QR convention.
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < n; ++i)
    if (r(i, i) < 0) q.col(i) = -q.col(i);
  return q;
}

/// Random PSD matrix with eigenvalues uniform in [eig_lo, eig_hi].
inline PsdMatrix random_psd(Rng& rng, Eigen::Index n, double eig_lo,
                            double eig_hi) {
  const Matrix q = random_orthogonal(rng, n);
  Vector ev(n);
  for (Eigen::Index i = 0; i < n; ++i) ev[i] = rng.uniform(eig_lo, eig_hi);
  return PsdMatrix(symmetrize(q * ev.asDiagonal() * q.transpose()));
}

/// Random point of the matrix interval {0 <= K <= S}: K = B R diag(t) R^T B^T
/// with B = S^{1/2}, R orthogonal, t uniform in [0, 1]^n.
inline PsdMatrix random_interval_point(Rng& rng, const PsdMatrix& s) {
  const Eigen::Index n = s.dim();
  const Matrix b = sqrt_psd(s.mat());
  const Matrix r = random_orthogonal(rng, n);
  Vector t(n);
  for (Eigen::Index i = 0; i < n; ++i) t[i] = rng.uniform(0.0, 1.0);
  const Matrix q = r * t.asDiagonal() * r.transpose();
  return PsdMatrix(symmetrize(b * q * b.transpose()));
}

}  // namespace wiretap
