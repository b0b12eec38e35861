#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <utility>

#include "wiretap/errors.hpp"

namespace wiretap {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Numerical tolerances used throughout the library. Rates are in nats.
namespace tol {
inline constexpr double pd = 1e-10;           // strict PD, relative to lambda_max
inline constexpr double sym = 1e-8;           // symmetry validation, relative
inline constexpr double psd_order = 1e-9;     // Loewner comparisons, relative
inline constexpr double membership = 1e-6;    // region membership, nats
inline constexpr double tie = 1e-9;           // min{.,.} tie detection, nats
inline constexpr double rank = 1e-8;          // null-space detection, relative
inline constexpr double case_detect = 1e-7;   // KKT case detection, nats
inline constexpr double enh = 1e-8;           // enhancement residuals
inline constexpr double ext = 1e-9;           // extremal inequality, nats
inline constexpr double rewrite = 1e-9;       // objective rewrite check, nats
inline constexpr double aug = 1e-6;           // square augmentation, nats
inline constexpr double gap = 1e-9;           // equivocation gap nonnegativity
inline constexpr double num = 1e-9;           // generic nonnegativity slack
inline constexpr double oracle = 1e-4;        // solver vs grid oracle, nats
}  // namespace tol

namespace defaults {
inline constexpr double big_noise = 1e8;
inline constexpr double alpha = 1e-4;
inline constexpr double alpha_grid[4] = {1e-1, 1e-2, 1e-3, 1e-4};
}  // namespace defaults

inline Matrix symmetrize(const Matrix& a) {
  return 0.5 * (a + a.transpose());
}

inline double max_abs(const Matrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

inline bool is_symmetric(const Matrix& a, double rel_tol = tol::sym) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(1.0, max_abs(a));
  return max_abs(a - a.transpose()) <= rel_tol * scale;
}

/// Eigendecomposition of the symmetrized input.
inline Eigen::SelfAdjointEigenSolver<Matrix> eigen_sym(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(a));
  if (es.info() != Eigen::Success) throw SingularMatrix("eigendecomposition failed");
  return es;
}

inline double min_eigenvalue(const Matrix& a) {
  return eigen_sym(a).eigenvalues().minCoeff();
}

inline double max_eigenvalue(const Matrix& a) {
  return eigen_sym(a).eigenvalues().maxCoeff();
}

inline bool is_psd(const Matrix& a, double rel_tol = tol::psd_order) {
  if (!is_symmetric(a)) return false;
  const auto es = eigen_sym(a);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().cwiseAbs().maxCoeff();
  return lo >= -rel_tol * std::max(1.0, hi);
}

/// Strict positive definiteness: min eigenvalue > pd_tol relative to the
/// largest one.
inline bool is_strictly_pd(const Matrix& a, double rel_tol = tol::pd) {
  if (!is_symmetric(a)) return false;
  const auto es = eigen_sym(a);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  return lo > rel_tol * std::max(hi, 0.0) && lo > 0.0;
}

/// Loewner order A <= B, i.e. B - A is PSD within a relative tolerance.
/// The tolerance is scaled by the operand magnitudes so that cancellation in
/// B - A does not produce spurious failures.
inline bool loewner_leq(const Matrix& a, const Matrix& b,
                        double rel_tol = tol::psd_order) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionMismatch("loewner_leq: operand shapes differ");
  const double scale = std::max({1.0, max_abs(a), max_abs(b)});
  return min_eigenvalue(symmetrize(b - a)) >= -rel_tol * scale;
}

/// How far B - A is from being PSD: max(0, -lambda_min(B - A)).
inline double loewner_violation(const Matrix& a, const Matrix& b) {
  return std::max(0.0, -min_eigenvalue(symmetrize(b - a)));
}

/// log|A| for symmetric positive definite A. Cholesky first, eigenvalue
/// fallback for inputs near the PD boundary.
inline double logdet_pd(const Matrix& a) {
  Eigen::LLT<Matrix> llt(symmetrize(a));
  if (llt.info() == Eigen::Success) {
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  }
  const auto es = eigen_sym(a);
  const Vector& ev = es.eigenvalues();
  const double hi = ev.cwiseAbs().maxCoeff();
  double out = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] <= tol::pd * std::max(1.0, hi))
      throw NotPositiveSemidefinite("logdet_pd: matrix is not positive definite");
    out += std::log(ev[i]);
  }
  return out;
}

/// Inverse of a symmetric matrix via eigendecomposition.
inline Matrix inverse_sym(const Matrix& a) {
  const auto es = eigen_sym(a);
  const Vector& ev = es.eigenvalues();
  const double hi = ev.cwiseAbs().maxCoeff();
  if (ev.cwiseAbs().minCoeff() <= 1e-14 * std::max(1.0, hi))
    throw SingularMatrix("inverse_sym: matrix is numerically singular");
  return es.eigenvectors() * ev.cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

/// Symmetric square root with negative eigenvalues clamped to zero.
inline Matrix sqrt_psd(const Matrix& a) {
  const auto es = eigen_sym(a);
  Vector ev = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

/// Eigenvalue clipping to [lo, hi].
inline Matrix clip_eigenvalues(const Matrix& a, double lo, double hi) {
  const auto es = eigen_sym(a);
  Vector ev = es.eigenvalues().cwiseMax(lo).cwiseMin(hi);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

/// Symmetric positive semidefinite matrix with validated eigenstructure.
/// Stores the symmetrized input; construction rejects asymmetric or
/// indefinite data.
class PsdMatrix {
 public:
  PsdMatrix() = default;

  explicit PsdMatrix(Matrix m) {
    if (m.rows() != m.cols())
      throw DimensionMismatch("PsdMatrix: input is not square");
    const double scale = std::max(1.0, max_abs(m));
    if (max_abs(m - m.transpose()) > tol::sym * scale)
      throw NotSymmetric("PsdMatrix: input is not symmetric");
    mat_ = symmetrize(std::move(m));
    const auto es = eigen_sym(mat_);
    min_eig_ = es.eigenvalues().minCoeff();
    max_eig_ = es.eigenvalues().maxCoeff();
    if (min_eig_ < -tol::pd * std::max(1.0, std::abs(max_eig_)))
      throw NotPositiveSemidefinite("PsdMatrix: negative eigenvalue " +
                                    std::to_string(min_eig_));
  }

  static PsdMatrix zero(Eigen::Index n) { return PsdMatrix(Matrix::Zero(n, n)); }
  static PsdMatrix identity(Eigen::Index n) {
    return PsdMatrix(Matrix::Identity(n, n));
  }

  const Matrix& mat() const { return mat_; }
  Eigen::Index dim() const { return mat_.rows(); }
  double min_eig() const { return min_eig_; }
  double max_eig() const { return max_eig_; }

  bool strictly_pd(double rel_tol = tol::pd) const {
    return min_eig_ > rel_tol * std::max(max_eig_, 0.0) && min_eig_ > 0.0;
  }

 private:
  Matrix mat_;
  double min_eig_ = 0.0;
  double max_eig_ = 0.0;
};

/// Thin factorization S = F F^T restricted to the range space of S.
/// F is n x r with F^T F diagonal, so the pseudo-inverse is cheap. Used to
/// parameterize the matrix interval {0 <= K <= S} as K = F Q F^T with
/// 0 <= Q <= I, which stays well-posed for singular S.
struct IntervalFrame {
  Matrix f;       // n x r, S = f f^T
  Matrix f_pinv;  // r x n, f_pinv * f = I_r
  Eigen::Index rank = 0;

  Matrix to_ambient(const Matrix& q) const { return f * q * f.transpose(); }
  Matrix to_frame(const Matrix& k) const {
    return symmetrize(f_pinv * k * f_pinv.transpose());
  }
};

inline IntervalFrame interval_frame(const PsdMatrix& s,
                                    double rank_tol = tol::rank) {
  const auto es = eigen_sym(s.mat());
  const Vector& ev = es.eigenvalues();
  const double cut = rank_tol * std::max(ev.maxCoeff(), 0.0);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev[i] > cut) ++r;
  IntervalFrame frame;
  frame.rank = r;
  frame.f.resize(s.dim(), r);
  frame.f_pinv.resize(r, s.dim());
  Eigen::Index j = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] <= cut) continue;
    const double root = std::sqrt(ev[i]);
    frame.f.col(j) = es.eigenvectors().col(i) * root;
    frame.f_pinv.row(j) = es.eigenvectors().col(i).transpose() / root;
    ++j;
  }
  return frame;
}

/// (1/2) log |h q h^T + sigma| - (1/2) log |sigma|: the Gaussian information
/// functional underlying every rate expression in the library.
inline double gauss_info(const Matrix& h, const Matrix& q, const Matrix& sigma) {
  return 0.5 * (logdet_pd(h * q * h.transpose() + sigma) - logdet_pd(sigma));
}

/// Aligned form, h = I.
inline double gauss_info(const Matrix& q, const Matrix& sigma) {
  return 0.5 * (logdet_pd(q + sigma) - logdet_pd(sigma));
}

/// Gradient of gauss_info with respect to q: (1/2) h^T (h q h^T + sigma)^-1 h.
inline Matrix gauss_info_grad(const Matrix& h, const Matrix& q,
                              const Matrix& sigma) {
  return 0.5 * h.transpose() * inverse_sym(h * q * h.transpose() + sigma) * h;
}

inline Matrix gauss_info_grad(const Matrix& q, const Matrix& sigma) {
  return 0.5 * inverse_sym(q + sigma);
}

/// Orthonormal basis of the eigenspace with eigenvalues <= rank_tol * scale.
/// `scale` defaults to the matrix's own largest eigenvalue.
inline Matrix null_space_sym(const Matrix& a, double rank_tol = tol::rank,
                             double scale = -1.0) {
  const auto es = eigen_sym(a);
  const Vector& ev = es.eigenvalues();
  if (scale < 0.0) scale = std::max(ev.cwiseAbs().maxCoeff(), 0.0);
  const double cut = rank_tol * scale;
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (std::abs(ev[i]) <= cut) ++r;
  Matrix basis(a.rows(), r);
  Eigen::Index j = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (std::abs(ev[i]) <= cut) basis.col(j++) = es.eigenvectors().col(i);
  return basis;
}

}  // namespace wiretap
