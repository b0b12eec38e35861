#pragma once

#include <optional>
#include <string>
#include <utility>

#include "wiretap/linalg.hpp"

namespace wiretap {

/// Gaussian MIMO wiretap channel
///   Y = H_Y X + N_Y,   Z = H_Z X + N_Z
/// with N_Y ~ N(0, sigma_y), N_Z ~ N(0, sigma_z), both strictly positive
/// definite. X is t-dimensional; Y and Z have r_y and r_z components.
struct WiretapChannel {
  Matrix h_y;         // r_y x t
  Matrix h_z;         // r_z x t
  PsdMatrix sigma_y;  // r_y x r_y
  PsdMatrix sigma_z;  // r_z x r_z

  Eigen::Index t() const { return h_y.cols(); }
  Eigen::Index r_y() const { return h_y.rows(); }
  Eigen::Index r_z() const { return h_z.rows(); }
  bool square() const { return r_y() == t() && r_z() == t(); }

  bool identity_gains(double tol_abs = 1e-14) const {
    return square() &&
           max_abs(h_y - Matrix::Identity(t(), t())) <= tol_abs &&
           max_abs(h_z - Matrix::Identity(t(), t())) <= tol_abs;
  }
};

/// Input constraint: either E[X X^T] <= S (Loewner) or tr(E[X X^T]) <= P.
class InputConstraint {
 public:
  enum class Kind { Covariance, Power };

  static InputConstraint covariance(PsdMatrix s) {
    InputConstraint c;
    c.kind_ = Kind::Covariance;
    c.s_ = std::move(s);
    return c;
  }

  static InputConstraint power(double p) {
    if (p < 0.0) throw PowerExceeded("power constraint must be nonnegative");
    InputConstraint c;
    c.kind_ = Kind::Power;
    c.p_ = p;
    return c;
  }

  Kind kind() const { return kind_; }
  const PsdMatrix& s() const { return s_; }
  double p() const { return p_; }

 private:
  Kind kind_ = Kind::Power;
  PsdMatrix s_;
  double p_ = 0.0;
};

/// Channel reduced to the aligned form Y = X + N_Y, Z = X + N_Z with
/// effective noise covariances. `alpha` records the gain perturbation used
/// by the reduction; channels that were aligned to begin with carry alpha 0.
struct AlignedChannel {
  PsdMatrix sigma_y_eff;
  PsdMatrix sigma_z_eff;
  double alpha = 0.0;
  std::string provenance;

  Eigen::Index dim() const { return sigma_y_eff.dim(); }
};

/// Channel whose invariants have been checked, with cached noise
/// eigendecompositions for downstream code.
class ValidatedChannel {
 public:
  ValidatedChannel(WiretapChannel ch,
                   Eigen::SelfAdjointEigenSolver<Matrix> eig_y,
                   Eigen::SelfAdjointEigenSolver<Matrix> eig_z)
      : ch_(std::move(ch)), eig_y_(std::move(eig_y)), eig_z_(std::move(eig_z)) {}

  const WiretapChannel& channel() const { return ch_; }
  const Eigen::SelfAdjointEigenSolver<Matrix>& sigma_y_eig() const {
    return eig_y_;
  }
  const Eigen::SelfAdjointEigenSolver<Matrix>& sigma_z_eig() const {
    return eig_z_;
  }

 private:
  WiretapChannel ch_;
  Eigen::SelfAdjointEigenSolver<Matrix> eig_y_;
  Eigen::SelfAdjointEigenSolver<Matrix> eig_z_;
};

/// Checks dimension consistency and strict positive definiteness of both
/// noise covariances.
inline ValidatedChannel validate_channel(const WiretapChannel& ch) {
  if (ch.h_y.cols() != ch.h_z.cols())
    throw DimensionMismatch("gain matrices disagree on the input dimension");
  if (ch.sigma_y.dim() != ch.r_y())
    throw DimensionMismatch("sigma_y does not match the rows of h_y");
  if (ch.sigma_z.dim() != ch.r_z())
    throw DimensionMismatch("sigma_z does not match the rows of h_z");
  if (ch.t() == 0 || ch.r_y() == 0 || ch.r_z() == 0)
    throw DimensionMismatch("channel has an empty dimension");

  auto eig_y = eigen_sym(ch.sigma_y.mat());
  auto eig_z = eigen_sym(ch.sigma_z.mat());
  const auto check_pd = [](const Eigen::SelfAdjointEigenSolver<Matrix>& es,
                           const char* name) {
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > tol::pd * std::max(hi, 0.0)) || !(lo > 0.0))
      throw NonPositiveDefiniteNoise(std::string(name) +
                                     " is not strictly positive definite");
  };
  check_pd(eig_y, "sigma_y");
  check_pd(eig_z, "sigma_z");
  return ValidatedChannel(ch, std::move(eig_y), std::move(eig_z));
}

namespace detail {

// Whitened row compression for a receiver with more antennas than the
// transmitter: premultiplying by the top left singular vectors of
// sigma^{-1/2} H keeps every log-det functional of the branch intact and
// leaves t observations with unit noise.
inline void compress_branch(Matrix& h, PsdMatrix& sigma) {
  const Eigen::Index t = h.cols();
  if (h.rows() <= t) return;
  const auto es = eigen_sym(sigma.mat());
  const Matrix white =
      es.eigenvectors() *
      es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
      es.eigenvectors().transpose();
  Eigen::JacobiSVD<Matrix> svd(white * h,
                               Eigen::ComputeThinU | Eigen::ComputeThinV);
  // Thin U is r x t; U^T (white * h) = diag(singular values) V^T.
  h = svd.singularValues().asDiagonal() * svd.matrixV().transpose();
  sigma = PsdMatrix::identity(t);
}

inline void pad_branch(Matrix& h, PsdMatrix& sigma, double big_noise) {
  const Eigen::Index t = h.cols();
  const Eigen::Index r = h.rows();
  if (r >= t) return;
  Matrix h_out = Matrix::Zero(t, t);
  h_out.topRows(r) = h;
  Matrix s_out = Matrix::Zero(t, t);
  s_out.topLeftCorner(r, r) = sigma.mat();
  s_out.bottomRightCorner(t - r, t - r) =
      big_noise * Matrix::Identity(t - r, t - r);
  h = std::move(h_out);
  sigma = PsdMatrix(std::move(s_out));
}

}  // namespace detail

/// Rewrites the channel so both receivers have exactly t antennas. Receivers
/// with more antennas are reduced losslessly by whitened thin-SVD row
/// compression; receivers with fewer get zero gain rows whose observations
/// carry big_noise variance and hence asymptotically no information. A branch
/// that is already square is left untouched.
inline WiretapChannel square_augment(const WiretapChannel& ch,
                                     double big_noise = defaults::big_noise) {
  WiretapChannel out = ch;
  detail::compress_branch(out.h_y, out.sigma_y);
  detail::compress_branch(out.h_z, out.sigma_z);
  detail::pad_branch(out.h_y, out.sigma_y, big_noise);
  detail::pad_branch(out.h_z, out.sigma_z, big_noise);
  return out;
}

/// Perturbed gains H_bar = U (Lambda + alpha I) V^T from the SVD of each gain
/// matrix. Every singular value is pushed away from zero so H_bar is
/// invertible.
inline std::pair<Matrix, Matrix> perturbed_gains(const WiretapChannel& ch,
                                                 double alpha) {
  if (!ch.square())
    throw DimensionMismatch("perturbed gains require a square channel");
  if (!(alpha > 0.0)) throw Error("alpha must be positive");
  const auto bump = [alpha](const Matrix& h) {
    Eigen::JacobiSVD<Matrix> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector sv = svd.singularValues().array() + alpha;
    return Matrix(svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose());
  };
  return {bump(ch.h_y), bump(ch.h_z)};
}

/// Reduces a square channel to aligned form: with H_bar = U (Lambda+alpha I)
/// V^T the channel H_bar X + N is equivalent to X + H_bar^{-1} N, whose noise
/// covariance is H_bar^{-1} sigma H_bar^{-T}.
inline AlignedChannel align(const WiretapChannel& ch, double alpha) {
  if (!ch.square())
    throw DimensionMismatch("align requires a square channel");
  if (!(alpha > 0.0)) throw Error("alpha must be positive");

  const auto effective = [alpha](const Matrix& h, const PsdMatrix& sigma) {
    Eigen::JacobiSVD<Matrix> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector sv = svd.singularValues().array() + alpha;
    if (sv.maxCoeff() / alpha > 1e14)
      throw SingularPerturbedGain(
          "alpha too small to invert the perturbed gain reliably");
    const Matrix inv_bar =
        svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
    return PsdMatrix(symmetrize(inv_bar * sigma.mat() * inv_bar.transpose()));
  };

  AlignedChannel out;
  out.sigma_y_eff = effective(ch.h_y, ch.sigma_y);
  out.sigma_z_eff = effective(ch.h_z, ch.sigma_z);
  out.alpha = alpha;
  out.provenance = "svd gain perturbation, alpha=" + std::to_string(alpha);
  return out;
}

/// Views a channel that already has identity gains as aligned, without any
/// perturbation.
inline AlignedChannel as_aligned(const WiretapChannel& ch) {
  if (!ch.identity_gains())
    throw DimensionMismatch("channel does not have identity gains");
  AlignedChannel out;
  out.sigma_y_eff = ch.sigma_y;
  out.sigma_z_eff = ch.sigma_z;
  out.alpha = 0.0;
  out.provenance = "identity gains";
  return out;
}

/// Worst-case equivocation loss of the gain perturbation at level alpha:
///   (1/2) log |H_bar_Z S H_bar_Z^T + sigma_z| / |sigma_z|
/// - (1/2) log |H_Z S H_Z^T + sigma_z| / |sigma_z|.
/// Nonnegative, and vanishes as alpha -> 0.
inline double equivocation_gap(const WiretapChannel& ch, const PsdMatrix& s,
                               double alpha) {
  if (!ch.square())
    throw DimensionMismatch("equivocation_gap requires a square channel");
  const auto [h_bar_y, h_bar_z] = perturbed_gains(ch, alpha);
  (void)h_bar_y;
  return gauss_info(h_bar_z, s.mat(), ch.sigma_z.mat()) -
         gauss_info(ch.h_z, s.mat(), ch.sigma_z.mat());
}

}  // namespace wiretap
