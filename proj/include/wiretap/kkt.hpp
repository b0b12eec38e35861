#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "wiretap/channel.hpp"
#include "wiretap/linalg.hpp"
#include "wiretap/rates.hpp"

namespace wiretap {

/// lambda case table: 0 when R_0Y(K*) > R_0Z(K*), 1 when R_0Y < R_0Z, free
/// in (0, 1) at a tie.
enum class LambdaCase { Zero, One, Tie };

/// (beta_Y, beta_Z) case table keyed by which common-rate constraints are
/// tight at K*.
enum class BetaCase { Inactive, ActiveZ, ActiveY, ActiveBoth };

inline const char* to_string(LambdaCase c) {
  switch (c) {
    case LambdaCase::Zero: return "lambda=0";
    case LambdaCase::One: return "lambda=1";
    default: return "lambda-tie";
  }
}

inline const char* to_string(BetaCase c) {
  switch (c) {
    case BetaCase::Inactive: return "r0-inactive";
    case BetaCase::ActiveZ: return "r0z-active";
    case BetaCase::ActiveY: return "r0y-active";
    default: return "both-active";
  }
}

/// First-order stationarity certificate for a candidate optimizer K* of the
/// weighted boundary problem:
///   (mu_s - mu_p lambda - beta_Y)(K* + Sigma_Y)^{-1} + M
///     = (mu_s - mu_p lambda + beta_Z)(K* + Sigma_Z)^{-1} + M_S
/// with M supported on the null space of K* and M_S on the null space of
/// S - K*. Carries the evaluation context so it can be checked standalone.
struct KktCertificate {
  double lambda = 0.0;
  double beta_y = 0.0;
  double beta_z = 0.0;
  PsdMatrix m;
  PsdMatrix m_s;
  double residual_stationarity = 0.0;
  double residual_compl_m = 0.0;
  double residual_compl_ms = 0.0;
  LambdaCase lambda_case = LambdaCase::Tie;
  BetaCase beta_case = BetaCase::Inactive;

  // context
  double mu_p = 0.0;
  double mu_s = 0.0;
  double r0_star = 0.0;
  double r0y = 0.0;
  double r0z = 0.0;
};

struct KktOptions {
  double case_tol = tol::case_detect;  // rate comparisons, nats
  double rank_tol = tol::rank;         // null-space detection
  int lambda_grid = 101;               // coarse grid in the tie case
};

namespace detail {

// Least-squares fit of the free certificate variables for a fixed lambda.
// The stationarity residual is affine in (beta_Y, beta_Z, N_0, N_S):
//   R = (mu_s - mu_p lambda)(A_Y - A_Z) - beta_Y A_Y - beta_Z A_Z
//       + V_0 N_0 V_0^T - V_S N_S V_S^T
// Negative fitted betas are removed and the system resolved; fitted N blocks
// are clipped to the PSD cone at the end.
struct KktFit {
  double beta_y = 0.0;
  double beta_z = 0.0;
  Matrix m;
  Matrix m_s;
  double residual = 0.0;
};

inline std::vector<Matrix> sym_basis(Eigen::Index n) {
  std::vector<Matrix> basis;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      Matrix e = Matrix::Zero(n, n);
      e(i, j) = 1.0;
      e(j, i) = 1.0;
      basis.push_back(e);
    }
  return basis;
}

inline KktFit fit_kkt(const Matrix& ay, const Matrix& az, double scale_ys,
                      bool free_beta_y, bool free_beta_z, const Matrix& v0,
                      const Matrix& vs) {
  const Eigen::Index n = ay.rows();
  const Matrix c = scale_ys * (ay - az);

  const auto n0_basis = sym_basis(v0.cols());
  const auto ns_basis = sym_basis(vs.cols());

  for (int pass = 0; pass < 3; ++pass) {
    std::vector<Matrix> cols;
    // order: [beta_y] [beta_z] [N_0 blocks] [N_S blocks]
    if (free_beta_y) cols.push_back(-ay);
    if (free_beta_z) cols.push_back(-az);
    for (const auto& e : n0_basis) cols.push_back(v0 * e * v0.transpose());
    for (const auto& e : ns_basis) cols.push_back(-vs * e * vs.transpose());

    KktFit fit;
    Vector x = Vector::Zero(static_cast<Eigen::Index>(cols.size()));
    if (!cols.empty()) {
      Matrix jac(n * n, static_cast<Eigen::Index>(cols.size()));
      for (std::size_t j = 0; j < cols.size(); ++j)
        jac.col(static_cast<Eigen::Index>(j)) =
            Eigen::Map<const Vector>(cols[j].data(), n * n);
      const Vector rhs = -Eigen::Map<const Vector>(c.data(), n * n);
      x = jac.completeOrthogonalDecomposition().solve(rhs);
    }

    Eigen::Index idx = 0;
    double by = 0.0, bz = 0.0;
    if (free_beta_y) by = x[idx++];
    if (free_beta_z) bz = x[idx++];
    if ((free_beta_y && by < 0.0) || (free_beta_z && bz < 0.0)) {
      // Drop the offending multiplier and refit.
      if (free_beta_y && by < 0.0) free_beta_y = false;
      if (free_beta_z && bz < 0.0) free_beta_z = false;
      continue;
    }

    Matrix n0 = Matrix::Zero(v0.cols(), v0.cols());
    for (const auto& e : n0_basis) n0 += x[idx++] * e;
    Matrix ns = Matrix::Zero(vs.cols(), vs.cols());
    for (const auto& e : ns_basis) ns += x[idx++] * e;

    fit.beta_y = by;
    fit.beta_z = bz;
    fit.m = v0.cols() > 0
                ? Matrix(v0 * clip_eigenvalues(n0, 0.0,
                                               std::numeric_limits<double>::max()) *
                         v0.transpose())
                : Matrix(Matrix::Zero(n, n));
    fit.m_s = vs.cols() > 0
                  ? Matrix(vs * clip_eigenvalues(ns, 0.0,
                                                 std::numeric_limits<double>::max()) *
                           vs.transpose())
                  : Matrix(Matrix::Zero(n, n));
    fit.residual = (c - fit.beta_y * ay - fit.beta_z * az + fit.m - fit.m_s)
                       .norm();
    return fit;
  }

  // Unreachable: at most two betas can be dropped, so the loop returns by
  // the third pass.
  KktFit fit;
  fit.m = Matrix::Zero(n, n);
  fit.m_s = Matrix::Zero(n, n);
  fit.residual = c.norm();
  return fit;
}

}  // namespace detail

/// Builds the Lemma-style certificate at K*: detects the multiplier case
/// from the rate relations, then fits the slack matrices (supported on the
/// null spaces of K* and S - K*) and any free scalars by projected least
/// squares. A free lambda is resolved on a coarse grid followed by
/// golden-section refinement. Large residuals are the diagnostic; nothing is
/// thrown for non-stationary points.
inline KktCertificate build_certificate(const PsdMatrix& k_star,
                                        const AlignedChannel& ch,
                                        const PsdMatrix& s, double mu_p,
                                        double mu_s, double r0_star,
                                        const KktOptions& opts = {}) {
  if (!loewner_leq(Matrix::Zero(s.dim(), s.dim()), k_star.mat()) ||
      !loewner_leq(k_star.mat(), s.mat()))
    throw OrderViolation("K* is not inside the interval [0, S]");

  const Matrix ay = inverse_sym(k_star.mat() + ch.sigma_y_eff.mat());
  const Matrix az = inverse_sym(k_star.mat() + ch.sigma_z_eff.mat());

  KktCertificate cert;
  cert.mu_p = mu_p;
  cert.mu_s = mu_s;
  cert.r0_star = r0_star;
  cert.r0y = rate_0y(k_star, s, ch);
  cert.r0z = rate_0z(k_star, s, ch);

  const double ct = opts.case_tol;
  if (cert.r0y > cert.r0z + ct)
    cert.lambda_case = LambdaCase::Zero;
  else if (cert.r0y < cert.r0z - ct)
    cert.lambda_case = LambdaCase::One;
  else
    cert.lambda_case = LambdaCase::Tie;

  const double min_r0 = std::min(cert.r0y, cert.r0z);
  if (r0_star < min_r0 - ct) {
    cert.beta_case = BetaCase::Inactive;
  } else if (std::abs(cert.r0y - cert.r0z) <= ct) {
    cert.beta_case = BetaCase::ActiveBoth;
  } else if (cert.r0z < cert.r0y) {
    cert.beta_case = BetaCase::ActiveZ;
  } else {
    cert.beta_case = BetaCase::ActiveY;
  }

  const bool free_by = cert.beta_case == BetaCase::ActiveY ||
                       cert.beta_case == BetaCase::ActiveBoth;
  const bool free_bz = cert.beta_case == BetaCase::ActiveZ ||
                       cert.beta_case == BetaCase::ActiveBoth;

  // Null-space supports; the interval scale sets the rank cutoff so the zero
  // matrix and S - K* = 0 are handled uniformly.
  const double scale = std::max(s.max_eig(), 1e-300);
  const Matrix v0 = null_space_sym(k_star.mat(), opts.rank_tol, scale);
  const Matrix vs =
      null_space_sym(s.mat() - k_star.mat(), opts.rank_tol, scale);

  // The slack matrices alone are tried first; the betas are freed only when
  // they are needed for stationarity. Multipliers of constraints that merely
  // touch their bound stay at zero this way.
  const auto fit_at = [&](double lambda) {
    const double scale_ys = mu_s - mu_p * lambda;
    auto base = detail::fit_kkt(ay, az, scale_ys, false, false, v0, vs);
    const double exact =
        std::max(1e-12, 1e-12 * std::abs(scale_ys) * (ay - az).norm());
    if (base.residual <= exact || (!free_by && !free_bz)) return base;
    auto full = detail::fit_kkt(ay, az, scale_ys, free_by, free_bz, v0, vs);
    return full.residual < base.residual ? full : base;
  };

  double lambda = 0.0;
  switch (cert.lambda_case) {
    case LambdaCase::Zero: lambda = 0.0; break;
    case LambdaCase::One: lambda = 1.0; break;
    case LambdaCase::Tie: {
      // Coarse grid, then golden-section refinement of the fit residual.
      const int g = std::max(2, opts.lambda_grid);
      double best_l = 0.0;
      double best_r = std::numeric_limits<double>::infinity();
      for (int i = 0; i < g; ++i) {
        const double l = double(i) / (g - 1);
        const double r = fit_at(l).residual;
        if (r < best_r) {
          best_r = r;
          best_l = l;
        }
      }
      const double h = 1.0 / (g - 1);
      double lo = std::max(0.0, best_l - h);
      double hi = std::min(1.0, best_l + h);
      const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
      double x1 = hi - gr * (hi - lo);
      double x2 = lo + gr * (hi - lo);
      double f1 = fit_at(x1).residual;
      double f2 = fit_at(x2).residual;
      for (int i = 0; i < 60; ++i) {
        if (f1 < f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - gr * (hi - lo);
          f1 = fit_at(x1).residual;
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + gr * (hi - lo);
          f2 = fit_at(x2).residual;
        }
      }
      lambda = 0.5 * (lo + hi);
      break;
    }
  }

  const auto fit = fit_at(lambda);
  cert.lambda = lambda;
  cert.beta_y = fit.beta_y;
  cert.beta_z = fit.beta_z;
  cert.m = PsdMatrix(symmetrize(fit.m));
  cert.m_s = PsdMatrix(symmetrize(fit.m_s));
  cert.residual_stationarity = fit.residual;
  cert.residual_compl_m = (k_star.mat() * cert.m.mat()).norm();
  cert.residual_compl_ms =
      ((s.mat() - k_star.mat()) * cert.m_s.mat()).norm();
  return cert;
}

/// True when all residuals are within tol and the multiplier signs agree
/// with the case tables at that tolerance: a positive beta demands its
/// common-rate constraint tight, and lambda is pinned to 0 (resp. 1) when
/// R_0Y exceeds (resp. falls short of) R_0Z.
inline bool check_certificate(const KktCertificate& cert, double tol) {
  if (cert.residual_stationarity > tol) return false;
  if (cert.residual_compl_m > tol) return false;
  if (cert.residual_compl_ms > tol) return false;
  if (cert.lambda < -1e-12 || cert.lambda > 1.0 + 1e-12) return false;
  if (cert.beta_y < -1e-12 || cert.beta_z < -1e-12) return false;

  if (cert.r0y > cert.r0z + tol && cert.lambda > tol) return false;
  if (cert.r0y < cert.r0z - tol && cert.lambda < 1.0 - tol) return false;

  if (cert.beta_y > tol && std::abs(cert.r0_star - cert.r0y) > tol)
    return false;
  if (cert.beta_z > tol && std::abs(cert.r0_star - cert.r0z) > tol)
    return false;

  // Feasibility of the reported cell.
  if (cert.r0_star > std::min(cert.r0y, cert.r0z) + tol) return false;
  return true;
}

}  // namespace wiretap
