#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "wiretap/channel.hpp"
#include "wiretap/linalg.hpp"
#include "wiretap/rates.hpp"

namespace wiretap {

enum class EnhanceSource { EnhanceZ, EnhanceY };

/// Fictitious noise covariance built from a KKT slack matrix:
///   scale (K* + sigma_tilde)^{-1} = scale (K* + sigma)^{-1} + slack,
/// i.e. sigma_tilde = [(K* + sigma)^{-1} + slack/scale]^{-1} - K*.
/// Always sits below the original covariance in the Loewner order.
struct EnhancedChannel {
  PsdMatrix sigma_tilde;
  EnhanceSource source = EnhanceSource::EnhanceZ;
  double scale = 1.0;
};

inline EnhancedChannel enhance(const PsdMatrix& k_star, const PsdMatrix& sigma,
                               const PsdMatrix& slack, double scale,
                               EnhanceSource source = EnhanceSource::EnhanceZ) {
  if (!(scale > 0.0)) throw Error("enhance: scale must be positive");
  if (k_star.dim() != sigma.dim() || slack.dim() != sigma.dim())
    throw DimensionMismatch("enhance: dimension mismatch");
  const Matrix base = inverse_sym(k_star.mat() + sigma.mat());
  const Matrix bumped = symmetrize(base + slack.mat() / scale);
  const Matrix tilde = symmetrize(inverse_sym(bumped) - k_star.mat());

  const double scale_ref = std::max(1.0, max_abs(sigma.mat()));
  if (min_eigenvalue(tilde) <= tol::pd * scale_ref)
    throw NonPositiveResult(
        "enhanced covariance is not positive definite; slack/scale are "
        "inconsistent");
  if (!loewner_leq(tilde, sigma.mat()))
    throw NonPositiveResult("enhanced covariance exceeds the original");

  EnhancedChannel out;
  out.sigma_tilde = PsdMatrix(tilde);
  out.source = source;
  out.scale = scale;
  return out;
}

/// Residual report for the enhanced-covariance facts. All residuals are
/// nonnegative; pass() compares them against the tolerance they were built
/// with.
struct EnhancementReport {
  double res_leq_own = 0.0;      // sigma_tilde <= original sigma
  double res_leq_cross = 0.0;    // sigma_tilde <= the other receiver's sigma
  double res_product = 0.0;      // defining product identity
  double r0z_minus_r0y = 0.0;    // only filled by the Z-side check
  bool r0_order_ok = true;
  double tol = tol::enh;

  bool pass() const {
    return res_leq_own <= tol && res_leq_cross <= tol && res_product <= tol &&
           r0_order_ok;
  }
};

/// Facts for the eavesdropper-side enhancement sigma_tilde_z:
///   sigma_tilde_z <= sigma_z, sigma_tilde_z <= sigma_y, and
///   (K* + sigma_tilde_z)^{-1}(S + sigma_tilde_z)
///     = (K* + sigma_z)^{-1}(S + sigma_z),
/// which forces R_0Z(K*) >= R_0Y(K*).
inline EnhancementReport verify_enhancement_z(
    const PsdMatrix& k_star, const PsdMatrix& s, const PsdMatrix& sigma_y,
    const PsdMatrix& sigma_z, const PsdMatrix& sigma_tilde_z,
    double tolerance = tol::enh) {
  EnhancementReport rep;
  rep.tol = tolerance;
  rep.res_leq_own = loewner_violation(sigma_tilde_z.mat(), sigma_z.mat());
  rep.res_leq_cross = loewner_violation(sigma_tilde_z.mat(), sigma_y.mat());

  const Matrix lhs = inverse_sym(k_star.mat() + sigma_tilde_z.mat()) *
                     (s.mat() + sigma_tilde_z.mat());
  const Matrix rhs = inverse_sym(k_star.mat() + sigma_z.mat()) *
                     (s.mat() + sigma_z.mat());
  rep.res_product = (lhs - rhs).norm();

  const double r0y = gauss_info(s.mat(), sigma_y.mat()) -
                     gauss_info(k_star.mat(), sigma_y.mat());
  const double r0z = gauss_info(s.mat(), sigma_z.mat()) -
                     gauss_info(k_star.mat(), sigma_z.mat());
  rep.r0z_minus_r0y = r0z - r0y;
  rep.r0_order_ok = r0z >= r0y - tolerance;
  return rep;
}

/// Facts for the legitimate-side enhancement sigma_tilde_y:
///   sigma_tilde_y <= sigma_y, sigma_tilde_y <= sigma_z, and
///   (K* + sigma_tilde_y)^{-1} sigma_tilde_y = (K* + sigma_y)^{-1} sigma_y.
inline EnhancementReport verify_enhancement_y(const PsdMatrix& k_star,
                                              const PsdMatrix& sigma_y,
                                              const PsdMatrix& sigma_z,
                                              const PsdMatrix& sigma_tilde_y,
                                              double tolerance = tol::enh) {
  EnhancementReport rep;
  rep.tol = tolerance;
  rep.res_leq_own = loewner_violation(sigma_tilde_y.mat(), sigma_y.mat());
  rep.res_leq_cross = loewner_violation(sigma_tilde_y.mat(), sigma_z.mat());
  const Matrix lhs =
      inverse_sym(k_star.mat() + sigma_tilde_y.mat()) * sigma_tilde_y.mat();
  const Matrix rhs = inverse_sym(k_star.mat() + sigma_y.mat()) * sigma_y.mat();
  rep.res_product = (lhs - rhs).norm();
  return rep;
}

struct ExtremalReport {
  int n_tested = 0;
  double max_violation = 0.0;       // max over the test set of LHS - RHS
  double equality_gap_at_kstar = 0.0;
  double tol = tol::ext;

  bool pass() const {
    return max_violation <= tol && std::abs(equality_gap_at_kstar) <= tol;
  }
};

/// Checks the weighted entropy bound
///   nu h(X + N_1 | U) - gamma h(X + N_2 | U)
///     <= (nu/2) log|2 pi e (K* + Sigma_1)| - (gamma/2) log|2 pi e (K* + Sigma_2)|
/// over a family of jointly Gaussian (U, X) pairs, described by their
/// conditional covariances Q with 0 <= Q <= S. The hypotheses
/// Sigma_1 <= Sigma_2, nu (K* + Sigma_1)^{-1} = gamma (K* + Sigma_2)^{-1} + M_S,
/// (S - K*) M_S = 0 and S > 0 are verified first; violations throw rather
/// than assert a vacuous bound. Equality must hold at Q = K*.
inline ExtremalReport check_extremal_inequality(
    const PsdMatrix& k_star, const PsdMatrix& sigma_1, const PsdMatrix& sigma_2,
    double nu, double gamma, const PsdMatrix& m_s, const PsdMatrix& s,
    std::span<const PsdMatrix> gaussian_test_set, double tolerance = tol::ext) {
  if (nu < 0.0 || gamma < 0.0)
    throw HypothesisViolated("nu and gamma must be nonnegative");
  if (!s.strictly_pd())
    throw HypothesisViolated("S must be strictly positive definite");
  if (!loewner_leq(k_star.mat(), s.mat()))
    throw HypothesisViolated("K* must satisfy K* <= S");
  if (loewner_violation(sigma_1.mat(), sigma_2.mat()) > tol::enh)
    throw HypothesisViolated("Sigma_1 <= Sigma_2 fails");
  const Matrix stat = nu * inverse_sym(k_star.mat() + sigma_1.mat()) -
                      gamma * inverse_sym(k_star.mat() + sigma_2.mat()) -
                      m_s.mat();
  if (stat.norm() > tol::enh)
    throw HypothesisViolated("multiplier identity for (nu, gamma, M_S) fails");
  if (((s.mat() - k_star.mat()) * m_s.mat()).norm() > tol::enh)
    throw HypothesisViolated("M_S is not supported on the null space of S - K*");

  const double n = static_cast<double>(s.dim());
  const double two_pi_e = 2.0 * 3.14159265358979323846 * std::exp(1.0);
  const auto half_log_det_2pie = [&](const Matrix& a) {
    return 0.5 * (n * std::log(two_pi_e) + logdet_pd(a));
  };
  const auto lhs_at = [&](const Matrix& q) {
    return nu * half_log_det_2pie(q + sigma_1.mat()) -
           gamma * half_log_det_2pie(q + sigma_2.mat());
  };

  const double rhs = lhs_at(k_star.mat());
  ExtremalReport rep;
  rep.tol = tolerance;
  rep.equality_gap_at_kstar = lhs_at(k_star.mat()) - rhs;
  for (const auto& q : gaussian_test_set) {
    if (!loewner_leq(Matrix::Zero(s.dim(), s.dim()), q.mat()) ||
        !loewner_leq(q.mat(), s.mat()))
      throw HypothesisViolated("test covariance outside [0, S]");
    rep.max_violation = std::max(rep.max_violation, lhs_at(q.mat()) - rhs);
    ++rep.n_tested;
  }
  return rep;
}

struct RewriteReport {
  int n_tested = 0;
  double max_abs_diff = 0.0;
  double tol = tol::rewrite;

  bool pass() const { return max_abs_diff <= tol; }
};

/// For mu_s > mu_p, the weighted objective (mu_p + beta_z) R_0 + mu_p R_p +
/// mu_s R_s evaluated at the region corner of a jointly Gaussian tuple
/// (U with covariance S - K, V = X = U + T with T of covariance K) must
/// equal the explicit form
///   (mu_p + beta_z) min{I(U;Y), I(U;Z)} + mu_p I(V;Z|U)
///     + mu_s [I(V;Y|U) - I(V;Z|U)].
/// The right side is computed from literal differential entropies with their
/// 2 pi e terms, the left from the rate functionals; the two routes must
/// agree to tolerance at every sample.
inline RewriteReport check_objective_rewrite(
    const AlignedChannel& ch, const PsdMatrix& s, double mu_p, double mu_s,
    double beta_z, std::span<const PsdMatrix> sample_points,
    double tolerance = tol::rewrite) {
  if (!(mu_s > mu_p))
    throw HypothesisViolated("objective rewrite requires mu_s > mu_p");
  if (beta_z < 0.0) throw HypothesisViolated("beta_z must be nonnegative");

  const Matrix& sy = ch.sigma_y_eff.mat();
  const Matrix& sz = ch.sigma_z_eff.mat();
  const double n = static_cast<double>(ch.dim());
  const double two_pi_e = 2.0 * 3.14159265358979323846 * std::exp(1.0);
  const auto h_gauss = [&](const Matrix& cov) {
    return 0.5 * (n * std::log(two_pi_e) + logdet_pd(cov));
  };

  RewriteReport rep;
  rep.tol = tolerance;
  for (const auto& k : sample_points) {
    const RateBundle b = gaussian_region_rates(k, s, ch);
    const double corner =
        (mu_p + beta_z) * b.min_r0() + mu_p * b.rp + mu_s * b.rs;

    // Mutual informations of the Gaussian tuple, written as entropy
    // differences.
    const double i_uy = h_gauss(s.mat() + sy) - h_gauss(k.mat() + sy);
    const double i_uz = h_gauss(s.mat() + sz) - h_gauss(k.mat() + sz);
    const double i_vy = h_gauss(k.mat() + sy) - h_gauss(sy);
    const double i_vz = h_gauss(k.mat() + sz) - h_gauss(sz);
    const double explicit_form = (mu_p + beta_z) * std::min(i_uy, i_uz) +
                                 mu_p * i_vz + mu_s * (i_vy - i_vz);

    rep.max_abs_diff =
        std::max(rep.max_abs_diff, std::abs(corner - explicit_form));
    ++rep.n_tested;
  }
  return rep;
}

}  // namespace wiretap
