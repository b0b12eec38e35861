#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "wiretap/channel.hpp"
#include "wiretap/linalg.hpp"
#include "wiretap/rates.hpp"

namespace wiretap {

/// Exhaustive-search configuration. The grid parameterizes the interval
/// {0 <= K <= S} as K = S^{1/2} R diag(theta) R^T S^{1/2} with theta in
/// [0,1]^t and R a planar rotation for t = 2 (pi-periodic eigenframe).
/// After the coarse pass, refine_passes zoom passes shrink the window to
/// +/- 2 steps around the incumbent.
struct GridSpec {
  int theta_resolution = 200;
  int angle_resolution = 180;
  int max_dim = 2;
  int refine_passes = 4;
  int refine_resolution = 160;

  void validate() const {
    if (theta_resolution < 2 || angle_resolution < 2 || refine_resolution < 2)
      throw Error("grid resolutions must be at least 2");
  }
};

/// Functional the oracle maximizes over the interval.
struct OracleObjective {
  enum class Kind { SecrecyRate, WeightedBoundary };

  Kind kind = Kind::SecrecyRate;
  double mu_p = 0.0;
  double mu_s = 1.0;
  double r0_star = 0.0;

  static OracleObjective secrecy() { return {}; }
  static OracleObjective weighted(double mu_p, double mu_s, double r0_star) {
    return {Kind::WeightedBoundary, mu_p, mu_s, r0_star};
  }
};

struct GridResult {
  PsdMatrix k;
  double value = -std::numeric_limits<double>::infinity();
  bool feasible_found = false;
};

struct ScalarSecrecy {
  double c_s = 0.0;
  double k_star = 0.0;
};

/// Closed-form secrecy capacity for t = 1. The scalar objective
/// (1/2) log((k+sy)/sy) - (1/2) log((k+sz)/sz) has derivative with the sign
/// of sz - sy everywhere on [0, s], so the maximizer sits at an endpoint.
inline ScalarSecrecy scalar_closed_form(double sigma_y2, double sigma_z2,
                                        double s) {
  if (!(sigma_y2 > 0.0) || !(sigma_z2 > 0.0))
    throw NonPositiveDefiniteNoise("scalar noise variances must be positive");
  if (s < 0.0) throw OrderViolation("s must be nonnegative");
  if (sigma_y2 < sigma_z2 && s > 0.0) {
    const double c_s = 0.5 * std::log((s + sigma_y2) / sigma_y2) -
                       0.5 * std::log((s + sigma_z2) / sigma_z2);
    return {c_s, s};
  }
  return {0.0, 0.0};
}

namespace detail {

struct Window {
  double lo = 0.0;
  double hi = 1.0;
};

// Evaluate the oracle objective from the two branch informations at K and
// at S. Returns -inf for infeasible points of the weighted problem. For
// mu_s <= mu_p the secret rate is folded into the public part (the optimal
// split of the region point), which turns the objective into
// mu_p (R_p + R_s + min{r0y, r0z} - r0*).
inline double oracle_value(const OracleObjective& obj, double ly, double lz,
                           double c_y, double c_z) {
  if (obj.kind == OracleObjective::Kind::SecrecyRate) return ly - lz;
  const double m = std::min(c_y - ly, c_z - lz);
  if (m < obj.r0_star - 1e-12)
    return -std::numeric_limits<double>::infinity();
  const double mu_s_eff = std::max(obj.mu_s, obj.mu_p);
  return obj.mu_p * (lz + m - obj.r0_star) + mu_s_eff * (ly - lz);
}

}  // namespace detail

/// Deterministic brute-force maximization over {0 <= K <= S} for t <= 2.
/// Works on the range space of S, so singular S is handled by searching the
/// lower-dimensional face.
inline GridResult grid_search(const AlignedChannel& ch, const PsdMatrix& s,
                              const OracleObjective& obj,
                              const GridSpec& grid = {}) {
  grid.validate();
  const Eigen::Index n = ch.dim();
  if (n > grid.max_dim)
    throw DimensionTooLarge("grid oracle supports t <= " +
                            std::to_string(grid.max_dim));
  if (s.dim() != n) throw DimensionMismatch("S does not match the channel");

  const Matrix& sy = ch.sigma_y_eff.mat();
  const Matrix& sz = ch.sigma_z_eff.mat();
  const double c_y = gauss_info(s.mat(), sy);
  const double c_z = gauss_info(s.mat(), sz);

  const IntervalFrame frame = interval_frame(s);

  GridResult best;
  const auto consider = [&](const Matrix& k, double value) {
    if (value > best.value) {
      best.value = value;
      best.k = PsdMatrix(symmetrize(k));
      best.feasible_found = true;
    }
  };

  if (frame.rank == 0) {
    const double v = detail::oracle_value(obj, 0.0, 0.0, c_y, c_z);
    consider(Matrix::Zero(n, n), v);
    return best;
  }

  const bool wall_mode = obj.kind == OracleObjective::Kind::WeightedBoundary &&
                         obj.r0_star > 1e-12;

  if (frame.rank == 1) {
    // K(theta) = theta f f^T; the rank-one determinant lemma gives
    // |K + Sigma| = |Sigma| (1 + theta f^T Sigma^{-1} f).
    const Vector f = frame.f.col(0);
    const double qy = f.dot(inverse_sym(sy) * f);
    const double qz = f.dot(inverse_sym(sz) * f);
    const auto eval_theta = [&](double theta) {
      const double ly = 0.5 * std::log1p(theta * qy);
      const double lz = 0.5 * std::log1p(theta * qz);
      return detail::oracle_value(obj, ly, lz, c_y, c_z);
    };
    const auto slack_theta = [&](double theta) {
      const double ly = 0.5 * std::log1p(theta * qy);
      const double lz = 0.5 * std::log1p(theta * qz);
      return std::min(c_y - ly, c_z - lz) - obj.r0_star;
    };
    detail::Window w{0.0, 1.0};
    double best_theta = 0.0;
    for (int pass = 0; pass <= grid.refine_passes; ++pass) {
      const int res = pass == 0 ? grid.theta_resolution : grid.refine_resolution;
      const double step = (w.hi - w.lo) / (res - 1);
      double pass_best = -std::numeric_limits<double>::infinity();
      double pass_theta = best_theta;
      for (int i = 0; i < res; ++i) {
        const double theta = w.lo + i * step;
        const double v = eval_theta(theta);
        if (v > pass_best) {
          pass_best = v;
          pass_theta = theta;
        }
      }
      best_theta = pass_theta;
      consider(best_theta * f * f.transpose(), eval_theta(best_theta));
      w.lo = std::max(0.0, best_theta - 2.0 * step);
      w.hi = std::min(1.0, best_theta + 2.0 * step);
    }
    // The exact point where the common-rate constraint becomes tight.
    if (wall_mode && slack_theta(0.0) > 0.0 && slack_theta(1.0) < 0.0) {
      double lo = 0.0, hi = 1.0;
      for (int i = 0; i < 70; ++i) {
        const double mid = 0.5 * (lo + hi);
        (slack_theta(mid) > 0.0 ? lo : hi) = mid;
      }
      consider(lo * f * f.transpose(), eval_theta(lo));
    }
    return best;
  }

  // rank 2: dense loop with direct 2x2 determinants.
  const Matrix b = sqrt_psd(s.mat());
  const double ldy0 = logdet_pd(sy);
  const double ldz0 = logdet_pd(sz);
  const double sy00 = sy(0, 0), sy01 = sy(0, 1), sy11 = sy(1, 1);
  const double sz00 = sz(0, 0), sz01 = sz(0, 1), sz11 = sz(1, 1);

  const double pi = 3.14159265358979323846;
  detail::Window wt1{0.0, 1.0}, wt2{0.0, 1.0}, wa{0.0, pi};
  double bt1 = 0.0, bt2 = 0.0, ba = 0.0;

  for (int pass = 0; pass <= grid.refine_passes; ++pass) {
    const int tres = pass == 0 ? grid.theta_resolution : grid.refine_resolution;
    const int ares = pass == 0 ? grid.angle_resolution : grid.refine_resolution;
    const double t1_step = (wt1.hi - wt1.lo) / (tres - 1);
    const double t2_step = (wt2.hi - wt2.lo) / (tres - 1);
    // The coarse angle pass covers [0, pi) without the right endpoint (the
    // eigenframe is pi-periodic); zoom windows are closed.
    const double a_step = pass == 0 ? (wa.hi - wa.lo) / ares
                                    : (wa.hi - wa.lo) / (ares - 1);

    double pass_best = -std::numeric_limits<double>::infinity();
    double p1 = bt1, p2 = bt2, pa = ba;
    for (int ia = 0; ia < ares; ++ia) {
      const double a = wa.lo + ia * a_step;
      const double c = std::cos(a), sn = std::sin(a);
      const double u0 = b(0, 0) * c + b(0, 1) * sn;
      const double u1 = b(1, 0) * c + b(1, 1) * sn;
      const double v0 = -b(0, 0) * sn + b(0, 1) * c;
      const double v1 = -b(1, 0) * sn + b(1, 1) * c;
      const double U00 = u0 * u0, U01 = u0 * u1, U11 = u1 * u1;
      const double V00 = v0 * v0, V01 = v0 * v1, V11 = v1 * v1;
      for (int i1 = 0; i1 < tres; ++i1) {
        const double t1 = wt1.lo + i1 * t1_step;
        const double a00 = t1 * U00, a01 = t1 * U01, a11 = t1 * U11;
        for (int i2 = 0; i2 < tres; ++i2) {
          const double t2 = wt2.lo + i2 * t2_step;
          const double k00 = a00 + t2 * V00;
          const double k01 = a01 + t2 * V01;
          const double k11 = a11 + t2 * V11;
          const double dy = (k00 + sy00) * (k11 + sy11) -
                            (k01 + sy01) * (k01 + sy01);
          const double dz = (k00 + sz00) * (k11 + sz11) -
                            (k01 + sz01) * (k01 + sz01);
          const double ly = 0.5 * (std::log(dy) - ldy0);
          const double lz = 0.5 * (std::log(dz) - ldz0);
          const double v = detail::oracle_value(obj, ly, lz, c_y, c_z);
          if (v > pass_best) {
            pass_best = v;
            p1 = t1;
            p2 = t2;
            pa = a;
          }
        }
      }
    }
    bt1 = p1;
    bt2 = p2;
    ba = pa;
    {
      const double c = std::cos(ba), sn = std::sin(ba);
      const double u0 = b(0, 0) * c + b(0, 1) * sn;
      const double u1 = b(1, 0) * c + b(1, 1) * sn;
      const double v0 = -b(0, 0) * sn + b(0, 1) * c;
      const double v1 = -b(1, 0) * sn + b(1, 1) * c;
      Matrix k(2, 2);
      k(0, 0) = bt1 * u0 * u0 + bt2 * v0 * v0;
      k(0, 1) = bt1 * u0 * u1 + bt2 * v0 * v1;
      k(1, 0) = k(0, 1);
      k(1, 1) = bt1 * u1 * u1 + bt2 * v1 * v1;
      const double ly = gauss_info(k, sy);
      const double lz = gauss_info(k, sz);
      consider(k, detail::oracle_value(obj, ly, lz, c_y, c_z));
    }
    wt1.lo = std::max(0.0, bt1 - 2.0 * t1_step);
    wt1.hi = std::min(1.0, bt1 + 2.0 * t1_step);
    wt2.lo = std::max(0.0, bt2 - 2.0 * t2_step);
    wt2.hi = std::min(1.0, bt2 + 2.0 * t2_step);
    // The rotation is periodic, so the angle window is left unclamped.
    wa.lo = ba - 2.0 * a_step;
    wa.hi = ba + 2.0 * a_step;
  }

  if (wall_mode) {
    // Wall grid: the surface min{r0y, r0z} = r0* parameterized by
    // (theta1, angle), with theta2 pinned by bisection along its monotone
    // axis. Box-grid maximizers hug this surface with a tangential error of
    // order sqrt(step); quantizing directly on the surface removes it.
    const auto infos = [&](double k00, double k01, double k11, double* ly,
                           double* lz) {
      const double dy =
          (k00 + sy00) * (k11 + sy11) - (k01 + sy01) * (k01 + sy01);
      const double dz =
          (k00 + sz00) * (k11 + sz11) - (k01 + sz01) * (k01 + sz01);
      *ly = 0.5 * (std::log(dy) - ldy0);
      *lz = 0.5 * (std::log(dz) - ldz0);
    };

    detail::Window wt1{0.0, 1.0}, wa{0.0, pi};
    double bt1 = 0.0, ba = 0.0;
    for (int pass = 0; pass <= grid.refine_passes; ++pass) {
      const int tres =
          pass == 0 ? grid.theta_resolution : grid.refine_resolution;
      const int ares =
          pass == 0 ? grid.angle_resolution : grid.refine_resolution;
      const double t1_step = (wt1.hi - wt1.lo) / (tres - 1);
      const double a_step = pass == 0 ? (wa.hi - wa.lo) / ares
                                      : (wa.hi - wa.lo) / (ares - 1);

      double pass_best = -std::numeric_limits<double>::infinity();
      double p1 = bt1, pa = ba;
      bool found = false;
      for (int ia = 0; ia < ares; ++ia) {
        const double a = wa.lo + ia * a_step;
        const double c = std::cos(a), sn = std::sin(a);
        const double u0 = b(0, 0) * c + b(0, 1) * sn;
        const double u1 = b(1, 0) * c + b(1, 1) * sn;
        const double v0 = -b(0, 0) * sn + b(0, 1) * c;
        const double v1 = -b(1, 0) * sn + b(1, 1) * c;
        const double U00 = u0 * u0, U01 = u0 * u1, U11 = u1 * u1;
        const double V00 = v0 * v0, V01 = v0 * v1, V11 = v1 * v1;
        for (int i1 = 0; i1 < tres; ++i1) {
          const double t1 = wt1.lo + i1 * t1_step;
          const auto slack_at = [&](double t2) {
            double ly, lz;
            infos(t1 * U00 + t2 * V00, t1 * U01 + t2 * V01,
                  t1 * U11 + t2 * V11, &ly, &lz);
            return std::min(c_y - ly, c_z - lz) - obj.r0_star;
          };
          if (slack_at(0.0) < 0.0 || slack_at(1.0) > 0.0) continue;
          double lo = 0.0, hi = 1.0;
          for (int i = 0; i < 60; ++i) {
            const double mid = 0.5 * (lo + hi);
            (slack_at(mid) > 0.0 ? lo : hi) = mid;
          }
          const double t2 = lo;
          double ly, lz;
          infos(t1 * U00 + t2 * V00, t1 * U01 + t2 * V01,
                t1 * U11 + t2 * V11, &ly, &lz);
          const double v = detail::oracle_value(obj, ly, lz, c_y, c_z);
          if (v > pass_best) {
            pass_best = v;
            p1 = t1;
            pa = a;
            found = true;
          }
        }
      }
      if (!found) break;  // the surface does not cross this window
      bt1 = p1;
      ba = pa;
      {
        const double c = std::cos(ba), sn = std::sin(ba);
        const double u0 = b(0, 0) * c + b(0, 1) * sn;
        const double u1 = b(1, 0) * c + b(1, 1) * sn;
        const double v0 = -b(0, 0) * sn + b(0, 1) * c;
        const double v1 = -b(1, 0) * sn + b(1, 1) * c;
        const double U00 = u0 * u0, U01 = u0 * u1, U11 = u1 * u1;
        const double V00 = v0 * v0, V01 = v0 * v1, V11 = v1 * v1;
        const auto slack_at = [&](double t2) {
          double ly, lz;
          infos(bt1 * U00 + t2 * V00, bt1 * U01 + t2 * V01,
                bt1 * U11 + t2 * V11, &ly, &lz);
          return std::min(c_y - ly, c_z - lz) - obj.r0_star;
        };
        if (slack_at(0.0) >= 0.0 && slack_at(1.0) <= 0.0) {
          double lo = 0.0, hi = 1.0;
          for (int i = 0; i < 60; ++i) {
            const double mid = 0.5 * (lo + hi);
            (slack_at(mid) > 0.0 ? lo : hi) = mid;
          }
          Matrix k(2, 2);
          k(0, 0) = bt1 * U00 + lo * V00;
          k(0, 1) = bt1 * U01 + lo * V01;
          k(1, 0) = k(0, 1);
          k(1, 1) = bt1 * U11 + lo * V11;
          consider(k, detail::oracle_value(obj, gauss_info(k, sy),
                                           gauss_info(k, sz), c_y, c_z));
        }
      }
      wt1.lo = std::max(0.0, bt1 - 2.0 * t1_step);
      wt1.hi = std::min(1.0, bt1 + 2.0 * t1_step);
      wa.lo = ba - 2.0 * a_step;
      wa.hi = ba + 2.0 * a_step;
    }
  }
  return best;
}

/// Generic grid maximization of a caller-supplied functional over the
/// interval. Slower per point than the typed oracle; meant for coarse
/// fallback searches.
template <typename ValueFn>
GridResult grid_search_fn(const PsdMatrix& s, ValueFn&& value_fn,
                          const GridSpec& grid = {}) {
  grid.validate();
  if (s.dim() > grid.max_dim)
    throw DimensionTooLarge("grid oracle supports t <= " +
                            std::to_string(grid.max_dim));
  const IntervalFrame frame = interval_frame(s);
  const Eigen::Index n = s.dim();

  GridResult best;
  const auto consider = [&](const Matrix& k) {
    const double v = value_fn(k);
    if (v > best.value) {
      best.value = v;
      best.k = PsdMatrix(symmetrize(k));
      best.feasible_found = true;
    }
  };

  if (frame.rank == 0) {
    consider(Matrix::Zero(n, n));
    return best;
  }
  if (frame.rank == 1) {
    const Vector f = frame.f.col(0);
    for (int i = 0; i < grid.theta_resolution; ++i) {
      const double theta = double(i) / (grid.theta_resolution - 1);
      consider(theta * f * f.transpose());
    }
    return best;
  }

  const double pi = 3.14159265358979323846;
  for (int ia = 0; ia < grid.angle_resolution; ++ia) {
    const double a = ia * pi / grid.angle_resolution;
    Matrix r(2, 2);
    r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    const Matrix u = frame.f * r.col(0);
    const Matrix v = frame.f * r.col(1);
    const Matrix uu = u * u.transpose();
    const Matrix vv = v * v.transpose();
    for (int i1 = 0; i1 < grid.theta_resolution; ++i1) {
      const double t1 = double(i1) / (grid.theta_resolution - 1);
      for (int i2 = 0; i2 < grid.theta_resolution; ++i2) {
        const double t2 = double(i2) / (grid.theta_resolution - 1);
        consider(t1 * uu + t2 * vv);
      }
    }
  }
  return best;
}

}  // namespace wiretap
