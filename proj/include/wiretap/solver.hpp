#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "wiretap/channel.hpp"
#include "wiretap/linalg.hpp"
#include "wiretap/rates.hpp"
#include "wiretap/sampling.hpp"

namespace wiretap {

struct SolverConfig {
  int restarts = 8;
  int max_iters = 5000;
  double step_init = 1.0;
  double armijo_c = 1e-4;
  double armijo_shrink = 0.5;
  double tol_grad = 1e-8;
  std::uint64_t seed = 0x77ED2024u;
  std::array<double, 3> barrier_weights{1e-2, 1e-4, 1e-6};
  // Post-solve polish toward a stationary point; certificate building wants
  // much tighter gradients than the sweep itself needs.
  bool refine = true;
  double refine_tol = 1e-10;
  int refine_iters = 50000;

  void validate() const {
    if (restarts < 1 || max_iters < 1 || refine_iters < 1 ||
        !(step_init > 0.0) || !(armijo_c > 0.0) || !(armijo_shrink > 0.0) ||
        armijo_shrink >= 1.0 || !(tol_grad > 0.0) || !(refine_tol > 0.0))
      throw Error("solver configuration values must be positive");
  }
};

/// One sample of the region boundary: the cell (r0_star, mu_p, mu_s), the
/// optimizer, the raw functional values at it, the achieved (rs, rp) split,
/// and solver diagnostics. For mu_s <= mu_p the secret rate is folded into
/// the public message (rs = 0), which is the optimal split of the region
/// point; otherwise rp follows R_p* = R_p(K*) + min{R_0Y, R_0Z} - R_0*.
struct BoundaryPoint {
  double r0_star = 0.0;
  double mu_p = 0.0;
  double mu_s = 0.0;
  PsdMatrix k_opt;
  PsdMatrix s_used;
  RateBundle functionals;
  double rs = 0.0;
  double rp = 0.0;
  double objective = 0.0;
  bool converged = true;
  double grad_norm = 0.0;
  double constraint_slack = 0.0;
  double gap = 0.0;
  std::string certificate_id;
};

struct SecrecyResult {
  double value = 0.0;
  PsdMatrix k_star;
  bool converged = true;
  double grad_norm = 0.0;
};

/// Nearest point of {0 <= K <= S} in the Frobenius norm of the transformed
/// coordinates Q = F^+ K F^+T, obtained by clipping the eigenvalues of Q to
/// [0, 1]. Idempotent.
inline PsdMatrix project_interval(const Matrix& k_raw, const PsdMatrix& s) {
  const IntervalFrame frame = interval_frame(s);
  if (frame.rank == 0) return PsdMatrix::zero(s.dim());
  const Matrix q = frame.to_frame(symmetrize(k_raw));
  return PsdMatrix(symmetrize(frame.to_ambient(clip_eigenvalues(q, 0.0, 1.0))));
}

namespace detail {

inline Matrix clip01(const Matrix& q) { return clip_eigenvalues(q, 0.0, 1.0); }

inline Matrix inv_pd(const Matrix& a) {
  Eigen::LLT<Matrix> llt(symmetrize(a));
  if (llt.info() != Eigen::Success) return inverse_sym(a);
  return llt.solve(Matrix::Identity(a.rows(), a.cols()));
}

// phi(K) = mu_p [R_p(K) + min{R_0Y, R_0Z} - r0*] + mu_s_eff R_s(K)
// over {0 <= K <= S}, optionally subject to min{R_0Y, R_0Z} >= r0*.
// Everything below works in the frame coordinates Q (K = F Q F^T,
// 0 <= Q <= I); min{.,.} is handled by the subgradient that averages the two
// branch gradients at ties.
class WeightedEngine {
 public:
  WeightedEngine(const AlignedChannel& ch, const PsdMatrix& s, double mu_p,
                 double mu_s_eff, double r0_star)
      : sy_(ch.sigma_y_eff.mat()),
        sz_(ch.sigma_z_eff.mat()),
        frame_(interval_frame(s)),
        mu_p_(mu_p),
        mu_s_eff_(mu_s_eff),
        r0_star_(r0_star) {
    c_y_ = gauss_info(s.mat(), sy_);
    c_z_ = gauss_info(s.mat(), sz_);
  }

  Eigen::Index rank() const { return frame_.rank; }
  const IntervalFrame& frame() const { return frame_; }

  struct Eval {
    double phi = 0.0;
    double slack = 0.0;  // min{r0y, r0z} - r0*
  };

  Eval eval(const Matrix& q) const {
    const Matrix k = frame_.to_ambient(q);
    const double ly = gauss_info(k, sy_);
    const double lz = gauss_info(k, sz_);
    const double m = std::min(c_y_ - ly, c_z_ - lz);
    return {mu_p_ * (lz + m - r0_star_) + mu_s_eff_ * (ly - lz),
            m - r0_star_};
  }

  struct Grads {
    Matrix phi;  // d phi / d Q
    Matrix con;  // d slack / d Q
    Eval at;
  };

  Grads grads(const Matrix& q) const {
    const Matrix k = frame_.to_ambient(q);
    const Matrix ay = inv_pd(k + sy_);
    const Matrix az = inv_pd(k + sz_);
    const double ly = gauss_info(k, sy_);
    const double lz = gauss_info(k, sz_);
    const double r0y = c_y_ - ly;
    const double r0z = c_z_ - lz;

    Matrix gmin;
    if (r0y < r0z - tol::tie) {
      gmin = -0.5 * ay;
    } else if (r0z < r0y - tol::tie) {
      gmin = -0.5 * az;
    } else {
      gmin = -0.25 * (ay + az);
    }

    Grads g;
    const Matrix gphi_k =
        mu_p_ * (0.5 * az + gmin) + mu_s_eff_ * 0.5 * (ay - az);
    g.phi = frame_.f.transpose() * gphi_k * frame_.f;
    g.con = frame_.f.transpose() * gmin * frame_.f;
    const double m = std::min(r0y, r0z);
    g.at.slack = m - r0_star_;
    g.at.phi = mu_p_ * (lz + m - r0_star_) + mu_s_eff_ * (ly - lz);
    return g;
  }

 private:
  Matrix sy_, sz_;
  IntervalFrame frame_;
  double mu_p_, mu_s_eff_, r0_star_;
  double c_y_ = 0.0, c_z_ = 0.0;
};

struct StageResult {
  Matrix q;
  double grad_residual = std::numeric_limits<double>::infinity();
  bool tol_reached = false;
};

// Projected gradient ascent with Armijo backtracking. barrier_w < 0 runs the
// plain objective; hard_filter rejects steps that leave the feasible set
// even without a barrier term.
inline StageResult ascend(const WeightedEngine& eng, Matrix q, double barrier_w,
                          bool hard_filter, int max_iters, double tol_grad,
                          const SolverConfig& cfg) {
  const double neg_inf = -std::numeric_limits<double>::infinity();
  const auto merit = [&](const Matrix& qq) {
    const auto e = eng.eval(qq);
    if (barrier_w > 0.0) {
      if (e.slack <= 0.0) return neg_inf;
      return e.phi + barrier_w * std::log(e.slack);
    }
    if (hard_filter && e.slack < 0.0) return neg_inf;
    return e.phi;
  };

  StageResult out;
  out.q = q;
  double cur = merit(q);
  if (!(cur > neg_inf)) return out;  // infeasible start: nothing to ascend
  int stalls = 0;
  for (int it = 0; it < max_iters; ++it) {
    const auto g = eng.grads(q);
    Matrix dir = g.phi;
    if (barrier_w > 0.0) {
      if (g.at.slack <= 0.0) break;
      dir += (barrier_w / g.at.slack) * g.con;
    }
    const Matrix residual = clip01(q + dir) - q;
    out.grad_residual = residual.norm();
    if (out.grad_residual <= tol_grad) {
      out.tol_reached = true;
      break;
    }

    double step = cfg.step_init;
    bool accepted = false;
    while (step > 1e-18) {
      const Matrix qn = clip01(q + step * dir);
      const double next = merit(qn);
      const double model = (dir.cwiseProduct(qn - q)).sum();
      if (next >= cur + cfg.armijo_c * model) {
        stalls = ((qn - q).norm() <= 1e-17) ? stalls + 1 : 0;
        q = qn;
        cur = next;
        accepted = true;
        break;
      }
      step *= cfg.armijo_shrink;
    }
    if (!accepted || stalls >= 5) break;
  }
  out.q = q;
  return out;
}

// Puts q back on the surface slack = 0. Newton steps along the constraint
// gradient keep the tangential component of the iterate intact; if the
// Newton path leaves the interval, fall back to the segment toward 0 or I,
// along which slack is monotone.
inline Matrix reproject_active(const WeightedEngine& eng, Matrix q) {
  const auto slack_at = [&](const Matrix& qq) { return eng.eval(qq).slack; };
  double c = slack_at(q);
  if (std::abs(c) < 1e-15) return q;

  for (int it = 0; it < 16 && std::abs(c) >= 1e-15; ++it) {
    const auto g = eng.grads(q);
    const double gn2 = g.con.squaredNorm();
    if (!(gn2 > 0.0)) break;
    const Matrix qn = q - (g.at.slack / gn2) * g.con;
    const auto es = eigen_sym(qn);
    if (es.eigenvalues().minCoeff() < -1e-12 ||
        es.eigenvalues().maxCoeff() > 1.0 + 1e-12)
      break;  // Newton path exits the interval
    const double cn = slack_at(qn);
    if (std::abs(cn) >= std::abs(c)) break;
    q = qn;
    c = cn;
  }
  if (std::abs(c) < 1e-13) return q;

  // Fallback: bisection along the segment to an interval corner.
  const Matrix anchor = c < 0.0
                            ? Matrix(Matrix::Zero(q.rows(), q.cols()))
                            : Matrix(Matrix::Identity(q.rows(), q.cols()));
  const double f_anchor = slack_at(anchor);
  if ((c < 0.0) == (f_anchor < 0.0)) return q;  // no crossing
  double lo = 0.0, hi = 1.0;
  const bool lo_neg = c < 0.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    const Matrix qm = (1.0 - mid) * q + mid * anchor;
    if ((slack_at(qm) < 0.0) == lo_neg)
      lo = mid;
    else
      hi = mid;
  }
  const double t = 0.5 * (lo + hi);
  return (1.0 - t) * q + t * anchor;
}

// Cone-projected Lagrangian step: displacement clip01(q + gphi + b gcon) - q
// with the multiplier b chosen to minimize the displacement norm. At a
// corner optimum (an eigenvalue of Q pinned at 0 or 1 while the common-rate
// constraint is active) the clip absorbs the slack-matrix part of the
// stationarity condition, so this measure vanishes where a plain
// least-squares multiplier would leave a spurious residual.
struct ConeStep {
  double beta = 0.0;
  Matrix dir;
  double residual = 0.0;
};

inline ConeStep cone_step(const Matrix& q, const Matrix& gphi,
                          const Matrix& gcon) {
  const auto disp = [&](double b) {
    return Matrix(clip01(q + gphi + b * gcon) - q);
  };
  const double denom = gcon.squaredNorm();
  const double ls =
      denom > 0.0 ? std::max(0.0, -(gphi.cwiseProduct(gcon)).sum() / denom)
                  : 0.0;

  double lo = 0.0;
  double hi = std::max(1.0, 2.0 * ls + 1.0);
  while (disp(hi).norm() < disp(hi * 0.999).norm() && hi < 1e8) hi *= 4.0;

  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo);
  double x2 = lo + gr * (hi - lo);
  double f1 = disp(x1).norm();
  double f2 = disp(x2).norm();
  for (int i = 0; i < 60; ++i) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = disp(x1).norm();
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = disp(x2).norm();
    }
  }

  ConeStep best;
  best.beta = 0.5 * (lo + hi);
  best.dir = disp(best.beta);
  best.residual = best.dir.norm();
  for (double b : {ls, 0.0}) {
    const Matrix d = disp(b);
    if (d.norm() < best.residual) {
      best.beta = b;
      best.dir = d;
      best.residual = d.norm();
    }
  }
  return best;
}

// One rotational degree of freedom remains when an eigenvalue of Q is pinned
// at a bound while the common-rate constraint stays active. The projected
// iteration approaches such corners only geometrically, so this polish
// solves the corner manifold directly: for each eigenframe angle the free
// eigenvalue is pinned by slack = 0, and the angle is optimized by golden
// section. Only the rank-2 frame needs this (lower-dimensional corners are
// fully determined).
inline bool polish_corner(const WeightedEngine& eng, Matrix& q, double& phi) {
  if (q.rows() != 2) return false;
  const auto es = eigen_sym(q);
  const double lo_eig = es.eigenvalues()[0];
  const double hi_eig = es.eigenvalues()[1];
  const bool lower = lo_eig < 1e-5;
  const bool upper = hi_eig > 1.0 - 1e-5;
  if (lower == upper) return false;  // interior, or both bounds: nothing 1-D

  const double bound = lower ? 0.0 : 1.0;
  const Vector free_vec =
      lower ? es.eigenvectors().col(1) : es.eigenvectors().col(0);
  const double a0 = std::atan2(free_vec[1], free_vec[0]);

  const auto q_at = [&](double a, double x) {
    Vector u(2), w(2);
    u << std::cos(a), std::sin(a);
    w << -std::sin(a), std::cos(a);
    return Matrix(bound * w * w.transpose() + x * u * u.transpose());
  };
  // The slack is decreasing in the free eigenvalue; pin it at slack = 0.
  const auto theta_for = [&](double a) {
    double lo = 0.0, hi = 1.0;
    if (eng.eval(q_at(a, lo)).slack < 0.0) return -1.0;  // ray infeasible
    if (eng.eval(q_at(a, hi)).slack > 0.0) return 1.0;   // never binds
    for (int i = 0; i < 70; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (eng.eval(q_at(a, mid)).slack > 0.0)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  };
  const auto value = [&](double a) {
    const double x = theta_for(a);
    if (x < 0.0) return -std::numeric_limits<double>::infinity();
    return eng.eval(q_at(a, x)).phi;
  };

  double lo = a0 - 0.05, hi = a0 + 0.05;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo);
  double x2 = lo + gr * (hi - lo);
  double f1 = value(x1), f2 = value(x2);
  for (int i = 0; i < 80; ++i) {
    if (f1 > f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = value(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = value(x2);
    }
  }
  double a_best = 0.5 * (lo + hi);
  double x_best = theta_for(a_best);
  if (x_best < 0.0) return false;

  // Golden section on phi values bottoms out at the floating-point floor
  // (angle error ~1e-8); a secant iteration on the analytic tangential
  // derivative d phi / d a along the manifold finishes the job.
  const auto dphi_da = [&](double a, double x) {
    Vector u(2), w(2);
    u << std::cos(a), std::sin(a);
    w << -std::sin(a), std::cos(a);
    const Matrix t = (x - bound) * (u * w.transpose() + w * u.transpose());
    const Matrix uu = u * u.transpose();
    const auto g = eng.grads(q_at(a, x));
    const double dcon_dx = (g.con.cwiseProduct(uu)).sum();
    const double x_prime =
        dcon_dx != 0.0 ? -(g.con.cwiseProduct(t)).sum() / dcon_dx : 0.0;
    return (g.phi.cwiseProduct(t)).sum() +
           (g.phi.cwiseProduct(uu)).sum() * x_prime;
  };
  {
    double a1 = a_best, a2 = a_best + 1e-7;
    double x2 = theta_for(a2);
    if (x2 >= 0.0) {
      double h1 = dphi_da(a1, x_best);
      double h2 = dphi_da(a2, x2);
      for (int i = 0; i < 15 && h1 != h2; ++i) {
        const double a_next = a2 - h2 * (a2 - a1) / (h2 - h1);
        if (!std::isfinite(a_next) || std::abs(a_next - a2) > 0.01) break;
        const double x_next = theta_for(a_next);
        if (x_next < 0.0) break;
        a1 = a2;
        h1 = h2;
        a2 = a_next;
        h2 = dphi_da(a2, x_next);
        if (std::abs(a2 - a1) < 1e-15) break;
      }
      const double x_ref = theta_for(a2);
      if (x_ref >= 0.0 &&
          std::abs(dphi_da(a2, x_ref)) <= std::abs(dphi_da(a_best, x_best))) {
        a_best = a2;
        x_best = x_ref;
      }
    }
  }

  const double phi_best = eng.eval(q_at(a_best, x_best)).phi;
  if (phi_best < phi - 1e-9) return false;  // the corner is not optimal
  q = q_at(a_best, x_best);
  phi = std::max(phi, phi_best);
  return true;
}

// Newton steps on the active-set system
//   grad phi + beta grad slack = 0,  slack = 0
// for rank-2 frames with Q strictly inside the eigenvalue bounds and no
// min{.,.} tie. The first-order surface iteration gets within ~1e-6 of the
// optimum; a few damped Newton steps with a finite-difference Jacobian close
// the remaining gap to machine precision.
inline bool newton_kkt_polish(const WeightedEngine& eng, Matrix& q,
                              double& phi) {
  if (q.rows() != 2) return false;
  {
    const auto es = eigen_sym(q);
    if (es.eigenvalues().minCoeff() < 1e-7 ||
        es.eigenvalues().maxCoeff() > 1.0 - 1e-7)
      return false;  // eigenvalue bound active: handled by the corner polish
  }

  const auto g0 = eng.grads(q);
  const double denom0 = g0.con.squaredNorm();
  if (!(denom0 > 0.0)) return false;
  double beta = std::max(
      0.0, -(g0.phi.cwiseProduct(g0.con)).sum() / denom0);

  const auto pack = [](const Matrix& m, double b) {
    Eigen::Vector4d x;
    x << m(0, 0), m(0, 1), m(1, 1), b;
    return x;
  };
  const auto unpack_q = [](const Eigen::Vector4d& x) {
    Matrix m(2, 2);
    m << x[0], x[1], x[1], x[2];
    return m;
  };
  const auto residual = [&](const Eigen::Vector4d& x) {
    const auto g = eng.grads(unpack_q(x));
    const Matrix lag = g.phi + x[3] * g.con;
    Eigen::Vector4d r;
    r << lag(0, 0), lag(0, 1), lag(1, 1), g.at.slack;
    return r;
  };

  Eigen::Vector4d x = pack(q, beta);
  Eigen::Vector4d r = residual(x);
  for (int it = 0; it < 10 && r.norm() > 1e-13; ++it) {
    Eigen::Matrix4d jac;
    const double h = 1e-7;
    for (int j = 0; j < 4; ++j) {
      Eigen::Vector4d xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      jac.col(j) = (residual(xp) - residual(xm)) / (2.0 * h);
    }
    const Eigen::Vector4d step = jac.fullPivLu().solve(-r);
    if (!step.allFinite()) break;
    double damp = 1.0;
    bool moved = false;
    for (int half = 0; half < 12; ++half) {
      const Eigen::Vector4d xn = x + damp * step;
      const Matrix qn = unpack_q(xn);
      const auto es = eigen_sym(qn);
      if (es.eigenvalues().minCoeff() >= 0.0 &&
          es.eigenvalues().maxCoeff() <= 1.0 && xn[3] >= 0.0) {
        const Eigen::Vector4d rn = residual(xn);
        if (rn.norm() < r.norm()) {
          x = xn;
          r = rn;
          moved = true;
          break;
        }
      }
      damp *= 0.5;
    }
    if (!moved) break;
  }

  const Matrix q_new = unpack_q(x);
  const double phi_new = eng.eval(q_new).phi;
  if (r.norm() > 1e-10 || phi_new < phi - 1e-9) return false;
  q = q_new;
  phi = std::max(phi, phi_new);
  return true;
}

// Refinement on the active surface min{r0y, r0z} = r0*: cone-projected
// gradient steps, every iterate reprojected back onto the surface, with a
// corner polish when the iterates pile up against an eigenvalue bound.
inline StageResult refine_active(const WeightedEngine& eng, Matrix q,
                                 int max_iters, double tol,
                                 const SolverConfig& cfg) {
  q = reproject_active(eng, q);
  StageResult out;
  out.q = q;
  double cur = eng.eval(q).phi;

  for (int round = 0; round < 3; ++round) {
    double step = std::min(1.0, cfg.step_init);
    int stalls = 0;
    for (int it = 0; it < max_iters; ++it) {
      const auto g = eng.grads(q);
      const ConeStep cs = cone_step(q, g.phi, g.con);
      out.grad_residual = cs.residual;
      if (out.grad_residual <= tol) {
        out.tol_reached = true;
        break;
      }
      bool accepted = false;
      while (step > 1e-18) {
        // q + step*dir stays inside the interval (convex combination).
        const Matrix qn = reproject_active(eng, q + step * cs.dir);
        const double next = eng.eval(qn).phi;
        const double model = (cs.dir.cwiseProduct(qn - q)).sum();
        if (next >= cur + cfg.armijo_c * std::max(0.0, model) - 1e-16) {
          stalls = ((qn - q).norm() <= 1e-17) ? stalls + 1 : 0;
          q = qn;
          cur = std::max(cur, next);
          accepted = true;
          break;
        }
        step *= cfg.armijo_shrink;
      }
      if (!accepted || stalls >= 5) break;
      step = std::min(1.0, step * 2.0);  // recover after backtracking
    }
    if (out.tol_reached) break;
    if (!polish_corner(eng, q, cur)) break;
    const auto g = eng.grads(q);
    out.grad_residual = cone_step(q, g.phi, g.con).residual;
    out.tol_reached = out.grad_residual <= tol;
    if (out.tol_reached) break;
  }

  if (!out.tol_reached && newton_kkt_polish(eng, q, cur)) {
    const auto g = eng.grads(q);
    out.grad_residual = cone_step(q, g.phi, g.con).residual;
    out.tol_reached = out.grad_residual <= tol;
  }
  out.q = q;
  return out;
}

struct WeightedSolve {
  Matrix k;
  double phi = -std::numeric_limits<double>::infinity();
  double grad_norm = std::numeric_limits<double>::infinity();
  double slack = 0.0;
  bool converged = false;
};

inline WeightedSolve solve_weighted(const AlignedChannel& ch,
                                    const PsdMatrix& s, double mu_p,
                                    double mu_s_eff, double r0_star,
                                    const SolverConfig& cfg) {
  const bool constrained = r0_star > 1e-12;
  WeightedEngine eng(ch, s, mu_p, mu_s_eff, r0_star);
  const Eigen::Index r = eng.rank();
  const Eigen::Index n = ch.dim();

  WeightedSolve best;
  if (r == 0) {
    const auto e = eng.eval(Matrix::Zero(0, 0));
    best.k = Matrix::Zero(n, n);
    best.phi = e.phi;
    best.slack = e.slack;
    best.grad_norm = 0.0;
    best.converged = true;
    return best;
  }

  std::vector<Matrix> starts;
  starts.push_back(Matrix::Zero(r, r));
  starts.push_back(Matrix::Identity(r, r));
  starts.push_back(0.5 * Matrix::Identity(r, r));
  Rng rng(cfg.seed);
  while (static_cast<int>(starts.size()) < cfg.restarts) {
    const Matrix rot = random_orthogonal(rng, r);
    Vector d(r);
    for (Eigen::Index i = 0; i < r; ++i) d[i] = rng.uniform(0.05, 0.95);
    starts.push_back(symmetrize(rot * d.asDiagonal() * rot.transpose()));
  }
  starts.resize(cfg.restarts);

  for (const Matrix& start : starts) {
    Matrix q = start;
    bool tol_reached = false;
    double grad_res = std::numeric_limits<double>::infinity();

    if (constrained) {
      // Keep the start strictly feasible for the barrier; q = 0 always is.
      for (int i = 0; i < 200 && eng.eval(q).slack <= 1e-12; ++i) q *= 0.5;
      if (eng.eval(q).slack <= 1e-12) q = Matrix::Zero(r, r);
      for (double w : cfg.barrier_weights) {
        const auto stage =
            ascend(eng, q, w, false, cfg.max_iters, cfg.tol_grad, cfg);
        q = stage.q;
        tol_reached = stage.tol_reached;
        grad_res = stage.grad_residual;
      }
    } else {
      const auto stage =
          ascend(eng, q, -1.0, false, cfg.max_iters, cfg.tol_grad, cfg);
      q = stage.q;
      tol_reached = stage.tol_reached;
      grad_res = stage.grad_residual;
    }

    if (cfg.refine) {
      // The refinement aims far below the sweep tolerance; a run that gets
      // at least to tol_grad still counts as converged.
      StageResult stage;
      if (!constrained) {
        stage = ascend(eng, q, -1.0, false, cfg.refine_iters, cfg.refine_tol,
                       cfg);
      } else {
        // Whether the common-rate constraint binds at the optimum is not
        // known here, so polish both ways: an interior ascent that must not
        // cross the constraint, and an ascent along the active surface. The
        // stationary surface point is preferred unless the interior one is
        // genuinely better; an interior creep that merely hugs the surface
        // gets re-polished on it.
        const auto free_stage = ascend(eng, q, -1.0, true, cfg.refine_iters,
                                       cfg.refine_tol, cfg);
        const auto active_stage =
            refine_active(eng, q, cfg.refine_iters, cfg.refine_tol, cfg);
        const auto free_eval = eng.eval(free_stage.q);
        const double phi_active = eng.eval(active_stage.q).phi;
        if (free_eval.slack < -1e-9 || phi_active >= free_eval.phi - 1e-8) {
          stage = active_stage;
        } else if (free_eval.slack < 1e-5) {
          const auto again = refine_active(eng, free_stage.q, cfg.refine_iters,
                                           cfg.refine_tol, cfg);
          stage = (eng.eval(again.q).phi >= free_eval.phi - 1e-8) ? again
                                                                  : free_stage;
        } else {
          stage = free_stage;
        }
      }
      q = stage.q;
      tol_reached = stage.tol_reached || stage.grad_residual <= cfg.tol_grad;
      grad_res = stage.grad_residual;
    }

    const auto e = eng.eval(q);
    if (e.slack < -1e-9) continue;  // infeasible run
    if (e.phi > best.phi) {
      best.phi = e.phi;
      best.k = eng.frame().to_ambient(clip01(q));
      best.slack = e.slack;
      best.grad_norm = grad_res;
      best.converged = tol_reached;
    }
  }

  if (!std::isfinite(best.phi)) {
    // Every restart ended infeasible; fall back to K = 0.
    const auto e = eng.eval(Matrix::Zero(r, r));
    best.k = Matrix::Zero(n, n);
    best.phi = e.phi;
    best.slack = e.slack;
    best.grad_norm = 0.0;
    best.converged = false;
  }
  return best;
}

}  // namespace detail

/// Secrecy capacity C_S(S) = max_{0<=K<=S} R_s(K) for an aligned channel,
/// clamped at zero. Multi-start projected gradient ascent; the best iterate
/// is returned even when the gradient tolerance was not met.
inline SecrecyResult secrecy_capacity(const AlignedChannel& ch,
                                      const PsdMatrix& s,
                                      const SolverConfig& cfg = {}) {
  cfg.validate();
  const auto sol = detail::solve_weighted(ch, s, 0.0, 1.0, 0.0, cfg);
  SecrecyResult out;
  out.converged = sol.converged;
  out.grad_norm = sol.grad_norm;
  if (sol.phi <= 0.0) {
    out.value = 0.0;
    out.k_star = PsdMatrix::zero(ch.dim());
  } else {
    out.value = sol.phi;
    out.k_star = PsdMatrix(symmetrize(sol.k));
  }
  return out;
}

/// Boundary problem for a fixed feasible common rate r0_star and weights
/// (mu_p, mu_s): maximize mu_p R_p + mu_s R_s over the region slice, with
/// R_p eliminated through R_p* = R_p(K) + min{R_0Y, R_0Z} - R_0*. The
/// constraint min{R_0Y, R_0Z} >= r0_star is enforced by a logarithmic
/// barrier with decreasing weights, followed by a refinement that lands on
/// the active surface when the constraint binds. mu_s <= mu_p runs the same
/// machinery with the effective objective mu_p (R_p + R_s).
inline BoundaryPoint maximize_weighted(const AlignedChannel& ch,
                                       const PsdMatrix& s, double r0_star,
                                       double mu_p, double mu_s,
                                       const SolverConfig& cfg = {}) {
  cfg.validate();
  if (mu_p < 0.0 || mu_s < 0.0) throw Error("weights must be nonnegative");
  const auto caps = single_user_capacities(ch, s);
  const double c_min = std::min(caps.c_y, caps.c_z);
  const double edge = 1e-12 * std::max(1.0, c_min);
  if (r0_star < 0.0 || r0_star > c_min + edge)
    throw InfeasibleR0("r0_star outside [0, min{C_Y(S), C_Z(S)}]");

  BoundaryPoint pt;
  pt.r0_star = r0_star;
  pt.mu_p = mu_p;
  pt.mu_s = mu_s;
  pt.s_used = s;

  const auto finish = [&](const Matrix& k, bool converged, double grad_norm) {
    pt.k_opt = PsdMatrix(symmetrize(k));
    pt.functionals = gaussian_region_rates(pt.k_opt, s, ch);
    pt.constraint_slack = pt.functionals.min_r0() - r0_star;
    if (mu_s > mu_p) {
      pt.rs = std::max(0.0, pt.functionals.rs);
      pt.rp = std::max(
          0.0, pt.functionals.rp + pt.functionals.min_r0() - r0_star);
    } else {
      pt.rs = 0.0;
      pt.rp = std::max(0.0, pt.functionals.rs + pt.functionals.rp +
                                pt.functionals.min_r0() - r0_star);
    }
    pt.objective = mu_p * pt.rp + mu_s * pt.rs;
    pt.converged = converged;
    pt.grad_norm = grad_norm;
  };

  const Eigen::Index n = ch.dim();
  if ((mu_p == 0.0 && mu_s == 0.0) || r0_star >= c_min - edge) {
    // Zero objective, or the common rate exhausts the budget; K = 0 is the
    // canonical feasible point.
    finish(Matrix::Zero(n, n), true, 0.0);
    return pt;
  }

  const double mu_s_eff = std::max(mu_s, mu_p);
  const auto sol = detail::solve_weighted(ch, s, mu_p, mu_s_eff, r0_star, cfg);
  finish(sol.k, sol.converged, sol.grad_norm);
  return pt;
}

/// Weight pair for the boundary sweep.
struct WeightCell {
  double mu_p = 0.0;
  double mu_s = 1.0;
};

/// Candidate input covariance shapes for an average power budget: the full
/// trace is always spent since the region grows with S. Exact for t = 1; a
/// coarse eigenvalue-split and rotation family for t = 2; isotropic fallback
/// beyond.
inline std::vector<PsdMatrix> power_constraint_shapes(Eigen::Index t,
                                                      double p) {
  std::vector<PsdMatrix> shapes;
  if (p <= 0.0) {
    shapes.push_back(PsdMatrix::zero(t));
    return shapes;
  }
  if (t == 1) {
    shapes.push_back(PsdMatrix(Matrix::Constant(1, 1, p)));
    return shapes;
  }
  if (t == 2) {
    const double pi = 3.14159265358979323846;
    for (int i = 0; i <= 8; ++i) {
      const double x = p * i / 16.0;  // from (0, p) up to the balanced split
      for (int ja = 0; ja < 6; ++ja) {
        const double a = ja * pi / 6.0;
        Matrix rot(2, 2);
        rot << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
        Vector d(2);
        d << x, p - x;
        shapes.push_back(
            PsdMatrix(symmetrize(rot * d.asDiagonal() * rot.transpose())));
        if (i == 8) break;  // isotropic split is rotation invariant
      }
    }
    return shapes;
  }
  shapes.push_back(PsdMatrix(Matrix::Identity(t, t) * (p / double(t))));
  return shapes;
}

/// Sweeps the region boundary over a grid of common-rate fractions and
/// weight pairs. General channels are squared and aligned first and each
/// point carries the equivocation gap of the reduction; power-constrained
/// sweeps search a small family of input-covariance shapes with tr(S) = P.
/// r0_grid entries are fractions of min{C_Y(S), C_Z(S)}. Output is sorted by
/// (r0_star, mu_s / mu_p).
inline std::vector<BoundaryPoint> trace_boundary(
    const WiretapChannel& ch, const InputConstraint& constraint,
    const std::vector<double>& r0_grid, const std::vector<WeightCell>& weights,
    const SolverConfig& cfg = {}, double alpha = defaults::alpha,
    int jobs = 1) {
  cfg.validate();
  if (r0_grid.empty() || weights.empty()) throw Error("sweep grids are empty");
  for (double f : r0_grid)
    if (f < 0.0 || f > 1.0)
      throw InfeasibleR0("r0 fractions must lie in [0, 1]");

  // The pad noise is scaled by alpha^2 so the aligned channel keeps the
  // padded directions ~1e8 times noisier than the data without blowing the
  // conditioning past double precision; the unaligned log-det ratios cancel
  // the pad block exactly at any level.
  const WiretapChannel square =
      ch.square() ? ch
                  : square_augment(ch, defaults::big_noise * alpha * alpha);
  const bool aligned_already = square.identity_gains();
  const AlignedChannel aligned =
      aligned_already ? as_aligned(square) : align(square, alpha);

  std::vector<PsdMatrix> shapes;
  if (constraint.kind() == InputConstraint::Kind::Covariance) {
    if (constraint.s().dim() != square.t())
      throw DimensionMismatch("S does not match the channel input dimension");
    shapes.push_back(constraint.s());
  } else {
    shapes = power_constraint_shapes(square.t(), constraint.p());
  }

  struct Cell {
    double frac;
    WeightCell w;
  };
  std::vector<Cell> cells;
  cells.reserve(r0_grid.size() * weights.size());
  for (double f : r0_grid)
    for (const auto& w : weights) cells.push_back({f, w});

  const auto solve_cell = [&](const Cell& cell) {
    BoundaryPoint best;
    bool have = false;
    for (const auto& s : shapes) {
      const auto caps = single_user_capacities(aligned, s);
      const double r0_star = cell.frac * std::min(caps.c_y, caps.c_z);
      BoundaryPoint pt =
          maximize_weighted(aligned, s, r0_star, cell.w.mu_p, cell.w.mu_s, cfg);
      pt.gap = aligned_already ? 0.0 : equivocation_gap(square, s, alpha);
      if (!have || pt.objective > best.objective) {
        best = std::move(pt);
        have = true;
      }
    }
    return best;
  };

  std::vector<BoundaryPoint> points(cells.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < cells.size(); ++i)
      points[i] = solve_cell(cells[i]);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= cells.size()) return;
        points[i] = solve_cell(cells[i]);
      }
    };
    std::vector<std::future<void>> pool;
    pool.reserve(jobs);
    for (int j = 0; j < jobs; ++j)
      pool.push_back(std::async(std::launch::async, worker));
    for (auto& f : pool) f.get();
  }

  const auto ratio = [](const BoundaryPoint& p) {
    if (p.mu_p > 0.0) return p.mu_s / p.mu_p;
    return p.mu_s > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  };
  std::stable_sort(points.begin(), points.end(),
                   [&](const BoundaryPoint& a, const BoundaryPoint& b) {
                     if (a.r0_star != b.r0_star) return a.r0_star < b.r0_star;
                     if (ratio(a) != ratio(b)) return ratio(a) < ratio(b);
                     if (a.mu_p != b.mu_p) return a.mu_p < b.mu_p;
                     return a.mu_s < b.mu_s;
                   });
  return points;
}

}  // namespace wiretap
