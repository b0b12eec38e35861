#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "wiretap/linalg.hpp"
#include "wiretap/oracle.hpp"
#include "wiretap/rates.hpp"
#include "wiretap/sampling.hpp"
#include "wiretap/solver.hpp"

namespace wiretap {

struct MembershipConfig {
  double tol = tol::membership;
  int candidate_samples = 24;
  int descents = 6;
  int descent_iters = 400;
  std::uint64_t seed = 0xC0FFEEu;
  bool oracle_fallback = true;
  GridSpec oracle_grid{48, 36, 2, 2, 24};
  SolverConfig solver;
};

/// Outcome of a membership query. Inside carries a witness K at which every
/// region inequality holds; Boundary means the best K satisfies them only
/// within the membership tolerance; Outside reports the smallest maximal
/// violation found. `exhaustive` records whether the grid fallback ran, so
/// an Outside verdict without it is best-effort.
struct MembershipResult {
  enum class Location { Inside, Boundary, Outside };

  Location location = Location::Outside;
  double margin = std::numeric_limits<double>::infinity();
  std::optional<PsdMatrix> witness;
  bool exhaustive = false;

  bool inside() const { return location != Location::Outside; }
};

namespace detail {

// Max violation of the three region inequalities at K for the target rates
// (sum_rate = r0 + r1 for the equivocation description, r0 + rp + rs for the
// public one; secret = re or rs).
template <ChannelLike C>
double membership_violation(const Matrix& k, const C& ch, double r0,
                            double sum_rate, double secret, double c_y,
                            double c_z) {
  const double ly = info_y(ch, k);
  const double lz = info_z(ch, k);
  const double m = std::min(c_y - ly, c_z - lz);
  const double v1 = secret - (ly - lz);
  const double v2 = sum_rate - (ly + m);
  const double v3 = r0 - m;
  return std::max({v1, v2, v3});
}

template <ChannelLike C>
Matrix membership_subgradient(const Matrix& k, const C& ch, double r0,
                              double sum_rate, double secret, double c_y,
                              double c_z) {
  const double ly = info_y(ch, k);
  const double lz = info_z(ch, k);
  const Matrix gy = info_y_grad(ch, k);
  const Matrix gz = info_z_grad(ch, k);
  const double r0y = c_y - ly;
  const double r0z = c_z - lz;
  Matrix gmin;
  if (r0y < r0z - tol::tie)
    gmin = -gy;
  else if (r0z < r0y - tol::tie)
    gmin = -gz;
  else
    gmin = -0.5 * (gy + gz);

  const double m = std::min(r0y, r0z);
  const double v1 = secret - (ly - lz);
  const double v2 = sum_rate - (ly + m);
  const double v3 = r0 - m;
  const double v = std::max({v1, v2, v3});

  Matrix g = Matrix::Zero(k.rows(), k.cols());
  int active = 0;
  if (v - v1 <= tol::tie) {
    g += -(gy - gz);
    ++active;
  }
  if (v - v2 <= tol::tie) {
    g += -(gy + gmin);
    ++active;
  }
  if (v - v3 <= tol::tie) {
    g += -gmin;
    ++active;
  }
  return g / std::max(1, active);
}

template <ChannelLike C>
MembershipResult search_witness(const C& ch, const PsdMatrix& s, double r0,
                                double sum_rate, double secret,
                                const MembershipConfig& cfg) {
  const auto caps = single_user_capacities(ch, s);
  const auto violation = [&](const Matrix& k) {
    return membership_violation(k, ch, r0, sum_rate, secret, caps.c_y,
                                caps.c_z);
  };

  const IntervalFrame frame = interval_frame(s);
  const Eigen::Index n = s.dim();
  const Eigen::Index r = frame.rank;

  double best_v = std::numeric_limits<double>::infinity();
  Matrix best_k = Matrix::Zero(n, n);
  const auto consider = [&](const Matrix& k) {
    const double v = violation(k);
    if (v < best_v) {
      best_v = v;
      best_k = k;
    }
  };

  consider(Matrix::Zero(n, n));
  consider(s.mat());
  consider(0.5 * s.mat());

  // Boundary-solver candidates: the secrecy maximizer and weighted boundary
  // points at the target common rate. Witness hunting only needs rough
  // optima, so the solver budget is trimmed.
  if constexpr (std::same_as<C, AlignedChannel>) {
    SolverConfig scfg = cfg.solver;
    scfg.refine = false;
    scfg.restarts = 4;
    scfg.max_iters = 400;
    scfg.tol_grad = 1e-6;
    consider(secrecy_capacity(ch, s, scfg).k_star.mat());
    const double c_min = std::min(caps.c_y, caps.c_z);
    if (r0 <= c_min) {
      for (const auto& [mp, ms] : {std::pair{0.0, 1.0}, std::pair{1.0, 2.0},
                                   std::pair{1.0, 0.5}}) {
        consider(maximize_weighted(ch, s, r0, mp, ms, scfg).k_opt.mat());
      }
    }
  }

  Rng rng(cfg.seed);
  std::vector<Matrix> descent_starts;
  descent_starts.push_back(best_k);
  for (int i = 0; i < cfg.candidate_samples; ++i) {
    const Matrix k = random_interval_point(rng, s).mat();
    consider(k);
    if (static_cast<int>(descent_starts.size()) < cfg.descents)
      descent_starts.push_back(k);
  }

  // Projected subgradient descent on the max violation, in frame coords.
  if (r > 0) {
    for (const Matrix& start : descent_starts) {
      Matrix q = frame.to_frame(start);
      double cur = violation(frame.to_ambient(q));
      for (int it = 0; it < cfg.descent_iters; ++it) {
        const Matrix k = frame.to_ambient(q);
        const Matrix g_k = membership_subgradient(k, ch, r0, sum_rate, secret,
                                                  caps.c_y, caps.c_z);
        const Matrix g = frame.f.transpose() * g_k * frame.f;
        double step = 1.0;
        bool accepted = false;
        while (step > 1e-14) {
          const Matrix qn = clip_eigenvalues(q - step * g, 0.0, 1.0);
          const double vn = violation(frame.to_ambient(qn));
          if (vn < cur - 1e-16) {
            q = qn;
            cur = vn;
            accepted = true;
            break;
          }
          step *= 0.5;
        }
        if (!accepted) break;
      }
      consider(frame.to_ambient(q));
    }
  }

  MembershipResult res;
  if (cfg.oracle_fallback && n <= cfg.oracle_grid.max_dim &&
      best_v > -cfg.tol) {
    const auto grid_res = grid_search_fn(
        s, [&](const Matrix& k) { return -violation(k); }, cfg.oracle_grid);
    if (grid_res.feasible_found) consider(grid_res.k.mat());
    res.exhaustive = true;
  }

  res.margin = best_v;
  if (best_v <= 1e-11) {
    res.location = MembershipResult::Location::Inside;
    res.witness = PsdMatrix(symmetrize(best_k));
  } else if (best_v <= cfg.tol) {
    res.location = MembershipResult::Location::Boundary;
    res.witness = PsdMatrix(symmetrize(best_k));
  } else {
    res.location = MembershipResult::Location::Outside;
  }
  return res;
}

}  // namespace detail

/// Does the capacity-equivocation region over {0 <= K <= S} contain the
/// triple? Searches for a witness K satisfying
///   re <= R_s(K),  r0 + r1 <= I_Y(K) + min{R_0Y, R_0Z},
///   r0 <= min{R_0Y, R_0Z}.
template <ChannelLike C>
MembershipResult region_contains(const RateTriple& triple, const C& ch,
                                 const PsdMatrix& s,
                                 const MembershipConfig& cfg = {}) {
  triple.validate();
  return detail::search_witness(ch, s, triple.r0, triple.r0 + triple.r1,
                                triple.re, cfg);
}

/// Public-message variant: rs <= R_s(K), r0 + rp + rs <= I_Y(K) + min{.},
/// r0 <= min{.}.
template <ChannelLike C>
MembershipResult region_contains(const PublicRateTriple& triple, const C& ch,
                                 const PsdMatrix& s,
                                 const MembershipConfig& cfg = {}) {
  triple.validate();
  return detail::search_witness(ch, s, triple.r0,
                                triple.r0 + triple.rp + triple.rs, triple.rs,
                                cfg);
}

}  // namespace wiretap
