#include <catch2/catch.hpp>

#include "wiretap/oracle.hpp"
#include "wiretap/sampling.hpp"
#include "wiretap/solver.hpp"

using namespace wiretap;

namespace {

AlignedChannel scalar_channel(double sy2, double sz2) {
  AlignedChannel ch;
  ch.sigma_y_eff = PsdMatrix(Matrix::Constant(1, 1, sy2));
  ch.sigma_z_eff = PsdMatrix(Matrix::Constant(1, 1, sz2));
  return ch;
}

AlignedChannel random_aligned(Rng& rng, Eigen::Index n) {
  AlignedChannel ch;
  ch.sigma_y_eff = random_psd(rng, n, 0.6, 2.5);
  ch.sigma_z_eff = random_psd(rng, n, 0.6, 2.5);
  return ch;
}

GridSpec test_grid() {
  GridSpec g;
  g.theta_resolution = 120;
  g.angle_resolution = 90;
  g.refine_passes = 2;
  g.refine_resolution = 60;
  return g;
}

}  // namespace

TEST_CASE("secrecy capacity: scalar ground truth") {
  const AlignedChannel ch = scalar_channel(1.0, 2.0);
  const auto res = secrecy_capacity(ch, PsdMatrix::identity(1));
  CHECK(res.value == Approx(0.5 * std::log(4.0 / 3.0)).margin(1e-9));
  CHECK(res.k_star.mat()(0, 0) == Approx(1.0).margin(1e-9));
  CHECK(res.converged);
}

TEST_CASE("secrecy capacity vanishes for identical covariances") {
  Rng rng(3);
  AlignedChannel ch;
  ch.sigma_y_eff = random_psd(rng, 2, 0.5, 2.0);
  ch.sigma_z_eff = ch.sigma_y_eff;
  const auto res = secrecy_capacity(ch, random_psd(rng, 2, 0.5, 1.5));
  CHECK(res.value == 0.0);
  CHECK(max_abs(res.k_star.mat()) == 0.0);
}

TEST_CASE("secrecy capacity vanishes for degraded channels") {
  Rng rng(5);
  AlignedChannel ch;
  ch.sigma_z_eff = random_psd(rng, 2, 0.5, 1.5);
  ch.sigma_y_eff =
      PsdMatrix(ch.sigma_z_eff.mat() + random_psd(rng, 2, 0.2, 1.0).mat());
  const PsdMatrix s = random_psd(rng, 2, 0.3, 1.5);
  const auto res = secrecy_capacity(ch, s);
  CHECK(res.value == 0.0);
  CHECK(max_abs(res.k_star.mat()) == 0.0);
  // Independent confirmation: the grid oracle also stays nonpositive.
  const auto oracle =
      grid_search(ch, s, OracleObjective::secrecy(), test_grid());
  CHECK(oracle.value <= 1e-12);
}

TEST_CASE("secrecy capacity is monotone in S") {
  Rng rng(7);
  for (int rep = 0; rep < 4; ++rep) {
    const AlignedChannel ch = random_aligned(rng, 2);
    const PsdMatrix s1 = random_psd(rng, 2, 0.2, 1.2);
    const PsdMatrix s2(s1.mat() + random_psd(rng, 2, 0.1, 1.0).mat());
    const double v1 = secrecy_capacity(ch, s1).value;
    const double v2 = secrecy_capacity(ch, s2).value;
    CHECK(v1 <= v2 + 1e-9);
  }
}

TEST_CASE("secrecy capacity matches the oracle on 2x2 instances") {
  Rng rng(9);
  for (int rep = 0; rep < 4; ++rep) {
    const AlignedChannel ch = random_aligned(rng, 2);
    const PsdMatrix s = random_psd(rng, 2, 0.4, 2.0);
    const double solver_v = secrecy_capacity(ch, s).value;
    const double oracle_v = std::max(
        0.0,
        grid_search(ch, s, OracleObjective::secrecy(), test_grid()).value);
    CHECK(solver_v == Approx(oracle_v).margin(tol::oracle));
  }
}

TEST_CASE("maximize_weighted trivial cells") {
  const AlignedChannel ch = scalar_channel(1.0, 2.0);
  const PsdMatrix s = PsdMatrix::identity(1);

  const BoundaryPoint zero = maximize_weighted(ch, s, 0.0, 0.0, 0.0);
  CHECK(zero.objective == 0.0);
  CHECK(max_abs(zero.k_opt.mat()) == 0.0);

  // r0* = 0, (mu_p, mu_s) = (0, 1): the secrecy capacity cell.
  const BoundaryPoint cs = maximize_weighted(ch, s, 0.0, 0.0, 1.0);
  CHECK(cs.objective == Approx(0.5 * std::log(4.0 / 3.0)).margin(1e-9));
  CHECK(cs.rs == Approx(0.5 * std::log(4.0 / 3.0)).margin(1e-9));
}

TEST_CASE("maximize_weighted rejects infeasible common rates") {
  const AlignedChannel ch = scalar_channel(1.0, 2.0);
  const PsdMatrix s = PsdMatrix::identity(1);
  // min{C_Y, C_Z} = (1/2) ln(3/2)
  CHECK_THROWS_AS(maximize_weighted(ch, s, 0.5, 1.0, 1.0), InfeasibleR0);
  CHECK_THROWS_AS(maximize_weighted(ch, s, -0.1, 1.0, 1.0), InfeasibleR0);
}

TEST_CASE("maximize_weighted matches the scalar oracle") {
  const AlignedChannel ch = scalar_channel(1.0, 2.0);
  const PsdMatrix s = PsdMatrix::identity(1);
  GridSpec grid;
  grid.theta_resolution = 100000;
  grid.refine_passes = 1;
  grid.refine_resolution = 1000;

  for (const auto& [r0, mp, ms] :
       {std::tuple{0.0, 1.0, 2.0}, std::tuple{0.1, 1.0, 2.0},
        std::tuple{0.15, 0.5, 3.0}, std::tuple{0.1, 2.0, 1.0}}) {
    const BoundaryPoint pt = maximize_weighted(ch, s, r0, mp, ms);
    const auto oracle =
        grid_search(ch, s, OracleObjective::weighted(mp, ms, r0), grid);
    REQUIRE(oracle.feasible_found);
    CHECK(pt.objective == Approx(oracle.value).margin(tol::oracle));
  }
}

TEST_CASE("boundary point invariants") {
  Rng rng(11);
  for (int rep = 0; rep < 6; ++rep) {
    const AlignedChannel ch = random_aligned(rng, 2);
    const PsdMatrix s = random_psd(rng, 2, 0.4, 1.8);
    const auto caps = single_user_capacities(ch, s);
    const double r0 = rng.uniform(0.0, 0.9) * std::min(caps.c_y, caps.c_z);
    const double mp = rng.uniform(0.0, 2.0);
    const double ms = rng.uniform(0.0, 3.0);
    const BoundaryPoint pt = maximize_weighted(ch, s, r0, mp, ms);

    CHECK(loewner_leq(Matrix::Zero(2, 2), pt.k_opt.mat()));
    CHECK(loewner_leq(pt.k_opt.mat(), s.mat()));
    CHECK(pt.mu_p * pt.rp + pt.mu_s * pt.rs ==
          Approx(pt.objective).margin(1e-9));
    CHECK(pt.constraint_slack >= -1e-9);
    CHECK(pt.rs >= 0.0);
    CHECK(pt.rp >= 0.0);
  }
}

TEST_CASE("g(r0) is nonincreasing in r0 for fixed weights") {
  Rng rng(13);
  const AlignedChannel ch = random_aligned(rng, 2);
  const PsdMatrix s = random_psd(rng, 2, 0.4, 1.8);
  const auto caps = single_user_capacities(ch, s);
  const double c_min = std::min(caps.c_y, caps.c_z);

  double prev = std::numeric_limits<double>::infinity();
  for (double frac : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const BoundaryPoint pt = maximize_weighted(ch, s, frac * c_min, 1.0, 2.0);
    CHECK(pt.objective <= prev + 1e-8);
    prev = pt.objective;
  }
}

TEST_CASE("solver agrees with oracle on random 2x2 weighted cells") {
  Rng rng(15);
  for (int rep = 0; rep < 3; ++rep) {
    const AlignedChannel ch = random_aligned(rng, 2);
    const PsdMatrix s = random_psd(rng, 2, 0.4, 1.8);
    const auto caps = single_user_capacities(ch, s);
    const double c_min = std::min(caps.c_y, caps.c_z);
    for (const auto& [frac, mp, ms] :
         {std::tuple{0.0, 0.0, 1.0}, std::tuple{0.5, 1.0, 2.0},
          std::tuple{0.8, 1.0, 0.5}}) {
      const BoundaryPoint pt = maximize_weighted(ch, s, frac * c_min, mp, ms);
      const auto oracle = grid_search(
          ch, s, OracleObjective::weighted(mp, ms, frac * c_min), test_grid());
      REQUIRE(oracle.feasible_found);
      CHECK(pt.objective == Approx(oracle.value).margin(tol::oracle));
    }
  }
}

TEST_CASE("project_interval") {
  Rng rng(17);
  const PsdMatrix s = random_psd(rng, 2, 0.5, 2.0);

  const PsdMatrix inside = random_interval_point(rng, s);
  CHECK(max_abs(project_interval(inside.mat(), s).mat() - inside.mat()) <
        1e-10);

  CHECK(max_abs(project_interval(2.0 * s.mat(), s).mat() - s.mat()) < 1e-10);
  CHECK(max_abs(project_interval(-s.mat(), s).mat()) < 1e-10);

  // Idempotence on arbitrary symmetric input.
  const Matrix raw = symmetrize(random_gaussian(rng, 2, 2)) * 3.0;
  const PsdMatrix once = project_interval(raw, s);
  const PsdMatrix twice = project_interval(once.mat(), s);
  CHECK(max_abs(once.mat() - twice.mat()) < 1e-10);
  CHECK(loewner_leq(Matrix::Zero(2, 2), once.mat()));
  CHECK(loewner_leq(once.mat(), s.mat()));
}

TEST_CASE("trace_boundary single cell reproduces the secrecy capacity") {
  WiretapChannel ch;
  ch.h_y = Matrix::Identity(1, 1);
  ch.h_z = Matrix::Identity(1, 1);
  ch.sigma_y = PsdMatrix::identity(1);
  ch.sigma_z = PsdMatrix(Matrix::Constant(1, 1, 2.0));

  const auto pts = trace_boundary(
      ch, InputConstraint::covariance(PsdMatrix::identity(1)), {0.0},
      {WeightCell{0.0, 1.0}});
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].objective == Approx(0.5 * std::log(4.0 / 3.0)).margin(1e-8));
  CHECK(pts[0].gap == 0.0);
}

TEST_CASE("trace_boundary: identical covariances give zero secret rate") {
  Rng rng(19);
  WiretapChannel ch;
  ch.h_y = Matrix::Identity(2, 2);
  ch.h_z = Matrix::Identity(2, 2);
  ch.sigma_y = random_psd(rng, 2, 0.5, 2.0);
  ch.sigma_z = ch.sigma_y;

  const auto pts = trace_boundary(
      ch, InputConstraint::covariance(random_psd(rng, 2, 0.5, 1.5)),
      {0.0, 0.5}, {WeightCell{0.0, 1.0}, WeightCell{1.0, 2.0}});
  for (const auto& p : pts) CHECK(p.rs <= 1e-9);
}

TEST_CASE("trace_boundary scalar sweep matches the oracle cellwise") {
  WiretapChannel ch;
  ch.h_y = Matrix::Identity(1, 1);
  ch.h_z = Matrix::Identity(1, 1);
  ch.sigma_y = PsdMatrix::identity(1);
  ch.sigma_z = PsdMatrix(Matrix::Constant(1, 1, 2.0));
  const PsdMatrix s = PsdMatrix::identity(1);
  const AlignedChannel al = as_aligned(ch);
  const auto caps = single_user_capacities(al, s);
  const double c_min = std::min(caps.c_y, caps.c_z);

  const std::vector<double> r0_grid{0.0, 0.2, 0.4, 0.6, 0.8};
  const std::vector<WeightCell> weights{{0.0, 1.0}, {1.0, 2.0}, {2.0, 1.0}};
  const auto pts =
      trace_boundary(ch, InputConstraint::covariance(s), r0_grid, weights);
  REQUIRE(pts.size() == 15);

  GridSpec grid;
  grid.theta_resolution = 100000;
  grid.refine_passes = 0;
  for (const auto& p : pts) {
    const auto oracle = grid_search(
        al, s, OracleObjective::weighted(p.mu_p, p.mu_s, p.r0_star), grid);
    REQUIRE(oracle.feasible_found);
    CHECK(p.objective == Approx(oracle.value).margin(tol::oracle));
    CHECK(p.r0_star <= c_min + 1e-12);
  }

  // Sorted by (r0, mu_s / mu_p).
  for (std::size_t i = 1; i < pts.size(); ++i)
    CHECK(pts[i - 1].r0_star <= pts[i].r0_star + 1e-15);
}

TEST_CASE("trace_boundary under a power constraint") {
  WiretapChannel ch;
  ch.h_y = Matrix::Identity(1, 1);
  ch.h_z = Matrix::Identity(1, 1);
  ch.sigma_y = PsdMatrix::identity(1);
  ch.sigma_z = PsdMatrix(Matrix::Constant(1, 1, 2.0));

  // Scalar power budget P = 1 is the covariance constraint S = 1.
  const auto pts = trace_boundary(ch, InputConstraint::power(1.0), {0.0},
                                  {WeightCell{0.0, 1.0}});
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].objective == Approx(0.5 * std::log(4.0 / 3.0)).margin(1e-8));
  CHECK(pts[0].s_used.mat()(0, 0) == Approx(1.0));
}

TEST_CASE("solver handles rank-deficient S on its range space") {
  AlignedChannel ch;
  ch.sigma_y_eff = PsdMatrix::identity(2);
  ch.sigma_z_eff = PsdMatrix(2.0 * Matrix::Identity(2, 2));
  Matrix s_rank1(2, 2);
  s_rank1 << 1.0, 1.0, 1.0, 1.0;
  const PsdMatrix s(s_rank1);

  const auto res = secrecy_capacity(ch, s);
  CHECK(loewner_leq(res.k_star.mat(), s.mat()));
  const auto oracle = grid_search(ch, s, OracleObjective::secrecy(), test_grid());
  CHECK(res.value == Approx(std::max(0.0, oracle.value)).margin(tol::oracle));

  const auto caps = single_user_capacities(ch, s);
  const double r0 = 0.5 * std::min(caps.c_y, caps.c_z);
  const BoundaryPoint pt = maximize_weighted(ch, s, r0, 1.0, 2.0);
  const auto ow =
      grid_search(ch, s, OracleObjective::weighted(1.0, 2.0, r0), test_grid());
  REQUIRE(ow.feasible_found);
  CHECK(pt.objective == Approx(ow.value).margin(tol::oracle));
}

TEST_CASE("accepted ascent iterations never decrease the merit") {
  Rng rng(29);
  const AlignedChannel ch = random_aligned(rng, 2);
  const PsdMatrix s = random_psd(rng, 2, 0.5, 2.0);
  detail::WeightedEngine eng(ch, s, 1.0, 2.0, 0.0);

  // Re-run the projected ascent one iteration at a time; every accepted
  // iterate must not lower the objective.
  SolverConfig cfg;
  Matrix q = 0.3 * Matrix::Identity(2, 2);
  double prev = eng.eval(q).phi;
  for (int it = 0; it < 50; ++it) {
    const auto stage = detail::ascend(eng, q, -1.0, false, 1, 1e-14, cfg);
    const double now = eng.eval(stage.q).phi;
    CHECK(now >= prev - 1e-15);
    if ((stage.q - q).norm() == 0.0) break;
    q = stage.q;
    prev = now;
  }
}

TEST_CASE("power constraint shape family") {
  const auto scalar = power_constraint_shapes(1, 2.5);
  REQUIRE(scalar.size() == 1);
  CHECK(scalar[0].mat()(0, 0) == Approx(2.5));

  const auto planar = power_constraint_shapes(2, 1.0);
  CHECK(planar.size() > 10);
  for (const auto& s : planar)
    CHECK(s.mat().trace() == Approx(1.0).margin(1e-12));

  const auto big = power_constraint_shapes(3, 3.0);
  REQUIRE(big.size() == 1);
  CHECK(big[0].mat().trace() == Approx(3.0));
}

TEST_CASE("rectangular channel pipeline converges to the general-form truth") {
  // r_Y = 1 < t = 2 < r_Z = 3: exercises padding and row compression, then
  // the alignment limit against a brute force that never leaves the original
  // channel description.
  WiretapChannel ch;
  ch.h_y = Matrix::Zero(1, 2);
  ch.h_y << 1.0, 0.2;
  ch.sigma_y = PsdMatrix::identity(1);
  ch.h_z = Matrix::Zero(3, 2);
  ch.h_z << 0.5, 0.0, 0.1, 0.8, 0.0, 0.3;
  Matrix sz(3, 3);
  sz << 1.5, 0.1, 0.0, 0.1, 1.2, 0.0, 0.0, 0.0, 1.1;
  ch.sigma_z = PsdMatrix(sz);
  const PsdMatrix s(0.75 * Matrix::Identity(2, 2));

  const auto caps = single_user_capacities(ch, s);
  GridSpec grid;
  grid.theta_resolution = 150;
  grid.angle_resolution = 120;
  grid.refine_passes = 3;
  grid.refine_resolution = 80;
  const auto truth = grid_search_fn(
      s,
      [&](const Matrix& k) {
        const double ly = gauss_info(ch.h_y, k, ch.sigma_y.mat());
        const double lz = gauss_info(ch.h_z, k, ch.sigma_z.mat());
        const double m = std::min(caps.c_y - ly, caps.c_z - lz);
        return lz + m + 2.0 * (ly - lz);
      },
      grid);

  double prev_err = std::numeric_limits<double>::infinity();
  for (double alpha : {1e-2, 1e-3, 1e-4}) {
    const WiretapChannel sq =
        square_augment(ch, defaults::big_noise * alpha * alpha);
    const AlignedChannel al = align(sq, alpha);
    const BoundaryPoint pt = maximize_weighted(al, s, 0.0, 1.0, 2.0);
    const double err = std::abs(pt.objective - truth.value);
    CHECK(err < prev_err + 1e-12);
    prev_err = err;
  }
  CHECK(prev_err < 1e-3);
}

TEST_CASE("trace_boundary with jobs > 1 is deterministic") {
  Rng rng(23);
  WiretapChannel ch;
  ch.h_y = Matrix::Identity(2, 2);
  ch.h_z = Matrix::Identity(2, 2);
  ch.sigma_y = random_psd(rng, 2, 0.5, 2.0);
  ch.sigma_z = random_psd(rng, 2, 0.5, 2.0);
  const InputConstraint cons =
      InputConstraint::covariance(random_psd(rng, 2, 0.5, 1.5));

  const std::vector<double> r0_grid{0.0, 0.3, 0.7};
  const std::vector<WeightCell> weights{{0.0, 1.0}, {1.0, 2.0}};
  const auto serial = trace_boundary(ch, cons, r0_grid, weights);
  const auto parallel = trace_boundary(ch, cons, r0_grid, weights,
                                       SolverConfig{}, defaults::alpha, 2);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].objective == parallel[i].objective);
    CHECK(max_abs(serial[i].k_opt.mat() - parallel[i].k_opt.mat()) == 0.0);
  }
}
