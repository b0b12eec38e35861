#include <catch2/catch.hpp>

#include "wiretap/kkt.hpp"
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

}  // namespace

TEST_CASE("scalar certificate at the secrecy optimum") {
  const AlignedChannel ch = scalar_channel(1.0, 2.0);
  const PsdMatrix s = PsdMatrix::identity(1);
  const PsdMatrix k_star = PsdMatrix::identity(1);

  const KktCertificate cert = build_certificate(k_star, ch, s, 0.0, 1.0, 0.0);
  CHECK(cert.beta_y == 0.0);
  CHECK(cert.beta_z == 0.0);
  CHECK(max_abs(cert.m.mat()) == 0.0);
  // M_S = 1/(K*+sy) - 1/(K*+sz) = 1/2 - 1/3 = 1/6.
  CHECK(cert.m_s.mat()(0, 0) == Approx(1.0 / 6.0).margin(1e-12));
  CHECK(cert.residual_stationarity < 1e-12);
  CHECK(cert.residual_compl_m < 1e-12);
  CHECK(cert.residual_compl_ms < 1e-12);
  CHECK(check_certificate(cert, 1e-8));
}

TEST_CASE("interior K* forces empty slack supports") {
  Rng rng(3);
  const AlignedChannel ch = random_aligned(rng, 2);
  const PsdMatrix s = random_psd(rng, 2, 1.0, 2.0);
  // Strictly interior point: 0 < K* < S.
  const PsdMatrix k(0.5 * s.mat());

  const KktCertificate cert = build_certificate(k, ch, s, 0.5, 1.5, 0.0);
  CHECK(max_abs(cert.m.mat()) == 0.0);
  CHECK(max_abs(cert.m_s.mat()) == 0.0);
  // Nothing to fit: the residual is the raw stationarity mismatch.
  const Matrix ay = inverse_sym(k.mat() + ch.sigma_y_eff.mat());
  const Matrix az = inverse_sym(k.mat() + ch.sigma_z_eff.mat());
  const double scale = 1.5 - 0.5 * cert.lambda;
  CHECK(cert.residual_stationarity ==
        Approx((scale * (ay - az)).norm()).margin(1e-12));
}

TEST_CASE("identical covariances at K* = 0 certify with zero slack") {
  Rng rng(5);
  AlignedChannel ch;
  ch.sigma_y_eff = random_psd(rng, 2, 0.5, 2.0);
  ch.sigma_z_eff = ch.sigma_y_eff;
  const PsdMatrix s = random_psd(rng, 2, 0.5, 2.0);

  const KktCertificate cert =
      build_certificate(PsdMatrix::zero(2), ch, s, 0.0, 1.0, 0.0);
  CHECK(cert.residual_stationarity < 1e-12);
  CHECK(max_abs(cert.m.mat()) < 1e-12);
  CHECK(max_abs(cert.m_s.mat()) < 1e-12);
  CHECK(check_certificate(cert, 1e-8));
}

TEST_CASE("check_certificate rejects inconsistent multipliers") {
  KktCertificate cert;
  cert.m = PsdMatrix::zero(1);
  cert.m_s = PsdMatrix::zero(1);
  cert.mu_p = 1.0;
  cert.mu_s = 2.0;

  SECTION("beta_y > 0 with a slack constraint") {
    cert.beta_y = 0.1;
    cert.r0_star = 0.1;
    cert.r0y = 0.5;  // r0* < r0y - tol
    cert.r0z = 0.5;
    cert.lambda = 0.5;
    CHECK_FALSE(check_certificate(cert, 1e-6));
  }

  SECTION("lambda in the open interval but rates are ordered") {
    cert.lambda = 0.5;
    cert.r0y = 0.5;
    cert.r0z = 0.2;  // r0y > r0z + tol forces lambda = 0
    cert.r0_star = 0.1;
    CHECK_FALSE(check_certificate(cert, 1e-6));
  }

  SECTION("residual above tolerance") {
    cert.residual_stationarity = 1e-3;
    cert.r0y = cert.r0z = 0.5;
    CHECK_FALSE(check_certificate(cert, 1e-6));
  }
}

TEST_CASE("solver optimizers certify; perturbed points do not") {
  Rng rng(7);
  int sensitive = 0, total = 0;
  for (int rep = 0; rep < 5; ++rep) {
    const AlignedChannel ch = random_aligned(rng, 2);
    const PsdMatrix s = random_psd(rng, 2, 0.6, 2.0);
    const auto caps = single_user_capacities(ch, s);
    const double r0 = 0.4 * std::min(caps.c_y, caps.c_z);
    const double mu_p = 1.0, mu_s = 2.0;

    SolverConfig cfg;
    cfg.refine_tol = 1e-11;
    const BoundaryPoint pt = maximize_weighted(ch, s, r0, mu_p, mu_s, cfg);
    const KktCertificate cert =
        build_certificate(pt.k_opt, ch, s, mu_p, mu_s, r0);
    CHECK(check_certificate(cert, 1e-6));

    // A feasible step of Frobenius norm 1e-2 away from the optimum leaves a
    // visible stationarity residual.
    Matrix dir = symmetrize(random_gaussian(rng, 2, 2));
    dir *= 1e-2 / dir.norm();
    const PsdMatrix k_off = project_interval(pt.k_opt.mat() + dir, s);
    if ((k_off.mat() - pt.k_opt.mat()).norm() > 5e-3) {
      const KktCertificate off =
          build_certificate(k_off, ch, s, mu_p, mu_s, r0);
      ++total;
      if (off.residual_stationarity > 1e-4) ++sensitive;
    }
  }
  CHECK(sensitive == total);
  CHECK(total >= 3);
}

TEST_CASE("oracle maximizers certify at the grid tolerance") {
  Rng rng(9);
  GridSpec grid;  // library defaults: 200/180 with four zoom passes

  const AlignedChannel ch = random_aligned(rng, 2);
  const PsdMatrix s = random_psd(rng, 2, 0.6, 2.0);
  const auto caps = single_user_capacities(ch, s);
  const double r0 = 0.5 * std::min(caps.c_y, caps.c_z);

  const auto oracle =
      grid_search(ch, s, OracleObjective::weighted(1.0, 2.0, r0), grid);
  REQUIRE(oracle.feasible_found);

  KktOptions opts;
  opts.case_tol = 1e-3;  // grid quantization blurs activity detection
  const KktCertificate cert =
      build_certificate(oracle.k, ch, s, 1.0, 2.0, r0, opts);
  CHECK(cert.residual_stationarity <= 1e-4);
  CHECK(check_certificate(cert, 1e-4));
}

TEST_CASE("lambda tie case lands inside the unit interval") {
  // Equal noise covariances make R_0Y = R_0Z everywhere, so lambda is free.
  Rng rng(11);
  AlignedChannel ch;
  ch.sigma_y_eff = random_psd(rng, 2, 0.8, 1.6);
  ch.sigma_z_eff = ch.sigma_y_eff;
  const PsdMatrix s = random_psd(rng, 2, 0.5, 1.5);
  const PsdMatrix k = random_interval_point(rng, s);

  const KktCertificate cert = build_certificate(k, ch, s, 1.0, 2.0, 0.0);
  CHECK(cert.lambda_case == LambdaCase::Tie);
  CHECK(cert.lambda >= 0.0);
  CHECK(cert.lambda <= 1.0);
}
