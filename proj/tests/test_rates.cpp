#include <catch2/catch.hpp>

#include "wiretap/rates.hpp"
#include "wiretap/sampling.hpp"

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
  ch.sigma_y_eff = random_psd(rng, n, 0.5, 2.5);
  ch.sigma_z_eff = random_psd(rng, n, 0.5, 2.5);
  return ch;
}

}  // namespace

TEST_CASE("rate_s basics") {
  const AlignedChannel ch = scalar_channel(1.0, 2.0);
  CHECK(rate_s(PsdMatrix::zero(1), ch) == 0.0);
  // (1/2) ln 2 - (1/2) ln(3/2) = (1/2) ln(4/3)
  CHECK(rate_s(PsdMatrix::identity(1), ch) == Approx(0.5 * std::log(4.0 / 3.0)));

  Rng rng(3);
  AlignedChannel same = random_aligned(rng, 2);
  same.sigma_z_eff = same.sigma_y_eff;
  for (int rep = 0; rep < 5; ++rep)
    CHECK(rate_s(random_psd(rng, 2, 0.0, 2.0), same) == Approx(0.0).margin(1e-14));
}

TEST_CASE("rate_p, rate_0y, rate_0z endpoints") {
  const AlignedChannel ch = scalar_channel(1.0, 2.0);
  const PsdMatrix s = PsdMatrix::identity(1);

  CHECK(rate_0y(s, s, ch) == Approx(0.0).margin(1e-14));
  CHECK(rate_0z(s, s, ch) == Approx(0.0).margin(1e-14));

  const auto caps = single_user_capacities(ch, s);
  CHECK(rate_0y(PsdMatrix::zero(1), s, ch) == Approx(caps.c_y));
  CHECK(rate_0z(PsdMatrix::zero(1), s, ch) == Approx(caps.c_z));

  const PsdMatrix k(Matrix::Constant(1, 1, 0.5));
  CHECK(rate_p(k, ch) == Approx(0.5 * std::log(1.25)));
  CHECK(rate_0z(k, s, ch) == Approx(0.5 * std::log(3.0 / 2.5)));
}

TEST_CASE("interval preconditions are enforced") {
  const AlignedChannel ch = scalar_channel(1.0, 2.0);
  const PsdMatrix s = PsdMatrix::identity(1);
  const PsdMatrix big(Matrix::Constant(1, 1, 2.0));
  CHECK_THROWS_AS(rate_0y(big, s, ch), OrderViolation);
  CHECK_THROWS_AS(gaussian_region_rates(big, s, ch), OrderViolation);
}

TEST_CASE("single-user capacities") {
  const AlignedChannel ch = scalar_channel(1.0, 2.0);
  const auto zero = single_user_capacities(ch, PsdMatrix::zero(1));
  CHECK(zero.c_y == 0.0);
  CHECK(zero.c_z == 0.0);

  const auto caps = single_user_capacities(ch, PsdMatrix::identity(1));
  CHECK(caps.c_y == Approx(0.5 * std::log(2.0)));

  Rng rng(5);
  for (int rep = 0; rep < 5; ++rep) {
    const AlignedChannel a = random_aligned(rng, 2);
    const PsdMatrix s1 = random_psd(rng, 2, 0.0, 1.0);
    const PsdMatrix s2(s1.mat() + random_psd(rng, 2, 0.0, 1.0).mat());
    CHECK(single_user_capacities(a, s1).c_y <=
          single_user_capacities(a, s2).c_y + 1e-12);
  }
}

TEST_CASE("gaussian_region_rates corners and identities") {
  Rng rng(7);
  const AlignedChannel ch = random_aligned(rng, 2);
  const PsdMatrix s = random_psd(rng, 2, 0.3, 2.0);
  const auto caps = single_user_capacities(ch, s);

  const RateBundle at_zero = gaussian_region_rates(PsdMatrix::zero(2), s, ch);
  CHECK(at_zero.rs == 0.0);
  CHECK(at_zero.rp == 0.0);
  CHECK(at_zero.r0y == Approx(caps.c_y));
  CHECK(at_zero.r0z == Approx(caps.c_z));

  const RateBundle at_s = gaussian_region_rates(s, s, ch);
  CHECK(at_s.rs == Approx(rate_s(s, ch)));
  CHECK(at_s.rp == Approx(rate_p(s, ch)));
  CHECK(at_s.r0y == Approx(0.0).margin(1e-12));
  CHECK(at_s.r0z == Approx(0.0).margin(1e-12));

  // Telescoping identities on random interval points.
  for (int rep = 0; rep < 50; ++rep) {
    const PsdMatrix k = random_interval_point(rng, s);
    const RateBundle b = gaussian_region_rates(k, s, ch);
    CHECK(b.rs + b.rp + b.r0y == Approx(caps.c_y).margin(1e-10));
    CHECK(b.rp + b.r0z == Approx(caps.c_z).margin(1e-10));
  }
}

TEST_CASE("rate monotonicity in K") {
  Rng rng(9);
  const AlignedChannel ch = random_aligned(rng, 2);
  const PsdMatrix s = random_psd(rng, 2, 0.5, 2.0);
  for (int rep = 0; rep < 10; ++rep) {
    const PsdMatrix k1 = random_interval_point(rng, s);
    // k2 = k1 + (something inside [0, S - k1]).
    const PsdMatrix gap_part =
        random_interval_point(rng, PsdMatrix(s.mat() - k1.mat()));
    const PsdMatrix k2(k1.mat() + gap_part.mat());
    CHECK(rate_p(k1, ch) <= rate_p(k2, ch) + 1e-12);
    CHECK(rate_0y(k2, s, ch) <= rate_0y(k1, s, ch) + 1e-12);
  }
}

TEST_CASE("degraded channel has no secrecy") {
  Rng rng(11);
  for (int rep = 0; rep < 5; ++rep) {
    AlignedChannel ch;
    ch.sigma_z_eff = random_psd(rng, 2, 0.5, 1.5);
    ch.sigma_y_eff = PsdMatrix(ch.sigma_z_eff.mat() +
                               random_psd(rng, 2, 0.1, 1.0).mat());
    const PsdMatrix s = random_psd(rng, 2, 0.2, 2.0);
    for (int k_rep = 0; k_rep < 10; ++k_rep) {
      const PsdMatrix k = random_interval_point(rng, s);
      CHECK(rate_s(k, ch) <= tol::num);
    }
  }
}

TEST_CASE("triple mapping and roundtrip") {
  const PublicRateTriple p{0.1, 0.2, 0.3};
  const RateTriple t = map_public_to_equivocation(p);
  CHECK(t.r0 == 0.1);
  CHECK(t.r1 == Approx(0.5));
  CHECK(t.re == 0.3);

  const PublicRateTriple back = map_equivocation_to_public(t);
  CHECK(back.r0 == p.r0);
  CHECK(back.rp == Approx(p.rp).margin(1e-15));
  CHECK(back.rs == p.rs);

  const PublicRateTriple inv =
      map_equivocation_to_public(RateTriple{0.1, 0.5, 0.3});
  CHECK(inv.rp == Approx(0.2));

  CHECK_THROWS_AS(map_equivocation_to_public(RateTriple{0.1, 0.2, 0.3}),
                  InvalidTriple);
  CHECK_THROWS_AS((RateTriple{-0.1, 0.2, 0.1}.validate()), InvalidTriple);
}

TEST_CASE("roundtrip is identity over random valid triples") {
  Rng rng(13);
  for (int rep = 0; rep < 200; ++rep) {
    PublicRateTriple p{rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0),
                       rng.uniform(0.0, 1.0)};
    const PublicRateTriple back =
        map_equivocation_to_public(map_public_to_equivocation(p));
    CHECK(back.r0 == p.r0);
    CHECK(back.rp == Approx(p.rp).margin(4e-16 * std::max(1.0, p.rp + p.rs)));
    CHECK(back.rs == p.rs);
  }
}

TEST_CASE("power-constrained rates") {
  const AlignedChannel ch = scalar_channel(1.0, 2.0);
  const PsdMatrix zero = PsdMatrix::zero(1);
  const RateBundle none = power_region_rates(zero, zero, ch, 1.0);
  CHECK(none.rs == 0.0);
  CHECK(none.rp == 0.0);

  const PsdMatrix one = PsdMatrix::identity(1);
  // tr(K1 + K2) = 1 = P exactly: accepted.
  CHECK_NOTHROW(power_region_rates(one, zero, ch, 1.0));
  CHECK_THROWS_AS(power_region_rates(one, one, ch, 1.0), PowerExceeded);

  const RateBundle via_power = power_region_rates(one, zero, ch, 1.0);
  const RateBundle via_cov = gaussian_region_rates(one, one, ch);
  CHECK(via_power.rs == Approx(via_cov.rs));
  CHECK(via_power.rp == Approx(via_cov.rp));
  CHECK(via_power.r0y == Approx(via_cov.r0y));
}

TEST_CASE("gradients match central differences") {
  Rng rng(17);
  const AlignedChannel ch = random_aligned(rng, 2);
  WiretapChannel gen;
  gen.h_y = random_gaussian(rng, 2, 2);
  gen.h_z = random_gaussian(rng, 2, 2);
  gen.sigma_y = random_psd(rng, 2, 0.5, 2.0);
  gen.sigma_z = random_psd(rng, 2, 0.5, 2.0);

  const PsdMatrix s = random_psd(rng, 2, 0.8, 2.0);
  const double h = 1e-5;

  const auto check_grad = [&](auto&& value, auto&& grad) {
    for (int rep = 0; rep < 4; ++rep) {
      const Matrix k = random_interval_point(rng, s).mat() +
                       0.05 * Matrix::Identity(2, 2);
      const Matrix g = grad(k);
      for (int i = 0; i < 2; ++i)
        for (int j = i; j < 2; ++j) {
          Matrix e = Matrix::Zero(2, 2);
          e(i, j) = e(j, i) = 1.0;
          const double fd = (value(k + h * e) - value(k - h * e)) / (2.0 * h);
          const double an = (g.cwiseProduct(e)).sum();
          CHECK(an == Approx(fd).epsilon(1e-5).margin(1e-9));
        }
    }
  };

  check_grad([&](const Matrix& k) { return rate_s(PsdMatrix(k), ch); },
             [&](const Matrix& k) { return rate_s_grad(k, ch); });
  check_grad([&](const Matrix& k) { return rate_p(PsdMatrix(k), ch); },
             [&](const Matrix& k) { return rate_p_grad(k, ch); });
  check_grad([&](const Matrix& k) { return rate_s(PsdMatrix(k), gen); },
             [&](const Matrix& k) { return rate_s_grad(k, gen); });
  check_grad(
      [&](const Matrix& k) { return detail::info_y(gen, k); },
      [&](const Matrix& k) -> Matrix { return -rate_0y_grad(k, gen); });
}
