#pragma once

#include <cmath>
#include <concepts>
#include <type_traits>

#include "wiretap/channel.hpp"
#include "wiretap/linalg.hpp"

namespace wiretap {

/// Channel kinds the rate functionals accept: the general model with gain
/// matrices, or the aligned reduction with identity gains.
template <typename C>
concept ChannelLike =
    std::same_as<C, WiretapChannel> || std::same_as<C, AlignedChannel>;

namespace detail {

inline double info_y(const WiretapChannel& ch, const Matrix& q) {
  return gauss_info(ch.h_y, q, ch.sigma_y.mat());
}
inline double info_y(const AlignedChannel& ch, const Matrix& q) {
  return gauss_info(q, ch.sigma_y_eff.mat());
}
inline double info_z(const WiretapChannel& ch, const Matrix& q) {
  return gauss_info(ch.h_z, q, ch.sigma_z.mat());
}
inline double info_z(const AlignedChannel& ch, const Matrix& q) {
  return gauss_info(q, ch.sigma_z_eff.mat());
}

inline Matrix info_y_grad(const WiretapChannel& ch, const Matrix& q) {
  return gauss_info_grad(ch.h_y, q, ch.sigma_y.mat());
}
inline Matrix info_y_grad(const AlignedChannel& ch, const Matrix& q) {
  return gauss_info_grad(q, ch.sigma_y_eff.mat());
}
inline Matrix info_z_grad(const WiretapChannel& ch, const Matrix& q) {
  return gauss_info_grad(ch.h_z, q, ch.sigma_z.mat());
}
inline Matrix info_z_grad(const AlignedChannel& ch, const Matrix& q) {
  return gauss_info_grad(q, ch.sigma_z_eff.mat());
}

inline void require_psd(const Matrix& k) {
  if (!is_psd(k)) throw OrderViolation("K is not positive semidefinite");
}

inline void require_interval(const Matrix& k, const Matrix& s) {
  require_psd(k);
  if (!loewner_leq(k, s))
    throw OrderViolation("K exceeds S in the Loewner order");
}

}  // namespace detail

/// Point of the capacity-equivocation region: common rate r0, private rate
/// r1, and equivocation rate re, all in nats. Valid triples satisfy
/// 0 <= re <= r1 and r0 >= 0.
struct RateTriple {
  double r0 = 0.0;
  double r1 = 0.0;
  double re = 0.0;

  void validate() const {
    if (r0 < 0.0 || r1 < 0.0 || re < 0.0)
      throw InvalidTriple("rates must be nonnegative");
    if (re > r1) throw InvalidTriple("equivocation rate exceeds private rate");
  }
};

/// Point of the public-message region: common rate r0, public rate rp, and
/// confidential rate rs, all nonnegative, in nats.
struct PublicRateTriple {
  double r0 = 0.0;
  double rp = 0.0;
  double rs = 0.0;

  void validate() const {
    if (r0 < 0.0 || rp < 0.0 || rs < 0.0)
      throw InvalidTriple("rates must be nonnegative");
  }
};

/// (r0, rp, rs) -> (r0, rp + rs, rs): the private message carries the public
/// and confidential parts, and the confidential rate is the equivocation.
inline RateTriple map_public_to_equivocation(const PublicRateTriple& p) {
  p.validate();
  return RateTriple{p.r0, p.rp + p.rs, p.rs};
}

/// Inverse mapping (r0, r1, re) -> (r0, r1 - re, re). Requires re <= r1.
inline PublicRateTriple map_equivocation_to_public(const RateTriple& t) {
  t.validate();
  return PublicRateTriple{t.r0, t.r1 - t.re, t.re};
}

/// Secrecy rate R_s(K): information advantage of the legitimate receiver.
/// May be negative for degraded channels; region-level code clamps at zero.
template <ChannelLike C>
double rate_s(const PsdMatrix& k, const C& ch) {
  detail::require_psd(k.mat());
  return detail::info_y(ch, k.mat()) - detail::info_z(ch, k.mat());
}

/// Public rate R_p(K): what the eavesdropper channel supports on top of K.
template <ChannelLike C>
double rate_p(const PsdMatrix& k, const C& ch) {
  detail::require_psd(k.mat());
  return detail::info_z(ch, k.mat());
}

/// Common-rate budget of the legitimate receiver, R_0Y(K) = C_Y(S) - I_Y(K).
template <ChannelLike C>
double rate_0y(const PsdMatrix& k, const PsdMatrix& s, const C& ch) {
  detail::require_interval(k.mat(), s.mat());
  return detail::info_y(ch, s.mat()) - detail::info_y(ch, k.mat());
}

/// Common-rate budget of the eavesdropper, R_0Z(K) = C_Z(S) - I_Z(K).
template <ChannelLike C>
double rate_0z(const PsdMatrix& k, const PsdMatrix& s, const C& ch) {
  detail::require_interval(k.mat(), s.mat());
  return detail::info_z(ch, s.mat()) - detail::info_z(ch, k.mat());
}

struct Capacities {
  double c_y = 0.0;
  double c_z = 0.0;
};

/// Single-user capacities of both receivers at input covariance S.
template <ChannelLike C>
Capacities single_user_capacities(const C& ch, const PsdMatrix& s) {
  detail::require_psd(s.mat());
  return {detail::info_y(ch, s.mat()), detail::info_z(ch, s.mat())};
}

/// Corner data of the Gaussian region for one K: the four functionals that
/// generate every inequality of the region description.
struct RateBundle {
  double rs = 0.0;
  double rp = 0.0;
  double r0y = 0.0;
  double r0z = 0.0;

  double min_r0() const { return std::min(r0y, r0z); }
};

template <ChannelLike C>
RateBundle gaussian_region_rates(const PsdMatrix& k, const PsdMatrix& s,
                                 const C& ch) {
  detail::require_interval(k.mat(), s.mat());
  const double iy_k = detail::info_y(ch, k.mat());
  const double iz_k = detail::info_z(ch, k.mat());
  const double iy_s = detail::info_y(ch, s.mat());
  const double iz_s = detail::info_z(ch, s.mat());
  return {iy_k - iz_k, iz_k, iy_s - iy_k, iz_s - iz_k};
}

/// Rates under the average power constraint: K <- K1 and S <- K1 + K2 in the
/// covariance-constrained description, subject to tr(K1 + K2) <= P.
template <ChannelLike C>
RateBundle power_region_rates(const PsdMatrix& k1, const PsdMatrix& k2,
                              const C& ch, double p) {
  const double used = k1.mat().trace() + k2.mat().trace();
  if (used > p * (1.0 + 1e-12) + 1e-12)
    throw PowerExceeded("tr(K1 + K2) exceeds the power budget");
  const PsdMatrix s(k1.mat() + k2.mat());
  return gaussian_region_rates(k1, s, ch);
}

// Analytic gradients of the rate functionals with respect to K. Central to
// the solver and checked against finite differences in the tests.

template <ChannelLike C>
Matrix rate_s_grad(const Matrix& k, const C& ch) {
  return detail::info_y_grad(ch, k) - detail::info_z_grad(ch, k);
}

template <ChannelLike C>
Matrix rate_p_grad(const Matrix& k, const C& ch) {
  return detail::info_z_grad(ch, k);
}

template <ChannelLike C>
Matrix rate_0y_grad(const Matrix& k, const C& ch) {
  return -detail::info_y_grad(ch, k);
}

template <ChannelLike C>
Matrix rate_0z_grad(const Matrix& k, const C& ch) {
  return -detail::info_z_grad(ch, k);
}

}  // namespace wiretap
