#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <utility>

#include <json.hpp>

#include "wiretap/channel.hpp"
#include "wiretap/enhancement.hpp"
#include "wiretap/kkt.hpp"
#include "wiretap/rates.hpp"
#include "wiretap/solver.hpp"

namespace wiretap {

using Json = nlohmann::json;

inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const Json& j, const std::string& name) {
  if (!j.is_array() || j.empty())
    throw Error(name + ": expected a non-empty array of rows");
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  if (cols == 0) throw Error(name + ": rows must be non-empty arrays");
  Matrix m(static_cast<Eigen::Index>(j.size()),
           static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& row = j[i];
    if (!row.is_array() || row.size() != cols)
      throw Error(name + ": ragged rows");
    for (std::size_t k = 0; k < cols; ++k) {
      if (!row[k].is_number()) throw Error(name + ": non-numeric entry");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          row[k].get<double>();
    }
  }
  return m;
}

struct ChannelSpec {
  WiretapChannel channel;
  InputConstraint constraint;
};

/// Channel file schema: dense row-major matrices h_y, h_z, sigma_y, sigma_z,
/// plus either {"covariance": [[...]]} or {"power": P} under "constraint".
inline ChannelSpec channel_from_json(const Json& j) {
  for (const char* key : {"h_y", "h_z", "sigma_y", "sigma_z", "constraint"})
    if (!j.contains(key)) throw Error(std::string("channel spec missing ") + key);

  WiretapChannel ch;
  ch.h_y = matrix_from_json(j.at("h_y"), "h_y");
  ch.h_z = matrix_from_json(j.at("h_z"), "h_z");
  ch.sigma_y = PsdMatrix(matrix_from_json(j.at("sigma_y"), "sigma_y"));
  ch.sigma_z = PsdMatrix(matrix_from_json(j.at("sigma_z"), "sigma_z"));

  const Json& c = j.at("constraint");
  std::optional<InputConstraint> constraint;
  if (c.contains("covariance"))
    constraint = InputConstraint::covariance(
        PsdMatrix(matrix_from_json(c.at("covariance"), "constraint.covariance")));
  else if (c.contains("power"))
    constraint = InputConstraint::power(c.at("power").get<double>());
  else
    throw Error("constraint must provide either covariance or power");

  validate_channel(ch);
  if (constraint->kind() == InputConstraint::Kind::Covariance &&
      constraint->s().dim() != ch.t())
    throw DimensionMismatch("constraint covariance does not match t");
  return {std::move(ch), std::move(*constraint)};
}

inline Json channel_to_json(const WiretapChannel& ch,
                            const InputConstraint& constraint) {
  Json j;
  j["h_y"] = matrix_to_json(ch.h_y);
  j["h_z"] = matrix_to_json(ch.h_z);
  j["sigma_y"] = matrix_to_json(ch.sigma_y.mat());
  j["sigma_z"] = matrix_to_json(ch.sigma_z.mat());
  if (constraint.kind() == InputConstraint::Kind::Covariance)
    j["constraint"] = {{"covariance", matrix_to_json(constraint.s().mat())}};
  else
    j["constraint"] = {{"power", constraint.p()}};
  return j;
}

inline Json rate_bundle_to_json(const PsdMatrix& k, const RateBundle& b) {
  return Json{{"k", matrix_to_json(k.mat())},
              {"rs", b.rs},
              {"rp", b.rp},
              {"r0y", b.r0y},
              {"r0z", b.r0z}};
}

inline Json boundary_point_to_json(const BoundaryPoint& p) {
  Json j;
  j["r0"] = p.r0_star;
  j["mu_p"] = p.mu_p;
  j["mu_s"] = p.mu_s;
  j["k_opt"] = matrix_to_json(p.k_opt.mat());
  j["s"] = matrix_to_json(p.s_used.mat());
  j["rates"] = rate_bundle_to_json(p.k_opt, p.functionals);
  j["rs"] = p.rs;
  j["rp"] = p.rp;
  j["r1"] = p.rp + p.rs;
  j["re"] = p.rs;
  j["objective"] = p.objective;
  j["converged"] = p.converged;
  j["grad_norm"] = p.grad_norm;
  j["constraint_slack"] = p.constraint_slack;
  j["gap"] = p.gap;
  if (!p.certificate_id.empty()) j["certificate_id"] = p.certificate_id;
  return j;
}

inline BoundaryPoint boundary_point_from_json(const Json& j) {
  BoundaryPoint p;
  p.r0_star = j.at("r0").get<double>();
  p.mu_p = j.at("mu_p").get<double>();
  p.mu_s = j.at("mu_s").get<double>();
  p.k_opt = PsdMatrix(matrix_from_json(j.at("k_opt"), "k_opt"));
  p.s_used = PsdMatrix(matrix_from_json(j.at("s"), "s"));
  p.rs = j.value("rs", 0.0);
  p.rp = j.value("rp", 0.0);
  p.objective = j.value("objective", 0.0);
  p.converged = j.value("converged", true);
  p.grad_norm = j.value("grad_norm", 0.0);
  p.constraint_slack = j.value("constraint_slack", 0.0);
  p.gap = j.value("gap", 0.0);
  return p;
}

inline Json certificate_to_json(const KktCertificate& c) {
  Json j;
  j["lambda"] = c.lambda;
  j["beta_y"] = c.beta_y;
  j["beta_z"] = c.beta_z;
  j["m"] = matrix_to_json(c.m.mat());
  j["m_s"] = matrix_to_json(c.m_s.mat());
  j["residual_stationarity"] = c.residual_stationarity;
  j["residual_compl_m"] = c.residual_compl_m;
  j["residual_compl_ms"] = c.residual_compl_ms;
  j["lambda_case"] = to_string(c.lambda_case);
  j["beta_case"] = to_string(c.beta_case);
  j["mu_p"] = c.mu_p;
  j["mu_s"] = c.mu_s;
  j["r0_star"] = c.r0_star;
  j["r0y"] = c.r0y;
  j["r0z"] = c.r0z;
  return j;
}

inline Json enhancement_report_to_json(const EnhancementReport& r) {
  return Json{{"res_leq_own", r.res_leq_own},
              {"res_leq_cross", r.res_leq_cross},
              {"res_product", r.res_product},
              {"r0z_minus_r0y", r.r0z_minus_r0y},
              {"r0_order_ok", r.r0_order_ok},
              {"tol", r.tol},
              {"pass", r.pass()}};
}

inline Json triple_to_json(const RateTriple& t) {
  return Json{{"r0", t.r0}, {"r1", t.r1}, {"re", t.re}};
}

inline Json triple_to_json(const PublicRateTriple& t) {
  return Json{{"r0", t.r0}, {"rp", t.rp}, {"rs", t.rs}};
}

inline RateTriple rate_triple_from_json(const Json& j) {
  RateTriple t{j.at("r0").get<double>(), j.at("r1").get<double>(),
               j.at("re").get<double>()};
  t.validate();
  return t;
}

inline PublicRateTriple public_triple_from_json(const Json& j) {
  PublicRateTriple t{j.at("r0").get<double>(), j.at("rp").get<double>(),
                     j.at("rs").get<double>()};
  t.validate();
  return t;
}

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  Json j;
  in >> j;
  return j;
}

inline void save_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace wiretap
