// Command-line front end: channel ingestion, boundary sweeps, KKT
// certification, enhancement checks, oracle comparison, and plot-ready data
// emission. Exit codes: 0 ok, 1 input error, 2 quality flag, 3 internal.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wiretap/json_io.hpp"
#include "wiretap/membership.hpp"
#include "wiretap/wiretap.hpp"

namespace {

using namespace wiretap;

constexpr double kLn2 = 0.6931471805599453;

struct CommonOpts {
  std::uint64_t seed = 0x77ED2024u;
  bool bits = false;
  std::string out;
};

double display(double nats, bool bits) { return bits ? nats / kLn2 : nats; }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Environment seed beats flags so batch reruns can pin stochastic behavior
// without editing scripts.
std::uint64_t resolve_seed(std::uint64_t flag_seed) {
  if (const char* env = std::getenv("WIRETAP_REGION_SEED"))
    return std::strtoull(env, nullptr, 10);
  return flag_seed;
}

void write_manifest(const std::string& command, const std::string& channel_path,
                    const std::map<std::string, std::string>& params,
                    std::uint64_t seed, const std::string& out_path) {
  Json j;
  j["command"] = command;
  j["channel_path"] = channel_path;
  j["params"] = params;
  j["seed"] = seed;
  j["tool_version"] = kVersion;
  j["timestamp"] = utc_timestamp();
  save_json_file(out_path + ".manifest.json", j);
}

std::vector<double> parse_fraction_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  if (out.empty()) throw Error("empty grid list: " + csv);
  return out;
}

std::vector<WeightCell> parse_weight_list(const std::string& csv) {
  std::vector<WeightCell> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw Error("weights must be mu_p:mu_s pairs, got " + item);
    out.push_back(WeightCell{std::stod(item.substr(0, colon)),
                             std::stod(item.substr(colon + 1))});
  }
  if (out.empty()) throw Error("empty weight list: " + csv);
  return out;
}

// The CSV column schema is stable: consumers plot it directly.
void write_boundary_csv(const std::string& path,
                        const std::vector<BoundaryPoint>& points, bool bits) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "r0,mu_p,mu_s,rs,rp,r1,re,objective,gap,converged\n";
  for (const auto& p : points) {
    out << fmt(display(p.r0_star, bits)) << ',' << fmt(p.mu_p) << ','
        << fmt(p.mu_s) << ',' << fmt(display(p.rs, bits)) << ','
        << fmt(display(p.rp, bits)) << ',' << fmt(display(p.rp + p.rs, bits))
        << ',' << fmt(display(p.rs, bits)) << ','
        << fmt(display(p.objective, bits)) << ',' << fmt(display(p.gap, bits))
        << ',' << (p.converged ? 1 : 0) << '\n';
  }
}

Json aligned_context_json(const AlignedChannel& al, const PsdMatrix& s) {
  Json j;
  j["sigma_y_eff"] = matrix_to_json(al.sigma_y_eff.mat());
  j["sigma_z_eff"] = matrix_to_json(al.sigma_z_eff.mat());
  j["s"] = matrix_to_json(s.mat());
  j["alpha"] = al.alpha;
  return j;
}

AlignedChannel aligned_from_context(const Json& j) {
  AlignedChannel al;
  al.sigma_y_eff =
      PsdMatrix(matrix_from_json(j.at("sigma_y_eff"), "sigma_y_eff"));
  al.sigma_z_eff =
      PsdMatrix(matrix_from_json(j.at("sigma_z_eff"), "sigma_z_eff"));
  al.alpha = j.value("alpha", 0.0);
  al.provenance = "loaded from context";
  return al;
}

struct LoadedChannel {
  ChannelSpec spec;
  WiretapChannel square;
  AlignedChannel aligned;
};

LoadedChannel load_and_align(const std::string& path, double alpha) {
  LoadedChannel lc{channel_from_json(load_json_file(path)), {}, {}};
  // Pad noise scaled by alpha^2: keeps the aligned channel well conditioned
  // while the padded directions stay uninformative.
  lc.square = lc.spec.channel.square()
                  ? lc.spec.channel
                  : square_augment(lc.spec.channel,
                                   defaults::big_noise * alpha * alpha);
  lc.aligned = lc.square.identity_gains() ? as_aligned(lc.square)
                                          : align(lc.square, alpha);
  return lc;
}

PsdMatrix constraint_covariance(const LoadedChannel& lc) {
  if (lc.spec.constraint.kind() == InputConstraint::Kind::Covariance)
    return lc.spec.constraint.s();
  const Eigen::Index t = lc.square.t();
  return PsdMatrix(Matrix::Identity(t, t) *
                   (lc.spec.constraint.p() / double(t)));
}

int cmd_trace(const std::string& channel_path, const std::string& r0_csv,
              const std::string& weights_csv, double alpha, int jobs,
              const CommonOpts& common,
              std::optional<double> power_override = std::nullopt) {
  const std::uint64_t seed = resolve_seed(common.seed);
  SolverConfig cfg;
  cfg.seed = seed;

  const ChannelSpec spec = channel_from_json(load_json_file(channel_path));
  const InputConstraint constraint =
      power_override ? InputConstraint::power(*power_override)
                     : spec.constraint;

  const auto points =
      trace_boundary(spec.channel, constraint, parse_fraction_list(r0_csv),
                     parse_weight_list(weights_csv), cfg, alpha, jobs);

  write_boundary_csv(common.out, points, common.bits);

  // JSON companion with the optimizers, for downstream certification.
  Json jpoints = Json::array();
  const WiretapChannel square =
      spec.channel.square()
          ? spec.channel
          : square_augment(spec.channel, defaults::big_noise * alpha * alpha);
  const AlignedChannel al =
      square.identity_gains() ? as_aligned(square) : align(square, alpha);
  for (const auto& p : points) {
    Json pj = boundary_point_to_json(p);
    pj["context"] = aligned_context_json(al, p.s_used);
    jpoints.push_back(std::move(pj));
  }
  save_json_file(common.out + ".points.json", jpoints);

  write_manifest("trace", channel_path,
                 {{"r0_grid", r0_csv},
                  {"weights", weights_csv},
                  {"alpha", fmt(alpha)},
                  {"jobs", std::to_string(jobs)},
                  {"units", common.bits ? "bits" : "nats"},
                  {"out", common.out}},
                 seed, common.out);

  std::size_t bad = 0;
  for (const auto& p : points)
    if (!p.converged) ++bad;
  std::cout << "wrote " << points.size() << " boundary points to "
            << common.out << " (" << bad << " flagged)\n";
  return bad == 0 ? 0 : 2;
}

int cmd_secrecy_capacity(const std::string& channel_path, double alpha,
                         const CommonOpts& common) {
  const std::uint64_t seed = resolve_seed(common.seed);
  SolverConfig cfg;
  cfg.seed = seed;

  const LoadedChannel lc = load_and_align(channel_path, alpha);

  // Covariance files fix S; power files search the same family of input
  // shapes with tr(S) = P that the sweep commands use.
  PsdMatrix s = constraint_covariance(lc);
  SecrecyResult res;
  if (lc.spec.constraint.kind() == InputConstraint::Kind::Power) {
    bool first = true;
    for (const auto& cand :
         power_constraint_shapes(lc.square.t(), lc.spec.constraint.p())) {
      const auto r = secrecy_capacity(lc.aligned, cand, cfg);
      if (first || r.value > res.value) {
        res = r;
        s = cand;
        first = false;
      }
    }
  } else {
    res = secrecy_capacity(lc.aligned, s, cfg);
  }

  const char* unit = common.bits ? "bits" : "nats";
  std::cout << "secrecy capacity: " << fmt(display(res.value, common.bits))
            << " " << unit << (res.converged ? "" : " (not converged)")
            << "\n";

  Json j;
  j["value"] = display(res.value, common.bits);
  j["units"] = unit;
  j["k_star"] = matrix_to_json(res.k_star.mat());
  j["converged"] = res.converged;
  j["grad_norm"] = res.grad_norm;
  j["context"] = aligned_context_json(lc.aligned, s);
  save_json_file(common.out, j);
  write_manifest("secrecy-capacity", channel_path,
                 {{"alpha", fmt(alpha)}, {"units", unit}, {"out", common.out}},
                 seed, common.out);
  return res.converged ? 0 : 2;
}

int cmd_verify_kkt(const std::string& point_path, double tolerance,
                   const CommonOpts& common) {
  const std::uint64_t seed = resolve_seed(common.seed);
  const Json pj = load_json_file(point_path);
  if (!pj.contains("context"))
    throw Error("point file lacks the channel context block");
  const AlignedChannel al = aligned_from_context(pj.at("context"));
  const PsdMatrix s(matrix_from_json(pj.at("context").at("s"), "s"));
  const PsdMatrix k(matrix_from_json(pj.at("k_opt"), "k_opt"));
  const double mu_p = pj.at("mu_p").get<double>();
  const double mu_s = pj.at("mu_s").get<double>();
  const double r0 = pj.at("r0").get<double>();

  // Certify the objective the solver actually optimized: for mu_s <= mu_p
  // the secret rate is folded into the public message.
  const double mu_s_eff = std::max(mu_s, mu_p);
  const KktCertificate cert = build_certificate(k, al, s, mu_p, mu_s_eff, r0);
  const bool ok = check_certificate(cert, tolerance);

  Json out = certificate_to_json(cert);
  out["pass"] = ok;
  out["tol"] = tolerance;
  out["context"] = pj.at("context");
  out["context"]["k_opt"] = matrix_to_json(k.mat());
  save_json_file(common.out, out);
  write_manifest("verify-kkt", point_path,
                 {{"tol", fmt(tolerance)}, {"out", common.out}}, seed,
                 common.out);

  std::cout << "stationarity residual " << fmt(cert.residual_stationarity)
            << ", case " << to_string(cert.lambda_case) << " / "
            << to_string(cert.beta_case) << ": " << (ok ? "PASS" : "FAIL")
            << "\n";
  return ok ? 0 : 2;
}

int cmd_enhance(const std::string& cert_path, int n_test,
                const CommonOpts& common) {
  const std::uint64_t seed = resolve_seed(common.seed);
  const Json cj = load_json_file(cert_path);
  const AlignedChannel al = aligned_from_context(cj.at("context"));
  const PsdMatrix s(matrix_from_json(cj.at("context").at("s"), "s"));
  const PsdMatrix k(matrix_from_json(cj.at("context").at("k_opt"), "k_opt"));
  const double mu_p = cj.at("mu_p").get<double>();
  const double mu_s = cj.at("mu_s").get<double>();
  const double lambda = cj.at("lambda").get<double>();
  const double beta_z = cj.at("beta_z").get<double>();
  const PsdMatrix m(matrix_from_json(cj.at("m"), "m"));
  const PsdMatrix m_s(matrix_from_json(cj.at("m_s"), "m_s"));
  const std::string beta_case = cj.at("beta_case").get<std::string>();

  Json out;
  out["beta_case"] = beta_case;
  bool ok = true;

  if (beta_case == "r0z-active") {
    // Y-side enhancement, then the extremal-inequality hypothesis chain.
    const EnhancedChannel e =
        enhance(k, al.sigma_y_eff, m, mu_s, EnhanceSource::EnhanceY);
    const EnhancementReport rep =
        verify_enhancement_y(k, al.sigma_y_eff, al.sigma_z_eff, e.sigma_tilde);
    out["sigma_tilde_y"] = matrix_to_json(e.sigma_tilde.mat());
    out["enhancement"] = enhancement_report_to_json(rep);
    ok = rep.pass();

    Rng rng(seed);
    std::vector<PsdMatrix> qs;
    qs.reserve(n_test);
    for (int i = 0; i < n_test; ++i)
      qs.push_back(random_interval_point(rng, s));
    try {
      const ExtremalReport ext = check_extremal_inequality(
          k, e.sigma_tilde, al.sigma_z_eff, mu_s, mu_s + beta_z, m_s, s, qs);
      out["extremal"] = {{"n_tested", ext.n_tested},
                         {"max_violation", ext.max_violation},
                         {"equality_gap_at_kstar", ext.equality_gap_at_kstar},
                         {"pass", ext.pass()}};
      ok = ok && ext.pass();
    } catch (const HypothesisViolated& hv) {
      out["extremal"] = {{"error", hv.what()}, {"pass", false}};
      ok = false;
    }
  } else {
    const double scale = mu_s - mu_p * lambda;
    if (scale <= 1e-12) {
      out["error"] = "nonpositive enhancement scale mu_s - mu_p lambda";
      ok = false;
    } else if (beta_case == "r0-inactive" || beta_case == "both-active") {
      const EnhancedChannel e =
          enhance(k, al.sigma_z_eff, m_s, scale, EnhanceSource::EnhanceZ);
      const EnhancementReport rep = verify_enhancement_z(
          k, s, al.sigma_y_eff, al.sigma_z_eff, e.sigma_tilde);
      out["sigma_tilde_z"] = matrix_to_json(e.sigma_tilde.mat());
      out["enhancement"] = enhancement_report_to_json(rep);
      ok = rep.pass();
    } else {  // r0y-active
      const EnhancedChannel e =
          enhance(k, al.sigma_y_eff, m, scale, EnhanceSource::EnhanceY);
      const EnhancementReport rep = verify_enhancement_y(
          k, al.sigma_y_eff, al.sigma_z_eff, e.sigma_tilde);
      out["sigma_tilde_y"] = matrix_to_json(e.sigma_tilde.mat());
      out["enhancement"] = enhancement_report_to_json(rep);
      ok = rep.pass();
    }
  }

  out["pass"] = ok;
  save_json_file(common.out, out);
  write_manifest("enhance", cert_path,
                 {{"n_test", std::to_string(n_test)}, {"out", common.out}},
                 seed, common.out);
  std::cout << "enhancement checks: " << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? 0 : 2;
}

int cmd_oracle_compare(const std::string& channel_path,
                       const std::string& r0_csv,
                       const std::string& weights_csv, double alpha,
                       const CommonOpts& common) {
  const std::uint64_t seed = resolve_seed(common.seed);
  SolverConfig cfg;
  cfg.seed = seed;

  const LoadedChannel lc = load_and_align(channel_path, alpha);
  const PsdMatrix s = constraint_covariance(lc);
  const auto caps = single_user_capacities(lc.aligned, s);
  const double c_min = std::min(caps.c_y, caps.c_z);

  std::ofstream out(common.out);
  if (!out) throw Error("cannot write " + common.out);
  out << "r0,mu_p,mu_s,solver,oracle,abs_diff,converged\n";

  double worst = 0.0;
  bool all_converged = true;
  for (double frac : parse_fraction_list(r0_csv)) {
    for (const auto& w : parse_weight_list(weights_csv)) {
      const double r0 = frac * c_min;
      const BoundaryPoint pt =
          maximize_weighted(lc.aligned, s, r0, w.mu_p, w.mu_s, cfg);
      const auto oracle = grid_search(
          lc.aligned, s, OracleObjective::weighted(w.mu_p, w.mu_s, r0),
          GridSpec{});
      const double diff = std::abs(pt.objective - oracle.value);
      worst = std::max(worst, diff);
      all_converged = all_converged && pt.converged;
      out << fmt(display(r0, common.bits)) << ',' << fmt(w.mu_p) << ','
          << fmt(w.mu_s) << ',' << fmt(display(pt.objective, common.bits))
          << ',' << fmt(display(oracle.value, common.bits)) << ','
          << fmt(display(diff, common.bits)) << ',' << (pt.converged ? 1 : 0)
          << '\n';
    }
  }
  out.close();

  write_manifest("oracle-compare", channel_path,
                 {{"r0_grid", r0_csv},
                  {"weights", weights_csv},
                  {"alpha", fmt(alpha)},
                  {"out", common.out}},
                 seed, common.out);
  std::cout << "max |solver - oracle| = " << fmt(worst) << " nats\n";
  return (worst <= tol::oracle && all_converged) ? 0 : 2;
}

int cmd_map(const std::string& triple_path, const std::string& direction,
            const CommonOpts& common) {
  const std::uint64_t seed = resolve_seed(common.seed);
  const Json j = load_json_file(triple_path);
  Json out;
  if (direction == "forward") {
    const RateTriple t =
        map_public_to_equivocation(public_triple_from_json(j));
    out = triple_to_json(t);
  } else if (direction == "inverse") {
    const PublicRateTriple p =
        map_equivocation_to_public(rate_triple_from_json(j));
    out = triple_to_json(p);
  } else {
    throw Error("direction must be forward or inverse");
  }
  save_json_file(common.out, out);
  write_manifest("map", triple_path,
                 {{"direction", direction}, {"out", common.out}}, seed,
                 common.out);
  std::cout << out.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Capacity-equivocation region tools for Gaussian MIMO wiretap "
      "channels"};
  app.require_subcommand(1);

  std::string channel_path, point_path, cert_path, triple_path;
  std::string r0_csv = "0,0.25,0.5,0.75";
  std::string weights_csv = "0:1,1:2,1:4,1:1";
  std::string direction = "forward";
  double alpha = defaults::alpha;
  double tolerance = 1e-6;
  double power = 1.0;
  int jobs = 1;
  int n_test = 100;
  CommonOpts common;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "seed for stochastic stages");
    sub->add_flag("--bits", common.bits, "report rates in bits");
    sub->add_option("--out", common.out, "output path");
  };

  auto* trace = app.add_subcommand("trace", "sweep the region boundary");
  trace->add_option("channel", channel_path)->required();
  trace->add_option("--r0-grid", r0_csv, "fractions of min{C_Y,C_Z}");
  trace->add_option("--weights", weights_csv, "mu_p:mu_s pairs");
  trace->add_option("--alpha", alpha, "gain perturbation for general channels");
  trace->add_option("--jobs", jobs, "worker pool size");
  add_common(trace);

  auto* sc =
      app.add_subcommand("secrecy-capacity", "maximum perfectly secret rate");
  sc->add_option("channel", channel_path)->required();
  sc->add_option("--alpha", alpha);
  add_common(sc);

  auto* vk = app.add_subcommand("verify-kkt",
                                "build and check a stationarity certificate");
  vk->add_option("point", point_path)->required();
  vk->add_option("--tol", tolerance, "residual tolerance");
  add_common(vk);

  auto* en = app.add_subcommand(
      "enhance", "channel-enhancement checks for a certificate");
  en->add_option("certificate", cert_path)->required();
  en->add_option("--n-test", n_test, "Gaussian test covariances");
  add_common(en);

  auto* oc = app.add_subcommand(
      "oracle-compare", "solver vs brute-force grid on small channels");
  oc->add_option("channel", channel_path)->required();
  oc->add_option("--r0-grid", r0_csv);
  oc->add_option("--weights", weights_csv);
  oc->add_option("--alpha", alpha);
  add_common(oc);

  auto* mp =
      app.add_subcommand("map", "convert between region descriptions");
  mp->add_option("triple", triple_path)->required();
  mp->add_option("--direction", direction, "forward | inverse");
  add_common(mp);

  auto* pr = app.add_subcommand("power-region",
                                "boundary sweep under a power constraint");
  pr->add_option("channel", channel_path)->required();
  pr->add_option("--power", power, "average power budget")->required();
  pr->add_option("--r0-grid", r0_csv);
  pr->add_option("--weights", weights_csv);
  pr->add_option("--alpha", alpha);
  pr->add_option("--jobs", jobs);
  add_common(pr);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  const auto pick_out = [&](const CLI::App* sub, const char* fallback) {
    if (common.out.empty()) common.out = fallback;
    (void)sub;
  };

  try {
    if (trace->parsed()) {
      pick_out(trace, "boundary.csv");
      return cmd_trace(channel_path, r0_csv, weights_csv, alpha, jobs, common);
    }
    if (sc->parsed()) {
      pick_out(sc, "secrecy.json");
      return cmd_secrecy_capacity(channel_path, alpha, common);
    }
    if (vk->parsed()) {
      pick_out(vk, "certificate.json");
      return cmd_verify_kkt(point_path, tolerance, common);
    }
    if (en->parsed()) {
      pick_out(en, "enhancement.json");
      return cmd_enhance(cert_path, n_test, common);
    }
    if (oc->parsed()) {
      pick_out(oc, "oracle_compare.csv");
      return cmd_oracle_compare(channel_path, r0_csv, weights_csv, alpha,
                                common);
    }
    if (mp->parsed()) {
      pick_out(mp, "mapped.json");
      return cmd_map(triple_path, direction, common);
    }
    if (pr->parsed()) {
      pick_out(pr, "power_boundary.csv");
      return cmd_trace(channel_path, r0_csv, weights_csv, alpha, jobs, common,
                       power);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 3;
}
