#include "delaykit/runner.hpp"

#include "delaykit/embedding_analysis.hpp"
#include "delaykit/error.hpp"
#include "delaykit/geometry.hpp"
#include "delaykit/spectral.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

namespace delaykit {

namespace {

using Json = nlohmann::ordered_json;

// Shortest text that round-trips the double; fixed so reruns are byte-identical.
std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

Json json_num(double v) {
  if (!std::isfinite(v)) return Json(nullptr);
  return Json(v);
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class OutputSet {
 public:
  OutputSet(const ExperimentConfig& config, const RunOptions& options, std::string command)
      : config_(config), options_(options), command_(std::move(command)) {
    result_.out_dir = options.out_dir.value_or(config.outputs);
    std::filesystem::create_directories(result_.out_dir);
  }

  void write(const std::string& name, const std::string& contents) {
    const auto path = result_.out_dir / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::invalid_argument, "cannot write '" + path.string() + "'");
    out << contents;
    out.close();
    checksums_.push_back({{"file", name}, {"sha256", sha256_hex(contents)}, {"bytes", contents.size()}});
    result_.data_files.push_back(path);
  }

  void write_json(const std::string& name, const Json& j) { write(name, j.dump(2) + "\n"); }

  RunResult finish(int exit_code) {
    Json manifest;
    manifest["artifact"] = "delaykit";
    manifest["version"] = std::string(kVersion);
    manifest["command"] = command_;
    manifest["timestamp"] = utc_timestamp();
    Json echo = Json::object();
    for (const auto& [k, v] : config_.entries) echo[k] = v;
    manifest["config"] = echo;
    Json overrides = Json::object();
    if (options_.seed) overrides["seed"] = *options_.seed;
    if (options_.out_dir) overrides["out"] = options_.out_dir->string();
    manifest["overrides"] = overrides;
    manifest["threads"] = options_.threads;
    manifest["exit_code"] = exit_code;
    manifest["outputs"] = checksums_;
    const auto path = result_.out_dir / "manifest.json";
    std::ofstream(path, std::ios::binary | std::ios::trunc) << manifest.dump(2) << "\n";
    result_.manifest = path;
    result_.exit_code = exit_code;
    return std::move(result_);
  }

  void message(std::string m) { result_.messages.push_back(std::move(m)); }

 private:
  const ExperimentConfig& config_;
  const RunOptions& options_;
  std::string command_;
  RunResult result_;
  Json checksums_ = Json::array();
};

std::uint64_t effective_seed(const ExperimentConfig& config, const RunOptions& options) {
  return options.seed.value_or(config.seed);
}

// 1-based index of a canonical basis vector, or 0 if the state is not one.
int basis_index(const StateVector& x) {
  int found = 0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (x(k) == 1.0 && found == 0) {
      found = static_cast<int>(k) + 1;
    } else if (x(k) != 0.0) {
      return 0;
    }
  }
  return found;
}

bool meets_half_bound(double soft_rank, int m) {
  return soft_rank >= 0.5 * m * (1.0 - 1e-12);
}

Json pair_json(std::pair<std::size_t, std::size_t> p) { return Json::array({p.first, p.second}); }

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int k = 0; k < len; ++k) {
    out.push_back(hex[digest[k] >> 4]);
    out.push_back(hex[digest[k] & 0xF]);
  }
  return out;
}

RunResult run_lemma_check(const ExperimentConfig& config, const RunOptions& options) {
  if (config.kind != SystemKind::shift) {
    throw Error(ErrorKind::unsupported, "lemma-check only applies to kind = shift");
  }
  const FlowSpec flow = build_flow(config);
  const SampleSet samples = build_samples(config, flow);
  const int n = config.ambient_dim;
  std::vector<int> position;
  for (const auto& s : samples.states) {
    const int p = basis_index(s);
    if (p == 0) throw Error(ErrorKind::unsupported, "lemma-check needs canonical basis-state samples");
    position.push_back(p);
  }
  for (const int m : config.delays) {
    if (m > n) throw Error(ErrorKind::unsupported, "lemma-check needs every M <= N");
  }

  OutputSet out(config, options, "lemma-check");
  std::ostringstream csv;
  csv << "M,i,j,d,soft_rank,oracle_value,oracle_abs_diff,bound_M_over_2,satisfied\n";
  Json per_m = Json::array();
  bool all_ok = true;
  for (const int m : config.delays) {
    const DelayParams params = make_delay_params(m, n);
    const PairScanResult scan = infimum_soft_rank(flow, samples.states, params, true, options.threads);
    std::size_t violations = 0;
    std::size_t disagreements = 0;
    double max_diff = 0.0;
    for (const auto& pr : *scan.per_pair) {
      const int d = ((position[pr.j] - position[pr.i]) % n + n) % n;
      const double oracle = shift_system_oracle(n, m, d).value;
      const double diff = std::abs(pr.soft_rank - oracle);
      const bool satisfied = meets_half_bound(pr.soft_rank, m);
      violations += satisfied ? 0 : 1;
      disagreements += diff <= 1e-10 ? 0 : 1;
      max_diff = std::max(max_diff, diff);
      csv << m << ',' << pr.i << ',' << pr.j << ',' << d << ',' << num(pr.soft_rank) << ','
          << num(oracle) << ',' << num(diff) << ',' << num(0.5 * m) << ','
          << (satisfied ? "true" : "false") << '\n';
    }
    all_ok = all_ok && violations == 0 && disagreements == 0;
    per_m.push_back({{"M", m},
                     {"infimum_soft_rank", json_num(scan.infimum)},
                     {"argmin_pair", pair_json(scan.argmin_pair)},
                     {"bound_M_over_2", 0.5 * m},
                     {"num_pairs", scan.num_pairs},
                     {"violations", violations},
                     {"oracle_disagreements", disagreements},
                     {"max_oracle_abs_diff", json_num(max_diff)}});
    out.message("M=" + std::to_string(m) + " infimum=" + num(scan.infimum) + " violations=" +
                std::to_string(violations) + " oracle_disagreements=" + std::to_string(disagreements));
  }
  out.write("lemma_pairs.csv", csv.str());
  Json summary;
  summary["command"] = "lemma-check";
  summary["N"] = n;
  summary["num_samples"] = samples.states.size();
  summary["oracle_tolerance"] = 1e-10;
  summary["per_M"] = per_m;
  summary["all_satisfied"] = all_ok;
  out.write_json("lemma_summary.json", summary);
  return out.finish(all_ok ? kExitOk : kExitAssertion);
}

RunResult run_scaling_study(const ExperimentConfig& config, const RunOptions& options) {
  if (config.delays.size() < 3) {
    throw Error(ErrorKind::config, "key 'delays': scaling needs at least 3 values of M");
  }
  const FlowSpec flow = build_flow(config);
  const SampleSet samples = build_samples(config, flow);
  MonteCarloOptions mc;
  mc.ensemble = config.ensemble;
  mc.num_draws = config.draws;
  mc.base_seed = effective_seed(config, options);
  mc.compute_infimum = true;
  mc.threads = options.threads;
  const ScalingStudy study = scaling_study(flow, samples.states, config.delays, mc);

  bool basis_shift = config.kind == SystemKind::shift;
  for (const auto& s : samples.states) basis_shift = basis_shift && basis_index(s) != 0;

  OutputSet out(config, options, "scaling");
  std::ostringstream csv;
  csv << "M,infimum_soft_rank,eps_median,eps_q05,eps_q95,eps_max,eps_mean\n";
  bool decreasing = true;
  bool bound_ok = true;
  Json rows = Json::array();
  for (std::size_t k = 0; k < study.rows.size(); ++k) {
    const ScalingRow& r = study.rows[k];
    if (k > 0 && !(r.eps_median < study.rows[k - 1].eps_median)) decreasing = false;
    if (basis_shift && r.num_delays <= config.ambient_dim && !meets_half_bound(r.infimum_soft_rank, r.num_delays)) {
      bound_ok = false;
    }
    csv << r.num_delays << ',' << num(r.infimum_soft_rank) << ',' << num(r.eps_median) << ','
        << num(r.eps_q05) << ',' << num(r.eps_q95) << ',' << num(r.eps_max) << ','
        << num(r.eps_mean) << '\n';
    rows.push_back({{"M", r.num_delays},
                    {"exceeds_ambient", r.exceeds_ambient},
                    {"eps_q25", json_num(r.eps_q25)},
                    {"eps_q75", json_num(r.eps_q75)}});
    out.message("M=" + std::to_string(r.num_delays) + " median_eps=" + num(r.eps_median) +
                " infimum_soft_rank=" + num(r.infimum_soft_rank));
  }
  out.write("scaling.csv", csv.str());

  Json j;
  j["command"] = "scaling";
  j["N"] = config.ambient_dim;
  j["ensemble"] = std::string(to_string(study.ensemble));
  j["num_draws"] = study.num_draws;
  j["base_seed"] = study.base_seed;
  j["num_samples"] = study.num_samples;
  j["delays"] = config.delays;
  j["fit"] = {{"x", "log M"},
              {"y", "log median epsilon"},
              {"slope", json_num(study.fit.slope)},
              {"slope_stderr", json_num(study.fit.slope_stderr)},
              {"intercept", json_num(study.fit.intercept)}};
  j["median_strictly_decreasing"] = decreasing;
  j["infimum_bound_checked"] = basis_shift;
  j["infimum_bound_satisfied"] = bound_ok;
  j["rows"] = rows;
  out.write_json("scaling.json", j);
  out.message("slope=" + num(study.fit.slope) + " +- " + num(study.fit.slope_stderr));
  return out.finish(bound_ok ? kExitOk : kExitAssertion);
}

RunResult run_full_report(const ExperimentConfig& config, const RunOptions& options) {
  if (config.delays.size() != 1) {
    throw Error(ErrorKind::config, "key 'delays': report needs exactly one value of M");
  }
  const FlowSpec flow = build_flow(config);
  const SampleSet samples = build_samples(config, flow);
  const int n = config.ambient_dim;
  const DelayParams params = make_delay_params(config.delays.front(), n);
  const std::uint64_t seed = effective_seed(config, options);

  MonteCarloOptions mc;
  mc.ensemble = config.ensemble;
  mc.num_draws = config.draws;
  mc.base_seed = seed;
  mc.compute_infimum = false;
  mc.threads = options.threads;

  const PairwiseSystem system(flow, samples.states, params, options.threads);
  std::vector<Eigen::MatrixXd> mats;
  for (std::size_t i = 0; i < system.num_samples(); ++i) mats.push_back(system.trajectory(i));
  const PairScanResult scan = scan_pair_soft_ranks(mats, true, options.threads);
  EmbeddingReport report = monte_carlo(system, n, mc);
  report.infimum_soft_rank = scan;

  OutputSet out(config, options, "report");

  // embedding_report.json
  Json rep;
  rep["command"] = "report";
  rep["ensemble"] = std::string(to_string(report.ensemble));
  rep["N"] = n;
  rep["M"] = params.num_delays;
  rep["M_exceeds_N"] = params.exceeds_ambient;
  rep["sampling_interval"] = flow.sampling_interval();
  rep["num_samples"] = report.num_samples;
  rep["sample_period"] = samples.period ? Json(*samples.period) : Json(nullptr);
  rep["num_draws"] = report.num_draws;
  rep["base_seed"] = report.base_seed;
  rep["epsilon_definition"] = "max over sampled pairs of |ratio - 1|, ratio against trajectory vectors";
  Json q = Json::object();
  const char* qnames[] = {"q05", "q25", "q50", "q75", "q95"};
  for (std::size_t k = 0; k < kReportQuantiles.size(); ++k) q[qnames[k]] = json_num(report.quantiles[k]);
  rep["eps_quantiles"] = q;
  rep["eps_median"] = json_num(report.median());
  rep["eps_mean"] = json_num(report.eps_mean);
  rep["eps_max"] = json_num(report.eps_max);
  Json fr = Json::array();
  for (const double t : config.target_eps) fr.push_back({{"target_eps", t}, {"failure_rate", report.failure_rate(t)}});
  rep["failure_rate"] = fr;
  rep["infimum_soft_rank"] = {{"value", json_num(scan.infimum)},
                              {"argmin_pair", pair_json(scan.argmin_pair)},
                              {"num_pairs", scan.num_pairs},
                              {"num_samples", scan.num_samples},
                              {"note", "minimum over sampled pairs; upper-bounds the attractor infimum"}};
  Json draws = Json::array();
  for (const auto& c : report.per_draw) {
    draws.push_back({{"draw", c.draw_index}, {"epsilon", json_num(c.epsilon)}, {"worst_pair", pair_json(c.worst_pair)}});
  }
  rep["per_draw"] = draws;
  out.write_json("embedding_report.json", rep);

  // pairs.csv: soft-ranks plus ratios for draw 0 and the mean over draws.
  const std::size_t pairs = system.num_pairs();
  std::vector<double> ratio_sum(pairs, 0.0);
  std::vector<double> ratio0;
  for (std::size_t d = 0; d < config.draws; ++d) {
    const auto r = system.ratios(draw_coeffs(config.ensemble, n, seed, d));
    if (d == 0) ratio0 = r;
    for (std::size_t k = 0; k < pairs; ++k) ratio_sum[k] += r[k];
  }
  std::ostringstream csv;
  csv << "i,j,soft_rank,trajectory_dist_sq,state_dist_sq,ratio_draw0,state_ratio_draw0,ratio_mean\n";
  for (std::size_t k = 0; k < pairs; ++k) {
    const auto& pr = (*scan.per_pair)[k];
    const double traj_sq = system.denominator(pr.i, pr.j);
    const double state_sq = (samples.states[pr.i] - samples.states[pr.j]).squaredNorm();
    csv << pr.i << ',' << pr.j << ',' << num(pr.soft_rank) << ',' << num(traj_sq) << ','
        << num(state_sq) << ',' << num(ratio0[k]) << ',' << num(ratio0[k] * traj_sq / state_sq) << ','
        << num(ratio_sum[k] / static_cast<double>(config.draws)) << '\n';
  }
  out.write("pairs.csv", csv.str());

  // geometry.json
  Json geo;
  const double dim = config.theorem ? config.theorem->dim : 1.0;
  std::optional<ManifoldGeometry> manifold;
  try {
    manifold = curve_geometry(trajectory_manifold_points(flow, samples.states, params),
                              samples.period.has_value(), dim, options.threads);
    geo["trajectory_manifold"] = {{"status", "ok"},
                                  {"ambient_dim", static_cast<long long>(n) * params.num_delays},
                                  {"dim", manifold->dim},
                                  {"num_points", manifold->num_points},
                                  {"closed", manifold->closed},
                                  {"volume", json_num(manifold->volume)},
                                  {"volume_bias", manifold->volume_bias},
                                  {"reach", json_num(manifold->reach)},
                                  {"reach_pairs", manifold->reach_pairs},
                                  {"reach_excluded_pairs", manifold->reach_excluded_pairs},
                                  {"reach_bias", manifold->reach_bias}};
  } catch (const Error& e) {
    geo["trajectory_manifold"] = {{"status", std::string(to_string(e.kind()))}, {"message", e.what()}};
  }

  const LyapunovEstimate lyap = lyapunov_exponent_inverse_flow(flow, samples.states.front(),
                                                               config.lyapunov_steps,
                                                               config.lyapunov_perturbation);
  geo["inverse_lyapunov"] = {{"lambda", json_num(lyap.lambda)},
                             {"num_steps", lyap.num_steps},
                             {"num_probes", lyap.num_probes},
                             {"perturbation", config.lyapunov_perturbation},
                             {"log_sigma_max_inverse", json_num(std::log(flow.inverse_spectral_norm()))},
                             {"window_growth", json_num(std::exp(lyap.lambda * (params.num_delays - 1)))}};

  // Redundancy: how parallel consecutive chords are at the worst soft-rank pair.
  Json redundancy = nullptr;
  if (params.num_delays >= 2) {
    const Eigen::MatrixXd diff = system.trajectory(scan.argmin_pair.first) - system.trajectory(scan.argmin_pair.second);
    double cos_sum = 0.0;
    for (int m = 0; m + 1 < params.num_delays; ++m) {
      const double denom = diff.row(m).norm() * diff.row(m + 1).norm();
      cos_sum += denom > 0.0 ? std::abs(diff.row(m).dot(diff.row(m + 1))) / denom : 0.0;
    }
    redundancy = json_num(cos_sum / (params.num_delays - 1));
  }
  geo["chord_redundancy_at_argmin"] = redundancy;

  const int length = config.series_length > 0 ? config.series_length : std::max(64, 8 * n);
  const auto series = time_series(generate_orbit(flow, samples.states.front(), length),
                                  draw_coeffs(config.ensemble, n, seed, 0));
  try {
    const DelaySelection sel = delay_selection(series, config.mi_bins);
    geo["delay_selection"] = {{"status", "ok"},
                              {"series_length", length},
                              {"coefficients", "draw 0"},
                              {"autocorr_first_zero", sel.autocorr_first_zero ? Json(*sel.autocorr_first_zero) : Json(nullptr)},
                              {"mi_first_min", sel.mi_first_min ? Json(*sel.mi_first_min) : Json(nullptr)},
                              {"num_bins", sel.num_bins}};
  } catch (const Error& e) {
    geo["delay_selection"] = {{"status", std::string(to_string(e.kind()))}, {"message", e.what()}};
  }
  out.write_json("geometry.json", geo);

  if (config.theorem) {
    Json tc;
    const double eps = config.theorem->epsilon.value_or(report.median());
    tc["epsilon_source"] = config.theorem->epsilon ? "config" : "measured median";
    try {
      if (!manifold) throw Error(ErrorKind::no_estimate, "trajectory manifold geometry unavailable");
      const TheoremCheck check = theorem_condition_check(scan.infimum, eps, config.theorem->dim,
                                                         manifold->volume, manifold->reach,
                                                         config.theorem->c_user);
      tc["status"] = "ok";
      tc["r_A"] = check.r_A;
      tc["epsilon"] = check.epsilon;
      tc["D_A"] = check.D_A;
      tc["volume"] = check.volume;
      tc["reach"] = check.reach;
      tc["c_user"] = check.c_user;
      tc["log_argument"] = json_num(check.log_argument);
      tc["soft_rank_rhs"] = json_num(check.soft_rank_rhs);
      tc["volume_rhs"] = json_num(check.volume_rhs);
      tc["soft_rank_condition"] = check.soft_rank_condition;
      tc["volume_condition"] = check.volume_condition;
      tc["satisfied"] = check.satisfied;
    } catch (const Error& e) {
      tc["status"] = std::string(to_string(e.kind()));
      tc["message"] = e.what();
      tc["satisfied"] = false;
    }
    tc["note"] = "sufficient condition under the supplied constant only";
    out.write_json("theorem_check.json", tc);
  }

  out.message("median_eps=" + num(report.median()) + " max_eps=" + num(report.eps_max) +
              " infimum_soft_rank=" + num(scan.infimum));
  return out.finish(kExitOk);
}

}  // namespace delaykit
