// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "delaykit/config.hpp"
#include "delaykit/embedding_analysis.hpp"
#include "delaykit/error.hpp"
#include "delaykit/geometry.hpp"
#include "delaykit/runner.hpp"
#include "delaykit/spectral.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace delaykit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;  // 0: no runtime bound
  std::function<Outcome()> run;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path work_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "delaykit_acceptance" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<StateVector> basis_states(int n) {
  std::vector<StateVector> out;
  for (int p = 1; p <= n; ++p) out.push_back(basis_state(n, p));
  return out;
}

Eigen::MatrixXd gaussian_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) g(i, j) = normal(rng);
  return g;
}

// Criterion 1: every basis-state pair of shift(32) meets r >= M/2.
Outcome lemma_reproduction() {
  const auto config = parse_config("kind = shift\nN = 32\ndelays = 2, 4, 8, 16, 32\n");
  RunOptions options;
  options.out_dir = work_dir("lemma");
  const RunResult result = run_lemma_check(config, options);
  const auto summary = nlohmann::json::parse(slurp(*options.out_dir / "lemma_summary.json"));
  std::size_t violations = 0;
  std::size_t pairs = 0;
  double worst = 1e300;
  for (const auto& row : summary["per_M"]) {
    violations += row["violations"].get<std::size_t>();
    pairs += row["num_pairs"].get<std::size_t>();
    worst = std::min(worst, row["infimum_soft_rank"].get<double>() / row["M"].get<double>());
  }
  return {result.exit_code == kExitOk && violations == 0 && pairs == 5 * 496,
          std::to_string(pairs) + " pairs, " + std::to_string(violations) + " violations, min r/M = " + fmt(worst)};
}

// Criterion 2: circulant oracle against the dense SVD.
Outcome oracle_agreement() {
  double max_diff = 0.0;
  std::size_t cases = 0;
  for (int n = 2; n <= 32; ++n) {
    const FlowSpec flow = make_shift_flow(n);
    for (int m = 1; m <= n; ++m) {
      const DelayParams params = make_delay_params(m, n);
      for (int d = 1; d < n; ++d) {
        const double dense = pair_soft_rank(flow, basis_state(n, 1), basis_state(n, 1 + d), params).value;
        max_diff = std::max(max_diff, std::abs(dense - shift_system_oracle(n, m, d).value));
        ++cases;
      }
    }
  }
  return {max_diff <= 1e-10, std::to_string(cases) + " cases, max |diff| = " + fmt(max_diff)};
}

// Criterion 3 (and the single-thread half of 7): scaling of median epsilon.
Outcome conditioning_scaling() {
  const auto config = parse_config("kind = shift\nN = 256\ndelays = 8, 16, 32, 64\ndraws = 200\nseed = 7\n");
  RunOptions options;
  options.out_dir = work_dir("scaling");
  const RunResult result = run_scaling_study(config, options);
  const auto study = nlohmann::json::parse(slurp(*options.out_dir / "scaling.json"));
  const double slope = study["fit"]["slope"].get<double>();
  const bool decreasing = study["median_strictly_decreasing"].get<bool>();
  std::istringstream csv(slurp(*options.out_dir / "scaling.csv"));
  std::string line, medians;
  std::getline(csv, line);
  while (std::getline(csv, line)) {
    std::istringstream fields(line);
    std::string m, inf, med;
    std::getline(fields, m, ',');
    std::getline(fields, inf, ',');
    std::getline(fields, med, ',');
    medians += (medians.empty() ? "" : " ") + m + ":" + med;
  }
  return {result.exit_code == kExitOk && slope >= -0.65 && slope <= -0.35 && decreasing,
          "slope = " + fmt(slope) + " (window [-0.65, -0.35]), medians " + medians +
              (decreasing ? ", strictly decreasing" : ", NOT strictly decreasing")};
}

// Criterion 4: exhaustive Rademacher mean of the isometry ratio.
Outcome isotropy_identity() {
  double max_dev = 0.0;
  std::size_t pairs = 0;
  for (int n = 2; n <= 12; ++n) {
    const FlowSpec flow = make_shift_flow(n);
    const DelayParams params = make_delay_params((n + 1) / 2, n);
    const PairwiseSystem system(flow, basis_states(n), params, 1);
    std::vector<double> sums(system.num_pairs(), 0.0);
    Eigen::VectorXd a(n);
    const unsigned patterns = 1u << n;
    for (unsigned mask = 0; mask < patterns; ++mask) {
      for (int i = 0; i < n; ++i) a(i) = (mask >> i) & 1u ? 1.0 : -1.0;
      const auto r = system.ratios(user_coeffs(a));
      for (std::size_t k = 0; k < r.size(); ++k) sums[k] += r[k];
    }
    for (double s : sums) max_dev = std::max(max_dev, std::abs(s / patterns - 1.0));
    pairs += sums.size();
  }
  return {max_dev <= 1e-12, std::to_string(pairs) + " pairs over N = 2..12, max |mean - 1| = " + fmt(max_dev)};
}

// Criterion 5: algebraic identities.
Outcome algebraic_identities() {
  std::mt19937_64 rng(5);
  double delay_err = 0.0;
  std::size_t reshape_mismatches = 0;
  double scale_err = 0.0;
  std::size_t range_violations = 0;

  for (int t = 0; t < 200; ++t) {
    const int n = 2 + t % 11;
    const int m = 1 + static_cast<int>(rng() % (2 * n));
    Eigen::MatrixXd phi = gaussian_matrix(rng, n, n) / std::sqrt(static_cast<double>(n));
    phi += Eigen::MatrixXd::Identity(n, n);
    const FlowSpec flow = t % 2 ? make_linear_flow(phi) : make_shift_flow(n);
    const DelayParams params = make_delay_params(m, n);
    const StateVector x = gaussian_matrix(rng, n, 1);
    const StateVector y = gaussian_matrix(rng, n, 1);
    const auto alpha = draw_coeffs(t % 3 ? Ensemble::rademacher : Ensemble::gaussian, n, 11, t);

    const Eigen::MatrixXd gx = trajectory_matrix(flow, x, params).g;
    const Eigen::VectorXd f = delay_vector(flow, x, alpha, params);
    delay_err = std::max(delay_err, (f - gx * alpha.alpha).norm() / f.norm());

    // Same additions in the same order: the reshape must not change a bit.
    const Eigen::MatrixXd diff = gx - trajectory_matrix(flow, y, params).g;
    const Eigen::VectorXd vdiff = trajectory_vector(flow, x, params).entries - trajectory_vector(flow, y, params).entries;
    double frob = 0.0;
    for (Eigen::Index r = 0; r < diff.rows(); ++r)
      for (Eigen::Index c = 0; c < diff.cols(); ++c) frob += diff(r, c) * diff(r, c);
    double vec = 0.0;
    for (Eigen::Index k = 0; k < vdiff.size(); ++k) vec += vdiff(k) * vdiff(k);
    if (frob != vec) ++reshape_mismatches;
  }

  for (int t = 0; t < 1000; ++t) {
    const int rows = 1 + static_cast<int>(rng() % 20);
    const int cols = 1 + static_cast<int>(rng() % 20);
    const Eigen::MatrixXd g = gaussian_matrix(rng, rows, cols);
    const double r = soft_rank(g).value;
    if (r < 1.0 - 1e-12 || r > std::min(rows, cols) * (1.0 + 1e-12)) ++range_violations;
    if (t < 200) {
      const double c = std::exp(std::uniform_real_distribution<double>(-20.0, 20.0)(rng));
      scale_err = std::max(scale_err, std::abs(soft_rank(c * g).value - r) / r);
    }
  }
  return {delay_err <= 1e-12 && reshape_mismatches == 0 && scale_err <= 1e-12 && range_violations == 0,
          "F=G*alpha rel err " + fmt(delay_err) + ", reshape mismatches " + std::to_string(reshape_mismatches) +
              ", scale err " + fmt(scale_err) + ", range violations " + std::to_string(range_violations) + "/1000"};
}

// Criterion 6: reach, arc length and inverse Lyapunov exponent.
Outcome geometry_estimators() {
  PointCloud circle, tangents, unit;
  for (int k = 0; k < 500; ++k) {
    const double t = 2.0 * std::numbers::pi * k / 500;
    circle.push_back(Eigen::Vector2d(3.0 * std::cos(t), 3.0 * std::sin(t)));
    tangents.push_back(Eigen::Vector2d(-std::sin(t), std::cos(t)));
  }
  for (int k = 0; k < 1000; ++k) {
    const double t = 2.0 * std::numbers::pi * k / 1000;
    unit.push_back(Eigen::Vector2d(std::cos(t), std::sin(t)));
  }
  const double reach = reach_estimate(circle, tangents).value;
  const double length = curve_volume(unit, true);
  const double reach_err = std::abs(reach - 3.0) / 3.0;
  const double length_err = std::abs(length - 2.0 * std::numbers::pi) / (2.0 * std::numbers::pi);

  // Symmetric flow with mixed expansion and contraction.
  std::mt19937_64 rng(6);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian_matrix(rng, 5, 5));
  const Eigen::MatrixXd q = qr.householderQ();
  const Eigen::VectorXd spectrum = (Eigen::VectorXd(5) << 1.3, 0.9, 0.6, -0.45, 1.1).finished();
  const FlowSpec flow = make_linear_flow(q * spectrum.asDiagonal() * q.transpose());
  const double expected = std::log(flow.inverse_spectral_norm());
  const double lambda = lyapunov_exponent_inverse_flow(flow, StateVector::Ones(5), 2000, 1e-8).lambda;
  const double lyap_err = std::abs(lambda - expected);

  return {reach_err <= 0.01 && length_err <= 1e-3 && lyap_err <= 1e-4,
          "reach " + fmt(reach) + " (rel err " + fmt(reach_err) + "), arc length rel err " + fmt(length_err) +
              ", lambda " + fmt(lambda) + " vs ln sigma_max(inv) " + fmt(expected) + " (|diff| " + fmt(lyap_err) + ")"};
}

int run_cli(const std::string& args) {
  const std::string command = std::string(DELAYKIT_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Criterion 7: every data file is byte-identical between 1 and 4 threads.
Outcome determinism() {
  const auto dir = work_dir("determinism");
  std::ofstream(dir / "lemma.cfg") << "kind = shift\nN = 32\ndelays = 2, 4, 8, 16, 32\n";
  std::ofstream(dir / "scaling.cfg") << "kind = shift\nN = 256\ndelays = 8, 16, 32, 64\ndraws = 200\nseed = 7\n";
  std::ofstream(dir / "report.cfg") << "kind = shift\nN = 48\ndelays = 12\ndraws = 100\nseed = 21\n"
                                       "ensemble = gaussian\ntheorem_c = 1\n";
  std::size_t compared = 0;
  std::vector<std::string> differing;
  for (const auto& [cmd, cfg] : {std::pair{"lemma-check", "lemma"}, std::pair{"scaling", "scaling"},
                                 std::pair{"report", "report"}}) {
    std::vector<fs::path> outs;
    for (int threads : {1, 4}) {
      const fs::path out = dir / (std::string(cfg) + "_t" + std::to_string(threads));
      const int code = run_cli(std::string(cmd) + " --config " + (dir / (std::string(cfg) + ".cfg")).string() +
                               " --out " + out.string() + " --threads " + std::to_string(threads));
      if (code != 0) return {false, std::string(cmd) + " exited with " + std::to_string(code)};
      outs.push_back(out);
    }
    const auto manifest = nlohmann::json::parse(slurp(outs[0] / "manifest.json"));
    for (const auto& entry : manifest["outputs"]) {
      const std::string name = entry["file"];
      ++compared;
      if (slurp(outs[0] / name) != slurp(outs[1] / name)) differing.push_back(std::string(cmd) + "/" + name);
    }
  }
  std::string detail = std::to_string(compared) + " data files compared";
  for (const auto& d : differing) detail += ", differs: " + d;
  return {differing.empty() && compared >= 7, detail};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "lemma bound on shift(32), M in {2..32}", 10.0, lemma_reproduction},
      {2, "circulant oracle vs dense SVD", 60.0, oracle_agreement},
      {3, "conditioning scaling on shift(256)", 300.0, conditioning_scaling},
      {4, "exhaustive Rademacher isotropy", 30.0, isotropy_identity},
      {5, "algebraic identities", 30.0, algebraic_identities},
      {6, "geometry estimators", 10.0, geometry_estimators},
      {7, "thread-count determinism of data files", 0.0, determinism},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.budget_s == 0.0 || seconds <= c.budget_s;
    const bool pass = outcome.pass && in_time;
    failures += pass ? 0 : 1;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.name << " | " << outcome.detail
              << " | " << fmt(seconds) << " s";
    if (c.budget_s > 0.0) std::cout << " (budget " << fmt(c.budget_s) << " s" << (in_time ? ")" : ", EXCEEDED)");
    std::cout << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
