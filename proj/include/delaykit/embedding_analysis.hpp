#pragma once

#include "delaykit/delay_map.hpp"
#include "delaykit/dynamics.hpp"
#include "delaykit/spectral.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace delaykit {

/// One pair's view of the delay map.
///
/// `ratio` is the stable-embedding quotient against trajectory vectors,
/// ||F(x) - F(y)||^2 / ||x~ - y~||^2. `state_ratio` divides by ||x - y||^2
/// instead and is only a secondary diagnostic.
struct PairDiagnostics {
  std::pair<std::size_t, std::size_t> pair{0, 0};
  double ratio = 0.0;
  double state_ratio = 0.0;
  double soft_rank = 0.0;
  std::vector<double> chord_norms;  // ||Phi^{-m}x - Phi^{-m}y||, m = 0..M-1
};

/// Tightest epsilon for which (1 - eps) <= ratio <= (1 + eps) on every
/// scanned pair.
struct ConditioningResult {
  double epsilon = 0.0;
  std::pair<std::size_t, std::size_t> worst_pair{0, 0};
  std::optional<std::uint64_t> alpha_seed;
  std::uint64_t draw_index = 0;
};

inline constexpr std::array<double, 5> kReportQuantiles{0.05, 0.25, 0.5, 0.75, 0.95};

struct EmbeddingReport {
  std::vector<ConditioningResult> per_draw;
  std::size_t num_draws = 0;
  Ensemble ensemble = Ensemble::rademacher;
  std::uint64_t base_seed = 0;
  std::array<double, 5> quantiles{};  // at kReportQuantiles
  double eps_mean = 0.0;
  double eps_max = 0.0;
  std::optional<PairScanResult> infimum_soft_rank;
  int ambient_dim = 0;
  DelayParams params;
  std::size_t num_samples = 0;

  double median() const { return quantiles[2]; }
  /// Fraction of draws whose epsilon exceeds target_eps.
  double failure_rate(double target_eps) const;
};

/// Interpolated quantile (linear between order statistics, the usual
/// "type 7" rule) of an unsorted sample.
double quantile(std::vector<double> values, double q);

/// Trajectory matrices of a sample set together with the per-pair
/// denominators ||G_x - G_y||_F^2, which do not depend on the coefficient
/// draw and are shared across a whole Monte Carlo run.
class PairwiseSystem {
 public:
  PairwiseSystem(const FlowSpec& flow, std::vector<StateVector> samples, DelayParams params,
                 unsigned threads = 1);

  std::size_t num_samples() const noexcept { return samples_.size(); }
  std::size_t num_pairs() const noexcept { return denominators_.size(); }
  const DelayParams& params() const noexcept { return params_; }
  const std::vector<StateVector>& samples() const noexcept { return samples_; }
  const Eigen::MatrixXd& trajectory(std::size_t i) const { return trajectories_[i]; }
  double denominator(std::size_t i, std::size_t j) const;

  /// Conditioning of F_alpha over every pair, evaluated on one thread.
  ConditioningResult conditioning(const MeasurementCoeffs& alpha) const;

  /// All pair ratios in lexicographic pair order.
  std::vector<double> ratios(const MeasurementCoeffs& alpha) const;

 private:
  std::size_t pair_index(std::size_t i, std::size_t j) const;
  Eigen::MatrixXd delay_vectors(const MeasurementCoeffs& alpha) const;

  std::vector<StateVector> samples_;
  DelayParams params_;
  int ambient_dim_ = 0;
  std::vector<Eigen::MatrixXd> trajectories_;
  std::vector<std::size_t> row_offset_;
  std::vector<double> denominators_;
};

PairDiagnostics isometry_ratio(const FlowSpec& flow, const StateVector& x, const StateVector& y,
                               const MeasurementCoeffs& alpha, const DelayParams& params);

ConditioningResult conditioning(const FlowSpec& flow, const std::vector<StateVector>& samples,
                                const MeasurementCoeffs& alpha, const DelayParams& params);

/// Epsilon and worst pair of an explicit list of ratios, given in
/// lexicographic pair order alongside their pairs.
ConditioningResult conditioning_from_ratios(
    const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
    const std::vector<double>& ratios);

struct MonteCarloOptions {
  Ensemble ensemble = Ensemble::rademacher;
  std::size_t num_draws = 1;
  std::uint64_t base_seed = 0;
  bool compute_infimum = true;
  unsigned threads = 1;
};

/// Draw d uses coefficients keyed by (base_seed, d).
EmbeddingReport monte_carlo(const FlowSpec& flow, const std::vector<StateVector>& samples,
                            const DelayParams& params, const MonteCarloOptions& options);
EmbeddingReport monte_carlo(const PairwiseSystem& system, int ambient_dim,
                            const MonteCarloOptions& options);

struct ScalingRow {
  int num_delays = 0;
  bool exceeds_ambient = false;
  double infimum_soft_rank = 0.0;
  double eps_median = 0.0;
  double eps_q05 = 0.0;
  double eps_q25 = 0.0;
  double eps_q75 = 0.0;
  double eps_q95 = 0.0;
  double eps_mean = 0.0;
  double eps_max = 0.0;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;  // NaN with only two points
};

/// Ordinary least squares y = intercept + slope * x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct ScalingStudy {
  std::vector<ScalingRow> rows;
  LineFit fit;  // log(median eps) against log(M)
  Ensemble ensemble = Ensemble::rademacher;
  std::size_t num_draws = 0;
  std::uint64_t base_seed = 0;
  std::size_t num_samples = 0;
};

ScalingStudy scaling_study(const FlowSpec& flow, const std::vector<StateVector>& samples,
                           const std::vector<int>& delay_list, const MonteCarloOptions& options);

struct TheoremCheck {
  double r_A = 0.0;
  double epsilon = 0.0;
  double D_A = 0.0;
  double volume = 0.0;
  double reach = 0.0;
  double c_user = 0.0;
  double log_argument = 0.0;     // r_A^{1/2} V^{1/D_A} / tau
  double soft_rank_rhs = 0.0;    // c_user eps^-2 D_A log(log_argument)
  double volume_rhs = 0.0;       // c_user tau^D_A
  bool soft_rank_condition = false;
  bool volume_condition = false;
  bool satisfied = false;
};

/// Evaluates the sufficient soft-rank condition and the volume assumption
/// with an explicit caller-supplied constant. Reports only whether the
/// condition holds; it says nothing about the embedding itself.
TheoremCheck theorem_condition_check(double r_A, double epsilon, double D_A, double volume,
                                     double reach, double c_user);

}  // namespace delaykit
