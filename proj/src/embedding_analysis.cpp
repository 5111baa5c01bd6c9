#include "delaykit/embedding_analysis.hpp"

#include "delaykit/error.hpp"
#include "delaykit/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace delaykit {

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorKind::invalid_argument, "quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorKind::invalid_argument, "quantile level outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

double EmbeddingReport::failure_rate(double target_eps) const {
  if (per_draw.empty()) return 0.0;
  const auto failures = std::count_if(per_draw.begin(), per_draw.end(),
                                      [&](const ConditioningResult& c) { return c.epsilon > target_eps; });
  return static_cast<double>(failures) / static_cast<double>(per_draw.size());
}

PairwiseSystem::PairwiseSystem(const FlowSpec& flow, std::vector<StateVector> samples,
                               DelayParams params, unsigned threads)
    : samples_(std::move(samples)), params_(params), ambient_dim_(flow.ambient_dim()) {
  const std::size_t n = samples_.size();
  if (n < 2) {
    throw Error(ErrorKind::insufficient_samples,
                "need at least 2 samples, got " + std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      try {
        require_distinct(samples_[i], samples_[j]);
      } catch (const Error& e) {
        throw Error(e.kind(), "samples " + std::to_string(i) + " and " + std::to_string(j) +
                                  " coincide");
      }
    }
  }
  trajectories_.reserve(n);
  for (const auto& s : samples_) trajectories_.push_back(trajectory_matrix(flow, s, params_).g);

  row_offset_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) row_offset_[i + 1] = row_offset_[i] + (n - 1 - i);
  denominators_.resize(row_offset_[n]);
  parallel_chunks(n - 1, resolve_threads(threads), [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        denominators_[pair_index(i, j)] = (trajectories_[i] - trajectories_[j]).squaredNorm();
      }
    }
  });
}

std::size_t PairwiseSystem::pair_index(std::size_t i, std::size_t j) const {
  return row_offset_[i] + (j - i - 1);
}

double PairwiseSystem::denominator(std::size_t i, std::size_t j) const {
  if (i >= j || j >= samples_.size()) {
    throw Error(ErrorKind::out_of_range, "pair indices must satisfy i < j < n");
  }
  return denominators_[pair_index(i, j)];
}

Eigen::MatrixXd PairwiseSystem::delay_vectors(const MeasurementCoeffs& alpha) const {
  if (alpha.alpha.size() != ambient_dim_) {
    throw Error(ErrorKind::dimension_mismatch, "coefficient vector does not match the flow");
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(samples_.size()), params_.num_delays);
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = (trajectories_[i] * alpha.alpha).transpose();
  }
  return out;
}

std::vector<double> PairwiseSystem::ratios(const MeasurementCoeffs& alpha) const {
  const Eigen::MatrixXd f = delay_vectors(alpha);
  const std::size_t n = samples_.size();
  std::vector<double> out(denominators_.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double num = (f.row(static_cast<Eigen::Index>(i)) - f.row(static_cast<Eigen::Index>(j))).squaredNorm();
      out[pair_index(i, j)] = num / denominators_[pair_index(i, j)];
    }
  }
  return out;
}

ConditioningResult PairwiseSystem::conditioning(const MeasurementCoeffs& alpha) const {
  const Eigen::MatrixXd f = delay_vectors(alpha);
  const std::size_t n = samples_.size();
  ConditioningResult out;
  out.epsilon = -1.0;
  out.alpha_seed = alpha.seed;
  for (std::size_t i = 0; i < n; ++i) {
    const auto fi = f.row(static_cast<Eigen::Index>(i));
    for (std::size_t j = i + 1; j < n; ++j) {
      const double num = (fi - f.row(static_cast<Eigen::Index>(j))).squaredNorm();
      const double deviation = std::abs(num / denominators_[pair_index(i, j)] - 1.0);
      if (deviation > out.epsilon) {
        out.epsilon = deviation;
        out.worst_pair = {i, j};
      }
    }
  }
  return out;
}

PairDiagnostics isometry_ratio(const FlowSpec& flow, const StateVector& x, const StateVector& y,
                               const MeasurementCoeffs& alpha, const DelayParams& params) {
  require_distinct(x, y);
  const Eigen::MatrixXd diff = trajectory_matrix(flow, x, params).g - trajectory_matrix(flow, y, params).g;
  const Eigen::VectorXd fdiff = delay_vector(flow, x, alpha, params) - delay_vector(flow, y, alpha, params);
  PairDiagnostics out;
  out.chord_norms.resize(static_cast<std::size_t>(params.num_delays));
  double denominator = 0.0;
  for (int m = 0; m < params.num_delays; ++m) {
    const double sq = diff.row(m).squaredNorm();
    out.chord_norms[static_cast<std::size_t>(m)] = std::sqrt(sq);
    denominator += sq;
  }
  const double numerator = fdiff.squaredNorm();
  out.ratio = numerator / denominator;
  out.state_ratio = numerator / (x - y).squaredNorm();
  out.soft_rank = soft_rank(diff).value;
  return out;
}

ConditioningResult conditioning(const FlowSpec& flow, const std::vector<StateVector>& samples,
                                const MeasurementCoeffs& alpha, const DelayParams& params) {
  return PairwiseSystem(flow, samples, params).conditioning(alpha);
}

ConditioningResult conditioning_from_ratios(
    const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
    const std::vector<double>& ratios) {
  if (pairs.empty() || pairs.size() != ratios.size()) {
    throw Error(ErrorKind::invalid_argument, "need one ratio per pair and at least one pair");
  }
  ConditioningResult out;
  out.epsilon = -1.0;
  for (std::size_t k = 0; k < ratios.size(); ++k) {
    if (!(ratios[k] >= 0.0)) throw Error(ErrorKind::invalid_argument, "isometry ratios are non-negative");
    const double deviation = std::abs(ratios[k] - 1.0);
    if (deviation > out.epsilon || (deviation == out.epsilon && pairs[k] < out.worst_pair)) {
      out.epsilon = deviation;
      out.worst_pair = pairs[k];
    }
  }
  return out;
}

EmbeddingReport monte_carlo(const PairwiseSystem& system, int ambient_dim,
                            const MonteCarloOptions& options) {
  if (options.num_draws < 1) {
    throw Error(ErrorKind::invalid_argument, "num_draws must be >= 1");
  }
  if (options.ensemble == Ensemble::user) {
    throw Error(ErrorKind::invalid_argument, "Monte Carlo needs a random ensemble");
  }
  EmbeddingReport report;
  report.num_draws = options.num_draws;
  report.ensemble = options.ensemble;
  report.base_seed = options.base_seed;
  report.ambient_dim = ambient_dim;
  report.params = system.params();
  report.num_samples = system.num_samples();
  report.per_draw.resize(options.num_draws);

  parallel_chunks(options.num_draws, resolve_threads(options.threads),
                  [&](std::size_t, std::size_t begin, std::size_t end) {
                    for (std::size_t d = begin; d < end; ++d) {
                      try {
                        const auto alpha = draw_coeffs(options.ensemble, ambient_dim, options.base_seed, d);
                        ConditioningResult c = system.conditioning(alpha);
                        c.draw_index = d;
                        report.per_draw[d] = c;
                      } catch (const Error& e) {
                        throw Error(e.kind(), "draw " + std::to_string(d) + ": " + e.what());
                      }
                    }
                  });

  std::vector<double> eps(options.num_draws);
  for (std::size_t d = 0; d < options.num_draws; ++d) eps[d] = report.per_draw[d].epsilon;
  for (std::size_t k = 0; k < kReportQuantiles.size(); ++k) report.quantiles[k] = quantile(eps, kReportQuantiles[k]);
  report.eps_mean = std::accumulate(eps.begin(), eps.end(), 0.0) / static_cast<double>(eps.size());
  report.eps_max = *std::max_element(eps.begin(), eps.end());

  if (options.compute_infimum) {
    std::vector<Eigen::MatrixXd> mats;
    mats.reserve(system.num_samples());
    for (std::size_t i = 0; i < system.num_samples(); ++i) mats.push_back(system.trajectory(i));
    report.infimum_soft_rank = scan_pair_soft_ranks(mats, false, options.threads);
  }
  return report;
}

EmbeddingReport monte_carlo(const FlowSpec& flow, const std::vector<StateVector>& samples,
                            const DelayParams& params, const MonteCarloOptions& options) {
  const PairwiseSystem system(flow, samples, params, options.threads);
  return monte_carlo(system, flow.ambient_dim(), options);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) {
    throw Error(ErrorKind::insufficient_samples, "line fit needs at least 2 (x, y) points");
  }
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::invalid_argument, "line fit needs distinct x values");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (n > 2) {
    double sse = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double r = y[k] - (fit.intercept + fit.slope * x[k]);
      sse += r * r;
    }
    fit.slope_stderr = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
  } else {
    fit.slope_stderr = std::numeric_limits<double>::quiet_NaN();
  }
  return fit;
}

ScalingStudy scaling_study(const FlowSpec& flow, const std::vector<StateVector>& samples,
                           const std::vector<int>& delay_list, const MonteCarloOptions& options) {
  if (delay_list.size() < 2) {
    throw Error(ErrorKind::insufficient_samples, "scaling fit needs at least 2 delay counts");
  }
  for (std::size_t k = 0; k < delay_list.size(); ++k) {
    if (delay_list[k] < 1 || (k > 0 && delay_list[k] <= delay_list[k - 1])) {
      throw Error(ErrorKind::invalid_argument, "delay list must be positive and strictly ascending");
    }
  }
  ScalingStudy study;
  study.ensemble = options.ensemble;
  study.num_draws = options.num_draws;
  study.base_seed = options.base_seed;
  study.num_samples = samples.size();
  std::vector<double> log_m;
  std::vector<double> log_eps;
  for (const int m : delay_list) {
    const DelayParams params = make_delay_params(m, flow.ambient_dim());
    const EmbeddingReport report = monte_carlo(flow, samples, params, options);
    ScalingRow row;
    row.num_delays = m;
    row.exceeds_ambient = params.exceeds_ambient;
    row.infimum_soft_rank = report.infimum_soft_rank ? report.infimum_soft_rank->infimum
                                                     : std::numeric_limits<double>::quiet_NaN();
    row.eps_q05 = report.quantiles[0];
    row.eps_q25 = report.quantiles[1];
    row.eps_median = report.quantiles[2];
    row.eps_q75 = report.quantiles[3];
    row.eps_q95 = report.quantiles[4];
    row.eps_mean = report.eps_mean;
    row.eps_max = report.eps_max;
    if (!(row.eps_median > 0.0)) {
      throw Error(ErrorKind::invalid_argument,
                  "median epsilon is zero at M = " + std::to_string(m) + "; log-log fit undefined");
    }
    log_m.push_back(std::log(static_cast<double>(m)));
    log_eps.push_back(std::log(row.eps_median));
    study.rows.push_back(row);
  }
  study.fit = fit_line(log_m, log_eps);
  return study;
}

TheoremCheck theorem_condition_check(double r_A, double epsilon, double D_A, double volume,
                                     double reach, double c_user) {
  const std::pair<const char*, double> inputs[] = {{"r_A", r_A},   {"epsilon", epsilon},
                                                   {"D_A", D_A},   {"volume", volume},
                                                   {"reach", reach}, {"c_user", c_user}};
  for (const auto& [name, value] : inputs) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw Error(ErrorKind::invalid_argument, std::string(name) + " must be positive and finite");
    }
  }
  TheoremCheck out{r_A, epsilon, D_A, volume, reach, c_user};
  out.log_argument = std::sqrt(r_A) * std::pow(volume, 1.0 / D_A) / reach;
  if (!(out.log_argument > 1.0)) {
    throw Error(ErrorKind::condition_degenerate,
                "log argument r_A^(1/2) V^(1/D_A) / tau = " + std::to_string(out.log_argument) +
                    " is not above 1");
  }
  out.soft_rank_rhs = c_user * D_A * std::log(out.log_argument) / (epsilon * epsilon);
  out.volume_rhs = c_user * std::pow(reach, D_A);
  out.soft_rank_condition = r_A >= out.soft_rank_rhs;
  out.volume_condition = volume >= out.volume_rhs;
  out.satisfied = out.soft_rank_condition && out.volume_condition;
  return out;
}

}  // namespace delaykit
