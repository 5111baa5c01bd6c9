#pragma once

#include "delaykit/delay_map.hpp"
#include "delaykit/dynamics.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace delaykit {

using PointCloud = std::vector<Eigen::VectorXd>;

/// Distinct orbit points from x0. When the orbit returns to x0 the sample
/// stops there and `period` records the return time.
struct AttractorSample {
  std::vector<StateVector> states;
  std::optional<int> period;
  int requested = 0;
};

AttractorSample sample_attractor(const FlowSpec& flow, const StateVector& x0, int n);

PointCloud trajectory_manifold_points(const FlowSpec& flow, const std::vector<StateVector>& samples,
                                      const DelayParams& params);

/// Sum of consecutive chord lengths; `closed` adds the chord back to the
/// first point. Chordal sums underestimate the length of a smooth curve.
double curve_volume(const PointCloud& points, bool closed = false);

/// Unit tangents by central differences; endpoints use one-sided
/// differences unless `closed`, in which case the curve wraps.
PointCloud finite_difference_tangents(const PointCloud& points, bool closed = false);

struct ReachEstimate {
  double value = 0.0;
  std::size_t num_pairs = 0;
  std::size_t excluded_pairs = 0;  // pairs whose chord has no normal component
  /// The point-cloud quotient only approaches the true reach in the
  /// dense-sampling limit; on sparse samples it can land on either side.
  static constexpr const char* bias = "unsigned: converges to the reach only as sampling densifies";
};

/// Reach of a sampled curve: the infimum over ordered pairs (a, b) of
/// |b - a|^2 / (2 |(b - a) - <b - a, t_a> t_a|).
ReachEstimate reach_estimate(const PointCloud& points, const PointCloud& tangents,
                             unsigned threads = 1);

struct ManifoldGeometry {
  double volume = 0.0;
  double reach = 0.0;
  double dim = 1.0;
  std::size_t num_points = 0;
  std::size_t reach_pairs = 0;
  std::size_t reach_excluded_pairs = 0;
  bool closed = false;
  std::string volume_bias = "low: chordal sums underestimate arc length";
  std::string reach_bias = ReachEstimate::bias;
};

/// Volume and reach of an orbit-ordered curve (trajectory manifold points,
/// for instance) using finite-difference tangents.
ManifoldGeometry curve_geometry(const PointCloud& points, bool closed, double dim = 1.0,
                                unsigned threads = 1);

/// First lag at which the biased autocorrelation crosses zero, taken as
/// whichever of the two lags bracketing the sign change has the smaller
/// |autocorrelation|. Searches lags up to series.size() / 4.
std::optional<int> autocorr_first_zero(const std::vector<double>& series);

/// Plug-in mutual information I(s_t; s_{t+lag}) from an equal-width
/// num_bins x num_bins histogram over the series range.
double mutual_information(const std::vector<double>& series, int lag, int num_bins);

/// First minimum of the histogram mutual information over lags
/// 1..series.size()/4: the first lag after which I stops decreasing by more
/// than the estimator's noise floor 3 (B - 1) / n_pairs. Without the floor,
/// sampling noise on a flat curve (independent samples, say) makes the
/// location of the first strict minimum arbitrary.
std::optional<int> mutual_information_first_min(const std::vector<double>& series, int num_bins = 16);

struct DelaySelection {
  std::optional<int> autocorr_first_zero;
  std::optional<int> mi_first_min;
  int num_bins = 16;
};

DelaySelection delay_selection(const std::vector<double>& series, int num_bins = 16);

}  // namespace delaykit
