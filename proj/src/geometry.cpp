#include "delaykit/geometry.hpp"

#include "delaykit/error.hpp"
#include "delaykit/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace delaykit {

AttractorSample sample_attractor(const FlowSpec& flow, const StateVector& x0, int n) {
  if (n < 2) {
    throw Error(ErrorKind::invalid_argument, "attractor sample needs n >= 2, got " + std::to_string(n));
  }
  if (x0.size() != flow.ambient_dim()) {
    throw Error(ErrorKind::dimension_mismatch, "origin has wrong length");
  }
  // An invertible flow can only revisit a state by returning to x0.
  AttractorSample out;
  out.requested = n;
  out.states.push_back(x0);
  const double tol = 1e-12 * x0.norm();
  StateVector current = x0;
  for (int k = 1; k < n; ++k) {
    current = flow.step(current);
    if ((current - x0).norm() <= tol) {
      out.period = k;
      break;
    }
    out.states.push_back(current);
  }
  if (!out.period && (flow.step(current) - x0).norm() <= tol) out.period = n;
  if (out.states.size() < 2) {
    throw Error(ErrorKind::insufficient_samples,
                "orbit has period " + std::to_string(out.period.value_or(0)) +
                    "; a single state cannot form pairs");
  }
  return out;
}

PointCloud trajectory_manifold_points(const FlowSpec& flow, const std::vector<StateVector>& samples,
                                      const DelayParams& params) {
  PointCloud out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(trajectory_vector(flow, s, params).entries);
  return out;
}

double curve_volume(const PointCloud& points, bool closed) {
  if (points.size() < 2) {
    throw Error(ErrorKind::insufficient_samples, "curve volume needs at least 2 points");
  }
  double length = 0.0;
  for (std::size_t k = 1; k < points.size(); ++k) length += (points[k] - points[k - 1]).norm();
  if (closed) length += (points.front() - points.back()).norm();
  return length;
}

PointCloud finite_difference_tangents(const PointCloud& points, bool closed) {
  const std::size_t n = points.size();
  if (n < 3) {
    throw Error(ErrorKind::insufficient_samples, "tangent estimation needs at least 3 points");
  }
  for (std::size_t k = 1; k < n; ++k) {
    if ((points[k] - points[k - 1]).norm() == 0.0) {
      throw Error(ErrorKind::invalid_argument,
                  "repeated consecutive points at index " + std::to_string(k));
    }
  }
  PointCloud tangents(n);
  for (std::size_t k = 0; k < n; ++k) {
    Eigen::VectorXd d;
    if (closed) {
      d = points[(k + 1) % n] - points[(k + n - 1) % n];
    } else if (k == 0) {
      d = points[1] - points[0];
    } else if (k + 1 == n) {
      d = points[n - 1] - points[n - 2];
    } else {
      d = points[k + 1] - points[k - 1];
    }
    const double norm = d.norm();
    if (!(norm > 0.0)) {
      throw Error(ErrorKind::invalid_argument, "zero central difference at index " + std::to_string(k));
    }
    tangents[k] = d / norm;
  }
  return tangents;
}

ReachEstimate reach_estimate(const PointCloud& points, const PointCloud& tangents, unsigned threads) {
  const std::size_t n = points.size();
  if (n < 3) throw Error(ErrorKind::insufficient_samples, "reach estimation needs at least 3 points");
  if (tangents.size() != n) {
    throw Error(ErrorKind::dimension_mismatch, "need exactly one tangent per point");
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (tangents[k].size() != points[k].size() || points[k].size() != points[0].size()) {
      throw Error(ErrorKind::dimension_mismatch, "point/tangent dimensions disagree at index " + std::to_string(k));
    }
    if (std::abs(tangents[k].norm() - 1.0) > 1e-9) {
      throw Error(ErrorKind::invalid_argument, "tangent " + std::to_string(k) + " is not unit-norm");
    }
  }

  struct Partial {
    double value = std::numeric_limits<double>::infinity();
    std::size_t excluded = 0;
  };
  const unsigned workers = resolve_threads(threads);
  std::vector<Partial> partial(std::max<std::size_t>(1, std::min<std::size_t>(workers, n)));
  parallel_chunks(n, workers, [&](std::size_t w, std::size_t begin, std::size_t end) {
    Partial local;
    for (std::size_t a = begin; a < end; ++a) {
      const Eigen::VectorXd& t = tangents[a];
      for (std::size_t b = 0; b < n; ++b) {
        if (a == b) continue;
        const Eigen::VectorXd chord = points[b] - points[a];
        const double chord_sq = chord.squaredNorm();
        const double normal = (chord - chord.dot(t) * t).norm();
        if (!(normal > 1e-12 * std::sqrt(chord_sq))) {
          ++local.excluded;
          continue;
        }
        local.value = std::min(local.value, chord_sq / (2.0 * normal));
      }
    }
    partial[w] = local;
  });

  ReachEstimate out;
  out.num_pairs = n * (n - 1);
  out.value = std::numeric_limits<double>::infinity();
  for (const auto& p : partial) {
    out.value = std::min(out.value, p.value);
    out.excluded_pairs += p.excluded;
  }
  if (!std::isfinite(out.value)) {
    throw Error(ErrorKind::no_estimate,
                "every pair has a zero normal component (flat curve, infinite reach)");
  }
  return out;
}

ManifoldGeometry curve_geometry(const PointCloud& points, bool closed, double dim, unsigned threads) {
  ManifoldGeometry out;
  out.num_points = points.size();
  out.closed = closed;
  out.dim = dim;
  out.volume = curve_volume(points, closed);
  const ReachEstimate reach = reach_estimate(points, finite_difference_tangents(points, closed), threads);
  out.reach = reach.value;
  out.reach_pairs = reach.num_pairs;
  out.reach_excluded_pairs = reach.excluded_pairs;
  return out;
}

namespace {

void require_series(const std::vector<double>& series) {
  if (series.size() < 8) {
    throw Error(ErrorKind::insufficient_samples, "delay selection needs at least 8 samples");
  }
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  if (!(*hi > *lo)) {
    throw Error(ErrorKind::invalid_argument, "constant series has zero variance");
  }
}

}  // namespace

std::optional<int> autocorr_first_zero(const std::vector<double>& series) {
  require_series(series);
  const std::size_t n = series.size();
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : series) var += (v - mean) * (v - mean);

  auto acf = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) s += (series[t] - mean) * (series[t + lag] - mean);
    return s / var;
  };
  const std::size_t max_lag = n / 4;
  double previous = 1.0;
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    const double r = acf(lag);
    if (r <= 0.0) {
      if (lag > 1 && std::abs(previous) < std::abs(r)) return static_cast<int>(lag - 1);
      return static_cast<int>(lag);
    }
    previous = r;
  }
  return std::nullopt;
}

double mutual_information(const std::vector<double>& series, int lag, int num_bins) {
  require_series(series);
  if (num_bins < 2) throw Error(ErrorKind::invalid_argument, "num_bins must be >= 2");
  if (lag < 0 || static_cast<std::size_t>(lag) >= series.size()) {
    throw Error(ErrorKind::out_of_range, "lag " + std::to_string(lag) + " does not fit the series");
  }
  const auto [lo_it, hi_it] = std::minmax_element(series.begin(), series.end());
  const double lo = *lo_it;
  const double width = (*hi_it - lo) / num_bins;
  const auto bins = static_cast<std::size_t>(num_bins);
  auto bin = [&](double v) {
    const auto b = static_cast<std::size_t>(std::floor((v - lo) / width));
    return std::min(b, bins - 1);
  };

  const std::size_t pairs = series.size() - static_cast<std::size_t>(lag);
  std::vector<double> joint(bins * bins, 0.0);
  std::vector<double> px(bins, 0.0);
  std::vector<double> py(bins, 0.0);
  for (std::size_t t = 0; t < pairs; ++t) {
    const std::size_t a = bin(series[t]);
    const std::size_t b = bin(series[t + static_cast<std::size_t>(lag)]);
    joint[a * bins + b] += 1.0;
    px[a] += 1.0;
    py[b] += 1.0;
  }
  const double total = static_cast<double>(pairs);
  double mi = 0.0;
  for (std::size_t a = 0; a < bins; ++a) {
    for (std::size_t b = 0; b < bins; ++b) {
      const double c = joint[a * bins + b];
      if (c > 0.0) mi += (c / total) * std::log(c * total / (px[a] * py[b]));
    }
  }
  return mi;
}

std::optional<int> mutual_information_first_min(const std::vector<double>& series, int num_bins) {
  require_series(series);
  if (num_bins < 2) throw Error(ErrorKind::invalid_argument, "num_bins must be >= 2");
  const int max_lag = static_cast<int>(series.size() / 4);
  double current = mutual_information(series, 1, num_bins);
  for (int lag = 1; lag < max_lag; ++lag) {
    const double next = mutual_information(series, lag + 1, num_bins);
    const double floor = 3.0 * (num_bins - 1) / static_cast<double>(series.size() - static_cast<std::size_t>(lag + 1));
    if (next >= current - floor) return lag;
    current = next;
  }
  return std::nullopt;
}

DelaySelection delay_selection(const std::vector<double>& series, int num_bins) {
  return DelaySelection{autocorr_first_zero(series), mutual_information_first_min(series, num_bins), num_bins};
}

}  // namespace delaykit
