#include "delaykit/delay_map.hpp"

#include "delaykit/error.hpp"

#include <algorithm>
#include <string>

namespace delaykit {

namespace {

void require_delays(const DelayParams& params) {
  if (params.num_delays < 1) {
    throw Error(ErrorKind::invalid_argument,
                "number of delays must be >= 1, got " + std::to_string(params.num_delays));
  }
}

void require_state(const FlowSpec& flow, const StateVector& x) {
  if (x.size() != flow.ambient_dim()) {
    throw Error(ErrorKind::dimension_mismatch, "state has length " + std::to_string(x.size()) +
                                                   ", flow has N = " +
                                                   std::to_string(flow.ambient_dim()));
  }
}

void require_alpha(const FlowSpec& flow, const MeasurementCoeffs& alpha) {
  if (alpha.alpha.size() != flow.ambient_dim()) {
    throw Error(ErrorKind::dimension_mismatch, "coefficient vector has length " +
                                                   std::to_string(alpha.alpha.size()) +
                                                   ", flow has N = " +
                                                   std::to_string(flow.ambient_dim()));
  }
}

}  // namespace

std::string_view to_string(Ensemble e) {
  switch (e) {
    case Ensemble::rademacher: return "rademacher";
    case Ensemble::gaussian: return "gaussian";
    case Ensemble::user: return "user";
  }
  return "user";
}

Ensemble parse_ensemble(std::string_view name) {
  if (name == "rademacher") return Ensemble::rademacher;
  if (name == "gaussian") return Ensemble::gaussian;
  throw Error(ErrorKind::invalid_argument,
              "ensemble must be one of {rademacher, gaussian}, got '" + std::string(name) + "'");
}

DelayParams make_delay_params(int num_delays, int ambient_dim) {
  if (num_delays < 1) {
    throw Error(ErrorKind::invalid_argument,
                "number of delays must be >= 1, got " + std::to_string(num_delays));
  }
  return DelayParams{num_delays, num_delays > ambient_dim};
}

std::mt19937_64 draw_engine(std::uint64_t seed, std::uint64_t draw_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(draw_index),
                    static_cast<std::uint32_t>(draw_index >> 32)};
  return std::mt19937_64(seq);
}

MeasurementCoeffs draw_coeffs(Ensemble ensemble, int n, std::uint64_t seed,
                              std::uint64_t draw_index) {
  if (n < 1) {
    throw Error(ErrorKind::invalid_argument, "coefficient length must be >= 1");
  }
  auto rng = draw_engine(seed, draw_index);
  MeasurementCoeffs out{Eigen::VectorXd(n), ensemble, seed};
  switch (ensemble) {
    case Ensemble::rademacher:
      for (int i = 0; i < n; ++i) out.alpha(i) = (rng() >> 63) != 0 ? 1.0 : -1.0;
      break;
    case Ensemble::gaussian: {
      std::normal_distribution<double> normal;
      for (int i = 0; i < n; ++i) out.alpha(i) = normal(rng);
      break;
    }
    case Ensemble::user:
      throw Error(ErrorKind::invalid_argument, "user coefficients are not drawn");
  }
  return out;
}

MeasurementCoeffs user_coeffs(Eigen::VectorXd alpha) {
  return MeasurementCoeffs{std::move(alpha), Ensemble::user, std::nullopt};
}

std::vector<double> time_series(const Orbit& orbit, const MeasurementCoeffs& alpha) {
  std::vector<double> s;
  s.reserve(orbit.size());
  for (const auto& x : orbit.states) {
    if (x.size() != alpha.alpha.size()) {
      throw Error(ErrorKind::dimension_mismatch, "coefficient vector does not match orbit states");
    }
    s.push_back(alpha.alpha.dot(x));
  }
  return s;
}

TrajectoryMatrix trajectory_matrix(const FlowSpec& flow, const StateVector& x,
                                   const DelayParams& params) {
  require_delays(params);
  require_state(flow, x);
  TrajectoryMatrix out{Eigen::MatrixXd(params.num_delays, flow.ambient_dim()), x};
  StateVector current = x;
  out.g.row(0) = current.transpose();
  for (int m = 1; m < params.num_delays; ++m) {
    current = flow.inverse_step(current);
    out.g.row(m) = current.transpose();
  }
  return out;
}

TrajectoryMatrix trajectory_matrix_on_orbit(const FlowSpec& flow, const Orbit& orbit,
                                            std::size_t index, const DelayParams& params) {
  require_delays(params);
  if (index >= orbit.size()) {
    throw Error(ErrorKind::out_of_range, "orbit index " + std::to_string(index) +
                                             " beyond orbit of length " +
                                             std::to_string(orbit.size()));
  }
  const StateVector& x = orbit.states[index];
  require_state(flow, x);
  TrajectoryMatrix out{Eigen::MatrixXd(params.num_delays, flow.ambient_dim()), x};
  const auto stored = static_cast<int>(std::min<std::size_t>(index + 1, params.num_delays));
  for (int m = 0; m < stored; ++m) out.g.row(m) = orbit.states[index - m].transpose();
  StateVector current = orbit.states[index + 1 - stored];
  for (int m = stored; m < params.num_delays; ++m) {
    current = flow.inverse_step(current);
    out.g.row(m) = current.transpose();
  }
  return out;
}

TrajectoryVector trajectory_vector(const FlowSpec& flow, const StateVector& x,
                                   const DelayParams& params) {
  const TrajectoryMatrix tm = trajectory_matrix(flow, x, params);
  const Eigen::Index n = tm.g.cols();
  TrajectoryVector out{Eigen::VectorXd(tm.g.size()), x};
  for (Eigen::Index m = 0; m < tm.g.rows(); ++m) {
    out.entries.segment(m * n, n) = tm.g.row(m).transpose();
  }
  return out;
}

Eigen::VectorXd delay_vector(const FlowSpec& flow, const StateVector& x,
                             const MeasurementCoeffs& alpha, const DelayParams& params) {
  require_delays(params);
  require_state(flow, x);
  require_alpha(flow, alpha);
  Eigen::VectorXd out(params.num_delays);
  StateVector current = x;
  for (int m = 0; m < params.num_delays; ++m) {
    if (m > 0) current = flow.inverse_step(current);
    out(m) = alpha.alpha.dot(current);
  }
  return out;
}

Eigen::VectorXd basis_delay_vector(const FlowSpec& flow, const StateVector& x, int p,
                                   const DelayParams& params) {
  if (p < 1 || p > flow.ambient_dim()) {
    throw Error(ErrorKind::out_of_range, "basis index " + std::to_string(p) + " outside 1.." +
                                             std::to_string(flow.ambient_dim()));
  }
  require_delays(params);
  require_state(flow, x);
  Eigen::VectorXd out(params.num_delays);
  StateVector current = x;
  for (int m = 0; m < params.num_delays; ++m) {
    if (m > 0) current = flow.inverse_step(current);
    out(m) = current(p - 1);
  }
  return out;
}

Eigen::VectorXd delay_window(const std::vector<double>& series, std::size_t n,
                             const DelayParams& params) {
  require_delays(params);
  if (n >= series.size() || n + 1 < static_cast<std::size_t>(params.num_delays)) {
    throw Error(ErrorKind::out_of_range,
                "delay window ending at " + std::to_string(n) + " does not fit the series");
  }
  Eigen::VectorXd out(params.num_delays);
  for (int m = 0; m < params.num_delays; ++m) out(m) = series[n - m];
  return out;
}

}  // namespace delaykit
