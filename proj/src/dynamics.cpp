#include "delaykit/dynamics.hpp"

#include "delaykit/error.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace delaykit {

namespace {

constexpr double kInvertibilityThreshold = 1e-12;

}  // namespace

FlowSpec FlowSpec::shift(int n, double sampling_interval) {
  if (n < 2) {
    throw Error(ErrorKind::invalid_dimension, "shift flow needs N >= 2, got " + std::to_string(n));
  }
  if (!(sampling_interval > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "sampling interval must be positive");
  }
  auto data = std::make_shared<Data>();
  data->kind = FlowKind::shift;
  data->dim = n;
  data->sampling_interval = sampling_interval;
  data->singular_values = Eigen::VectorXd::Ones(n);
  return FlowSpec(std::move(data));
}

FlowSpec FlowSpec::linear(const Eigen::MatrixXd& matrix, double sampling_interval) {
  if (matrix.rows() == 0 || matrix.rows() != matrix.cols()) {
    throw Error(ErrorKind::invalid_dimension,
                "flow matrix must be square and non-empty, got " + std::to_string(matrix.rows()) +
                    "x" + std::to_string(matrix.cols()));
  }
  if (!matrix.allFinite()) {
    throw Error(ErrorKind::invalid_argument, "flow matrix has non-finite entries");
  }
  if (!(sampling_interval > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "sampling interval must be positive");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrix, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (!(smax > 0.0) || !(smin > kInvertibilityThreshold * smax)) {
    throw Error(ErrorKind::non_invertible_flow,
                "sigma_min/sigma_max = " + std::to_string(smax > 0.0 ? smin / smax : 0.0) +
                    " is not above 1e-12");
  }
  auto data = std::make_shared<Data>();
  data->kind = FlowKind::linear;
  data->dim = static_cast<int>(matrix.rows());
  data->sampling_interval = sampling_interval;
  data->matrix = matrix;
  data->inverse = svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
  data->singular_values = sv;
  return FlowSpec(std::move(data));
}

Eigen::MatrixXd FlowSpec::matrix() const {
  if (data_->kind == FlowKind::linear) return data_->matrix;
  const int n = data_->dim;
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) phi(i, i + 1) = 1.0;
  phi(n - 1, 0) = 1.0;
  return phi;
}

void FlowSpec::check_dim(const StateVector& x) const {
  if (x.size() != data_->dim) {
    throw Error(ErrorKind::dimension_mismatch, "state has length " + std::to_string(x.size()) +
                                                   ", flow has N = " + std::to_string(data_->dim));
  }
}

StateVector FlowSpec::step(const StateVector& x) const {
  check_dim(x);
  if (data_->kind == FlowKind::linear) return data_->matrix * x;
  const Eigen::Index n = x.size();
  StateVector y(n);
  y.head(n - 1) = x.tail(n - 1);
  y(n - 1) = x(0);
  return y;
}

StateVector FlowSpec::inverse_step(const StateVector& x) const {
  check_dim(x);
  if (data_->kind == FlowKind::linear) return data_->inverse * x;
  const Eigen::Index n = x.size();
  StateVector y(n);
  y(0) = x(n - 1);
  y.tail(n - 1) = x.head(n - 1);
  return y;
}

double FlowSpec::inverse_spectral_norm() const noexcept {
  return 1.0 / data_->singular_values(data_->singular_values.size() - 1);
}

FlowSpec make_shift_flow(int n) { return FlowSpec::shift(n); }

FlowSpec make_linear_flow(const Eigen::MatrixXd& matrix) { return FlowSpec::linear(matrix); }

StateVector basis_state(int n, int p) {
  if (p < 1 || p > n) {
    throw Error(ErrorKind::out_of_range,
                "basis index " + std::to_string(p) + " outside 1.." + std::to_string(n));
  }
  StateVector e = StateVector::Zero(n);
  e(p - 1) = 1.0;
  return e;
}

Orbit generate_orbit(const FlowSpec& flow, const StateVector& x0, int length) {
  if (length < 1) {
    throw Error(ErrorKind::invalid_argument, "orbit length must be >= 1, got " + std::to_string(length));
  }
  if (x0.size() != flow.ambient_dim()) {
    throw Error(ErrorKind::dimension_mismatch, "orbit origin has wrong length");
  }
  Orbit orbit;
  orbit.states.reserve(static_cast<std::size_t>(length));
  orbit.states.push_back(x0);
  for (int n = 1; n < length; ++n) orbit.states.push_back(flow.step(orbit.states.back()));
  return orbit;
}

LyapunovEstimate lyapunov_exponent_inverse_flow(const FlowSpec& flow, const StateVector& x0,
                                                int num_steps, double perturbation) {
  if (num_steps < 10) {
    throw Error(ErrorKind::invalid_argument, "num_steps must be >= 10");
  }
  if (!(perturbation > 0.0) || !std::isfinite(perturbation)) {
    throw Error(ErrorKind::invalid_argument, "perturbation must be positive and finite");
  }
  if (x0.size() != flow.ambient_dim()) {
    throw Error(ErrorKind::dimension_mismatch, "start state has wrong length");
  }

  // Fixed probe direction; generic with probability one.
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal;
  StateVector direction(flow.ambient_dim());
  for (Eigen::Index i = 0; i < direction.size(); ++i) direction(i) = normal(rng);
  direction.normalize();

  // For a linear flow the backward separation obeys delta_{k+1} = Phi^{-1} delta_k
  // exactly, independent of the base point, so the separation is propagated
  // directly. This stays finite even when the base trajectory itself would
  // overflow after many expanding steps.
  const int warmup = num_steps / 10;
  LyapunovEstimate estimate{0.0, num_steps, 1};
  StateVector delta = perturbation * direction;
  double log_growth = 0.0;
  for (int k = 0; k < num_steps; ++k) {
    delta = flow.inverse_step(delta);
    const double separation = delta.norm();
    if (!(separation > 0.0) || !std::isfinite(separation)) {
      estimate.lambda = -std::numeric_limits<double>::infinity();
      return estimate;
    }
    if (k >= warmup) log_growth += std::log(separation / perturbation);
    delta *= perturbation / separation;
  }
  estimate.lambda = log_growth / static_cast<double>(num_steps - warmup);
  return estimate;
}

}  // namespace delaykit
