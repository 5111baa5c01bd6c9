#pragma once

#include <Eigen/Dense>

#include <memory>
#include <vector>

namespace delaykit {

using StateVector = Eigen::VectorXd;

enum class FlowKind { linear, shift };

/// An invertible discrete-time linear flow on R^N.
///
/// Immutable after construction; copies share the precomputed factorization,
/// so a FlowSpec can be handed to any number of worker threads.
class FlowSpec {
 public:
  /// Cyclic shift: ones on the superdiagonal and a one in the bottom-left
  /// corner, so (Phi x)_i = x_{i+1} and (Phi x)_N = x_1.
  static FlowSpec shift(int n, double sampling_interval = 1.0);

  /// Wraps an arbitrary square matrix. Rejects matrices whose smallest
  /// singular value is not above 1e-12 times the largest.
  static FlowSpec linear(const Eigen::MatrixXd& matrix, double sampling_interval = 1.0);

  int ambient_dim() const noexcept { return data_->dim; }
  double sampling_interval() const noexcept { return data_->sampling_interval; }
  FlowKind kind() const noexcept { return data_->kind; }

  /// Dense N x N flow matrix (materialized on demand for shift flows).
  Eigen::MatrixXd matrix() const;

  StateVector step(const StateVector& x) const;
  StateVector inverse_step(const StateVector& x) const;

  /// Singular values of the flow matrix, descending.
  const Eigen::VectorXd& singular_values() const noexcept { return data_->singular_values; }

  /// Largest singular value of the inverse flow matrix.
  double inverse_spectral_norm() const noexcept;

 private:
  struct Data {
    FlowKind kind = FlowKind::linear;
    int dim = 0;
    double sampling_interval = 1.0;
    Eigen::MatrixXd matrix;          // empty for shift flows
    Eigen::MatrixXd inverse;         // empty for shift flows
    Eigen::VectorXd singular_values;
  };

  explicit FlowSpec(std::shared_ptr<const Data> data) : data_(std::move(data)) {}
  void check_dim(const StateVector& x) const;

  std::shared_ptr<const Data> data_;
};

struct Orbit {
  /// states[n + 1] = Phi(states[n]); states[0] is the origin.
  std::vector<StateVector> states;

  const StateVector& origin() const { return states.front(); }
  std::size_t size() const noexcept { return states.size(); }
};

struct LyapunovEstimate {
  double lambda = 0.0;  // nats per step; -infinity when the separation underflows
  int num_steps = 0;
  int num_probes = 0;
};

FlowSpec make_shift_flow(int n);
FlowSpec make_linear_flow(const Eigen::MatrixXd& matrix);

Orbit generate_orbit(const FlowSpec& flow, const StateVector& x0, int length);

/// Canonical basis vector e_p (1-based p, matching the usual notation).
StateVector basis_state(int n, int p);

/// Maximal Lyapunov exponent of the inverse flow, by tracking the separation
/// of a single perturbed backward trajectory and renormalizing it to
/// `perturbation` after every step. The first num_steps/10 steps align the
/// probe with the dominant direction and are not averaged.
///
/// For linear flows this converges to the log spectral radius of Phi^{-1},
/// which equals ln sigma_max(Phi^{-1}) when Phi is normal.
LyapunovEstimate lyapunov_exponent_inverse_flow(const FlowSpec& flow, const StateVector& x0,
                                                int num_steps, double perturbation);

}  // namespace delaykit
