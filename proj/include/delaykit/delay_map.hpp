#pragma once

#include "delaykit/dynamics.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

namespace delaykit {

enum class Ensemble { rademacher, gaussian, user };

std::string_view to_string(Ensemble e);
/// Parses "rademacher" or "gaussian"; anything else is an invalid-argument error.
Ensemble parse_ensemble(std::string_view name);

struct MeasurementCoeffs {
  Eigen::VectorXd alpha;
  Ensemble ensemble = Ensemble::user;
  std::optional<std::uint64_t> seed;  // absent for user-supplied vectors
};

/// Number of delays M. `exceeds_ambient` flags M > N, where the soft-rank
/// can no longer grow with M.
struct DelayParams {
  int num_delays = 1;
  bool exceeds_ambient = false;
};

DelayParams make_delay_params(int num_delays, int ambient_dim);

/// Random engine for Monte Carlo draw `draw_index` under `seed`. The stream
/// depends only on the pair, never on the order in which draws are made.
std::mt19937_64 draw_engine(std::uint64_t seed, std::uint64_t draw_index);

/// Rademacher (+-1) or standard Gaussian coefficients. Identical
/// (ensemble, n, seed, draw_index) always produce identical vectors.
MeasurementCoeffs draw_coeffs(Ensemble ensemble, int n, std::uint64_t seed,
                              std::uint64_t draw_index = 0);
MeasurementCoeffs user_coeffs(Eigen::VectorXd alpha);

/// Rows are x, Phi^{-1}(x), ..., Phi^{-M+1}(x).
struct TrajectoryMatrix {
  Eigen::MatrixXd g;
  StateVector base_point;
};

/// Row-block concatenation of the trajectory matrix, a point in R^{MN}.
struct TrajectoryVector {
  Eigen::VectorXd entries;
  StateVector base_point;
};

/// s[n] = <alpha, orbit.states[n]>.
std::vector<double> time_series(const Orbit& orbit, const MeasurementCoeffs& alpha);

TrajectoryMatrix trajectory_matrix(const FlowSpec& flow, const StateVector& x,
                                   const DelayParams& params);

/// Same matrix for x = orbit.states[index], reading backward iterates out of
/// the stored orbit where available and only inverting the flow for
/// iterates that precede the orbit's origin.
TrajectoryMatrix trajectory_matrix_on_orbit(const FlowSpec& flow, const Orbit& orbit,
                                            std::size_t index, const DelayParams& params);

TrajectoryVector trajectory_vector(const FlowSpec& flow, const StateVector& x,
                                   const DelayParams& params);

/// Delay-coordinate vector F_alpha(x): entry m is <alpha, Phi^{-m}(x)>.
/// Evaluated by iterating the inverse flow, not through the trajectory matrix.
Eigen::VectorXd delay_vector(const FlowSpec& flow, const StateVector& x,
                             const MeasurementCoeffs& alpha, const DelayParams& params);

/// F_p(x): delay vector of the p-th canonical measurement (1-based p).
Eigen::VectorXd basis_delay_vector(const FlowSpec& flow, const StateVector& x, int p,
                                   const DelayParams& params);

/// [s[n], s[n-1], ..., s[n-M+1]] read directly off a scalar series.
Eigen::VectorXd delay_window(const std::vector<double>& series, std::size_t n,
                             const DelayParams& params);

}  // namespace delaykit
