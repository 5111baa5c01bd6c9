#pragma once

#include "delaykit/delay_map.hpp"
#include "delaykit/dynamics.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace delaykit {

/// r(G) = ||G||_F^2 / ||G||_2^2, with the decomposition it was computed from.
struct SoftRankResult {
  double value = 0.0;
  double frobenius_sq = 0.0;
  double spectral_sq = 0.0;
  Eigen::VectorXd singular_values;  // descending

  /// Count of singular values above rel_tol times the largest.
  int rank(double rel_tol = 1e-10) const;
};

struct PairSoftRank {
  std::size_t i = 0;
  std::size_t j = 0;
  double soft_rank = 0.0;
};

/// Minimum soft-rank of G_x - G_y over all sample pairs. The true infimum
/// runs over the whole attractor; a finite sample only bounds it from above,
/// so `num_samples` travels with the estimate.
struct PairScanResult {
  double infimum = 0.0;
  std::pair<std::size_t, std::size_t> argmin_pair{0, 0};
  std::optional<std::vector<PairSoftRank>> per_pair;
  std::size_t num_pairs = 0;
  std::size_t num_samples = 0;
};

SoftRankResult soft_rank(const Eigen::Ref<const Eigen::MatrixXd>& g);

/// Raises degenerate_pair unless ||x - y|| > 1e-12 * max(||x||, ||y||).
void require_distinct(const StateVector& x, const StateVector& y);

SoftRankResult pair_soft_rank(const FlowSpec& flow, const StateVector& x, const StateVector& y,
                              const DelayParams& params);

/// Exhaustive scan over all C(n, 2) pairs. Ties resolve to the
/// lexicographically smallest (i, j); the result is identical for every
/// thread count.
PairScanResult infimum_soft_rank(const FlowSpec& flow, const std::vector<StateVector>& samples,
                                 const DelayParams& params, bool keep_per_pair,
                                 unsigned threads = 1);

/// Pair scan over precomputed trajectory matrices. Callers are responsible
/// for having rejected coincident samples.
PairScanResult scan_pair_soft_ranks(const std::vector<Eigen::MatrixXd>& trajectories,
                                    bool keep_per_pair, unsigned threads = 1);

/// Analytic soft-rank of G_x - G_y for the cyclic shift on R^N when x and y
/// are basis states d apart. For M = N the Gram matrix is circulant with
/// eigenvalues 4 sin^2(pi j d / N); for M < N it is the leading M x M block
/// 2I - (unit entries where m - m' = +-d mod N), solved densely.
SoftRankResult shift_system_oracle(int n, int m, int d);

}  // namespace delaykit
