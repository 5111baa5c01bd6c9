#include "delaykit/spectral.hpp"

#include "delaykit/error.hpp"
#include "delaykit/parallel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace delaykit {

int SoftRankResult::rank(double rel_tol) const {
  if (singular_values.size() == 0) return 0;
  const double cutoff = rel_tol * singular_values(0);
  int r = 0;
  for (Eigen::Index k = 0; k < singular_values.size(); ++k) {
    if (singular_values(k) > cutoff) ++r;
  }
  return r;
}

SoftRankResult soft_rank(const Eigen::Ref<const Eigen::MatrixXd>& g) {
  if (g.size() == 0 || !g.allFinite()) {
    throw Error(ErrorKind::invalid_argument, "soft-rank needs a non-empty finite matrix");
  }
  if (g.cwiseAbs().maxCoeff() == 0.0) {
    throw Error(ErrorKind::undefined_soft_rank, "zero matrix has no soft-rank (0/0)");
  }
  // Eigen 3.4's divide-and-conquer SVD loses accuracy on the heavily
  // degenerate spectra of shift-system differences; one-sided Jacobi does not.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g);
  SoftRankResult out;
  out.singular_values = svd.singularValues();
  out.frobenius_sq = g.squaredNorm();
  out.spectral_sq = out.singular_values(0) * out.singular_values(0);
  out.value = out.frobenius_sq / out.spectral_sq;
  return out;
}

void require_distinct(const StateVector& x, const StateVector& y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::dimension_mismatch, "pair states have different lengths");
  }
  const double scale = std::max(x.norm(), y.norm());
  if (!((x - y).norm() > 1e-12 * scale)) {
    throw Error(ErrorKind::degenerate_pair, "coincident points have no pair soft-rank");
  }
}

SoftRankResult pair_soft_rank(const FlowSpec& flow, const StateVector& x, const StateVector& y,
                              const DelayParams& params) {
  require_distinct(x, y);
  const TrajectoryMatrix gx = trajectory_matrix(flow, x, params);
  const TrajectoryMatrix gy = trajectory_matrix(flow, y, params);
  return soft_rank(gx.g - gy.g);
}

namespace {

struct ScanBest {
  double value = std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  std::size_t j = 0;
};

// True when (value, i, j) should replace `best` under min-with-lexicographic-ties.
bool improves(const ScanBest& best, double value, std::size_t i, std::size_t j) {
  if (value != best.value) return value < best.value;
  return std::pair(i, j) < std::pair(best.i, best.j);
}

}  // namespace

PairScanResult scan_pair_soft_ranks(const std::vector<Eigen::MatrixXd>& mats,
                                    bool keep_per_pair, unsigned threads) {
  const std::size_t n = mats.size();
  if (n < 2) {
    throw Error(ErrorKind::insufficient_samples,
                "pair scan needs at least 2 samples, got " + std::to_string(n));
  }
  // Row i owns pairs (i, i+1..n-1); rows are chunked, and pair order inside a
  // chunk is lexicographic, so per_pair needs no re-sorting.
  std::vector<std::size_t> row_offset(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) row_offset[i + 1] = row_offset[i] + (n - 1 - i);
  const std::size_t num_pairs = row_offset[n];

  const unsigned workers = resolve_threads(threads);
  std::vector<ScanBest> best(workers);
  std::vector<PairSoftRank> per_pair;
  if (keep_per_pair) per_pair.resize(num_pairs);

  parallel_chunks(n - 1, workers, [&](std::size_t w, std::size_t begin, std::size_t end) {
    ScanBest local;
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double r = soft_rank(mats[i] - mats[j]).value;
        if (keep_per_pair) per_pair[row_offset[i] + (j - i - 1)] = PairSoftRank{i, j, r};
        if (improves(local, r, i, j)) local = ScanBest{r, i, j};
      }
    }
    best[w] = local;
  });

  ScanBest merged;
  for (const auto& b : best) {
    if (std::isfinite(b.value) && improves(merged, b.value, b.i, b.j)) merged = b;
  }
  PairScanResult out;
  out.infimum = merged.value;
  out.argmin_pair = {merged.i, merged.j};
  out.num_pairs = num_pairs;
  out.num_samples = n;
  if (keep_per_pair) out.per_pair = std::move(per_pair);
  return out;
}

PairScanResult infimum_soft_rank(const FlowSpec& flow, const std::vector<StateVector>& samples,
                                 const DelayParams& params, bool keep_per_pair,
                                 unsigned threads) {
  const std::size_t n = samples.size();
  if (n < 2) {
    throw Error(ErrorKind::insufficient_samples,
                "pair scan needs at least 2 samples, got " + std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      try {
        require_distinct(samples[i], samples[j]);
      } catch (const Error& e) {
        throw Error(e.kind(), "samples " + std::to_string(i) + " and " + std::to_string(j) +
                                  " coincide");
      }
    }
  }
  std::vector<Eigen::MatrixXd> mats;
  mats.reserve(n);
  for (const auto& s : samples) mats.push_back(trajectory_matrix(flow, s, params).g);
  return scan_pair_soft_ranks(mats, keep_per_pair, threads);
}

SoftRankResult shift_system_oracle(int n, int m, int d) {
  if (n < 2 || m < 1 || m > n || d < 1 || d > n - 1) {
    throw Error(ErrorKind::out_of_range, "shift oracle needs 1 <= d < N and 1 <= M <= N (N=" +
                                             std::to_string(n) + ", M=" + std::to_string(m) +
                                             ", d=" + std::to_string(d) + ")");
  }
  Eigen::VectorXd eig(m);
  if (m == n) {
    for (int j = 0; j < n; ++j) {
      const double s = std::sin(std::numbers::pi * static_cast<double>(j) * d / n);
      eig(j) = 4.0 * s * s;
    }
  } else {
    Eigen::MatrixXd gram = 2.0 * Eigen::MatrixXd::Identity(m, m);
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) {
        const int offset = ((a - b) % n + n) % n;
        if (offset == d) gram(a, b) -= 1.0;
        if (offset == n - d) gram(a, b) -= 1.0;
      }
    }
    eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram, Eigen::EigenvaluesOnly).eigenvalues();
  }
  std::sort(eig.data(), eig.data() + eig.size(), std::greater<>());

  SoftRankResult out;
  out.singular_values = eig.cwiseMax(0.0).cwiseSqrt();
  out.frobenius_sq = 2.0 * m;
  out.spectral_sq = eig(0);
  out.value = out.frobenius_sq / out.spectral_sq;
  if (out.value < 0.5 * m * (1.0 - 1e-12)) {
    throw std::logic_error("shift oracle produced soft-rank below M/2");
  }
  return out;
}

}  // namespace delaykit
