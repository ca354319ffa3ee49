#pragma once

// Fiedler vectors by deflated power iteration, for both the symmetric
// adjacency formulation (L x = lambda D x) and a row-stochastic transition
// matrix, plus the threshold sweep that turns a Fiedler vector into a
// minimum-NCut bipartition.

#include "walkcut/graph.hpp"
#include "walkcut/types.hpp"

#include <cstdint>

namespace walkcut {

struct SpectralOptions {
  int max_iterations = 5000;
  double tolerance = 1e-10;         ///< on the eigen-residual of the unit iterate
  int shift_probe_iterations = 60;  ///< iterations spent estimating the lower spectrum edge
  int stall_window = 100;           ///< a residual that does not halve over this many iterations triggers a Ritz step
  int ritz_dimension = 8;           ///< Krylov block size of the Ritz step
  double cluster_tolerance = 1e-4;  ///< residual accepted at max_iterations as a degenerate eigenspace
  std::uint64_t seed = 0x5eed;      ///< deterministic start vector
};

struct FiedlerResult {
  Vector vector;                 ///< x2, unit Euclidean norm, first non-negligible entry positive
  double eigenvalue = 0.0;       ///< lambda2 of L x = lambda D x (equivalently of I - P)
  double walk_eigenvalue = 1.0;  ///< mu2 = 1 - lambda2, second eigenvalue of the walk matrix
  int iterations = 0;
  double residual = 0.0;         ///< ||L x - lambda D x|| / ||x||, or ||P x - mu x|| / ||x||
  double gap_estimate = 0.0;     ///< estimated distance to the next eigenvalue
  bool degenerate = false;       ///< accepted from a (nearly) repeated eigenvalue cluster
};

/// Symmetric formulation: deflates D^{1/2} 1 from D^{-1/2} A D^{-1/2}.
/// Throws SpectralError (zero_degree, non_convergence, degenerate_spectrum).
FiedlerResult fiedler_symmetric(const AdjacencyMatrix& adj, const SpectralOptions& options = {});

/// Random-walk formulation: deflates the right eigenvector 1 of P by
/// centring (x <- x - mean(x) 1) and power-iterates P itself. The returned
/// vector is the right eigenvector of P recovered from the deflated iterate.
FiedlerResult fiedler_stochastic(const Matrix& p, const SpectralOptions& options = {});

struct SplitResult {
  Bipartition partition;  ///< side A = { v : x2(v) <= threshold }
  double threshold = 0.0;
  double cost = 0.0;      ///< ncut_cost(adj, partition)
  double cut = 0.0;       ///< cut_cost(adj, partition)
};

inline constexpr int kAllThresholds = 0;

/// Sweep candidate thresholds over the Fiedler values and keep the lowest
/// NCut. With num_candidates == kAllThresholds, or when n - 1 <= num_candidates,
/// every midpoint between consecutive distinct values is tried; otherwise the
/// num_candidates interior quantiles. Splits leaving fewer than `min_side`
/// vertices on a side are skipped. Ties go to the more balanced split, then
/// to the lower threshold.
SplitResult best_threshold_split(const FiedlerResult& fiedler, const AdjacencyMatrix& adj, int num_candidates,
                                 int min_side = 1);

}  // namespace walkcut
