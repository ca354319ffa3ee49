#pragma once

// Weighted graphs over latent patches and the cut quantities used by
// Normalised Cuts and MAN-C.

#include "walkcut/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace walkcut {

enum class Similarity { dot, cosine };

/// Symmetric, non-negative weight matrix.
struct AdjacencyMatrix {
  Matrix a;
  bool self_loops_included = true;

  Eigen::Index size() const { return a.rows(); }
};

struct GraphStats {
  Eigen::Index n = 0;
  std::int64_t m = 0;     ///< edges i<j with positive weight (diagonal excluded)
  double total = 0.0;     ///< T: sum of a[i][j] over i<j
  Vector degrees;         ///< row sums, diagonal included
};

struct Bipartition {
  IndexSet side_a;
  IndexSet side_b;

  /// Side A = vertices with in_a[v] true.
  static Bipartition from_mask(const std::vector<bool>& in_a);
  /// Throws InvalidArgument unless the sides are disjoint, non-empty and cover [0, n).
  void validate(Eigen::Index n) const;
};

AdjacencyMatrix build_adjacency(const Matrix& p, Similarity similarity);

/// Symmetrized (M + M^T) / 2 wrapped as an adjacency.
AdjacencyMatrix symmetrized(const Matrix& m);

/// Principal submatrix on `subset`.
AdjacencyMatrix induced_subgraph(const AdjacencyMatrix& adj, const IndexSet& subset);
AdjacencyMatrix induced_subgraph(const Matrix& a, const IndexSet& subset);

GraphStats graph_stats(const AdjacencyMatrix& adj);

double cut_cost(const AdjacencyMatrix& adj, const Bipartition& part);

/// Sum of degrees over `side` (connection from the side to every vertex).
double assoc(const AdjacencyMatrix& adj, const IndexSet& side);

/// cut/assoc(A,V) + cut/assoc(B,V); throws DegeneratePartition on zero assoc.
double ncut_cost(const AdjacencyMatrix& adj, const Bipartition& part);

/// n T / (2 m); throws InvalidArgument on an edgeless graph.
double manc_threshold(const GraphStats& stats);

enum class MinCutMode { exact, proxy };

inline constexpr Eigen::Index kMaxExactMinCutVertices = 512;

struct MinCut {
  double weight = 0.0;
  std::vector<bool> side;  ///< one shore of the cut (exact mode only)
};

/// Global minimum cut by Stoer-Wagner.
MinCut stoer_wagner(const AdjacencyMatrix& adj);

/// exact: Stoer-Wagner (n <= 512). proxy: returns `proxy_cut`, the cut of
/// the bipartition currently proposed by Normalised Cuts.
double min_cut(const AdjacencyMatrix& adj, MinCutMode mode, std::optional<double> proxy_cut = std::nullopt);

}  // namespace walkcut
