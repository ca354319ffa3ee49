#pragma once

// Recursive two-way Normalised Cuts with pluggable stopping rules.

#include "walkcut/graph.hpp"
#include "walkcut/spectral.hpp"
#include "walkcut/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace walkcut {

enum class Formulation { adjacency, random_walk };

enum class StopKind { fixed_ncut, manc_ncut, manc_scaled_mincut };

struct StoppingRule {
  StopKind kind = StopKind::manc_ncut;
  std::optional<double> tau;  ///< required for fixed_ncut, rejected otherwise
  int min_segment_size = 1;
  MinCutMode min_cut_mode = MinCutMode::proxy;

  static StoppingRule fixed(double tau) { return {StopKind::fixed_ncut, tau}; }
  static StoppingRule manc_ncut() { return {StopKind::manc_ncut, std::nullopt}; }
  static StoppingRule manc_scaled_mincut() { return {StopKind::manc_scaled_mincut, std::nullopt}; }

  /// Throws ConfigError on an inconsistent rule.
  void validate() const;
};

enum class StopReason {
  none,              ///< internal node
  single_vertex,
  too_small,         ///< fewer than 2 * min_segment_size vertices
  cost_threshold,    ///< fixed_ncut: cost > tau
  manc_ncut,         ///< cost >= n T / 2m
  manc_scaled_mincut,
  edgeless,
  spectral_failure,
};

const char* to_string(StopReason r);
const char* to_string(StopKind k);
const char* to_string(Formulation f);

struct StopDecision {
  bool stop = false;
  StopReason reason = StopReason::none;
  double statistic = 0.0;  ///< left-hand side of the comparison
  double threshold = 0.0;  ///< right-hand side
};

/// Evaluates the stopping rule for a proposed split of the current subgraph.
StopDecision should_stop(const StoppingRule& rule, const SplitResult& split, const AdjacencyMatrix& sub_adj,
                         const GraphStats& stats);

struct TreeNode {
  IndexSet indices;
  int children[2] = {-1, -1};
  std::optional<double> split_cost;
  std::optional<double> rule_statistic;
  std::optional<double> rule_threshold;
  StopReason stop_reason = StopReason::none;

  bool is_leaf() const { return children[0] < 0; }
};

struct SegmentationTree {
  std::vector<TreeNode> nodes;  ///< nodes[0] is the root
  std::vector<int> leaf_labels; ///< per-vertex segment id in [0, K)
  std::vector<int> leaves;      ///< node index of each segment id

  int num_segments() const { return static_cast<int>(leaves.size()); }
};

struct PartitionOptions {
  SpectralOptions spectral;
  int threshold_candidates = kAllThresholds;
};

/// Recursive NCut over a symmetric adjacency or a row-stochastic matrix.
/// Any walk power is applied by the caller. Nodes whose spectral step fails
/// become leaves with StopReason::spectral_failure.
SegmentationTree recursive_ncut(const Matrix& matrix, Formulation formulation, const StoppingRule& rule,
                                const PartitionOptions& options = {});

/// True when every leaf of `coarse` is a union of leaves of `fine`.
bool refines(const SegmentationTree& fine, const SegmentationTree& coarse);

}  // namespace walkcut
