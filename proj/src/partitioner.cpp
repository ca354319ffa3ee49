#include "walkcut/partitioner.hpp"

#include "walkcut/attention.hpp"
#include "walkcut/error.hpp"
#include "walkcut/walk.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace walkcut {

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::none: return "none";
    case StopReason::single_vertex: return "single_vertex";
    case StopReason::too_small: return "too_small";
    case StopReason::cost_threshold: return "cost_threshold";
    case StopReason::manc_ncut: return "manc_ncut";
    case StopReason::manc_scaled_mincut: return "manc_scaled_mincut";
    case StopReason::edgeless: return "edgeless";
    case StopReason::spectral_failure: return "spectral_failure";
  }
  return "unknown";
}

const char* to_string(StopKind k) {
  switch (k) {
    case StopKind::fixed_ncut: return "fixed_ncut";
    case StopKind::manc_ncut: return "manc_ncut";
    case StopKind::manc_scaled_mincut: return "manc_scaled_mincut";
  }
  return "unknown";
}

const char* to_string(Formulation f) {
  return f == Formulation::adjacency ? "adjacency" : "random_walk";
}

void StoppingRule::validate() const {
  if (kind == StopKind::fixed_ncut) {
    if (!tau) throw ConfigError("fixed_ncut rule requires tau");
    if (!(*tau > 0.0 && *tau < 2.0)) throw ConfigError("tau must lie in (0, 2)");
  } else if (tau) {
    throw ConfigError(std::string(to_string(kind)) + " rule is hyperparameter-free and does not take tau");
  }
  if (min_segment_size < 1) throw ConfigError("min_segment_size must be >= 1");
}

StopDecision should_stop(const StoppingRule& rule, const SplitResult& split, const AdjacencyMatrix& sub_adj,
                         const GraphStats& stats) {
  StopDecision d;
  if (stats.m < 1) {
    d.stop = true;
    d.reason = StopReason::edgeless;
    return d;
  }
  switch (rule.kind) {
    case StopKind::fixed_ncut:
      d.statistic = split.cost;
      d.threshold = rule.tau.value_or(0.0);
      d.stop = d.statistic > d.threshold;
      d.reason = StopReason::cost_threshold;
      break;
    case StopKind::manc_ncut:
      d.statistic = split.cost;
      d.threshold = manc_threshold(stats);
      d.stop = d.statistic >= d.threshold;
      d.reason = StopReason::manc_ncut;
      break;
    case StopKind::manc_scaled_mincut:
      d.statistic = min_cut(sub_adj, rule.min_cut_mode, split.cut) / stats.total;
      d.threshold = manc_threshold(stats);
      d.stop = d.statistic >= d.threshold;
      d.reason = StopReason::manc_scaled_mincut;
      break;
  }
  if (!d.stop) d.reason = StopReason::none;
  return d;
}

namespace {

struct Partitioner {
  const Matrix& matrix;
  Formulation formulation;
  const StoppingRule& rule;
  const PartitionOptions& options;
  SegmentationTree tree;

  void make_leaf(int node, StopReason reason) { tree.nodes[static_cast<std::size_t>(node)].stop_reason = reason; }

  // Returns the local bipartition of a node, or nothing when it becomes a leaf.
  std::optional<SplitResult> try_split(int node) {
    auto& current = tree.nodes[static_cast<std::size_t>(node)];
    const auto n = static_cast<int>(current.indices.size());
    if (n == 1) {
      make_leaf(node, StopReason::single_vertex);
      return std::nullopt;
    }
    if (n < 2 * rule.min_segment_size) {
      make_leaf(node, StopReason::too_small);
      return std::nullopt;
    }

    AdjacencyMatrix cost_graph;
    Matrix walk;
    if (formulation == Formulation::adjacency) {
      cost_graph = induced_subgraph(matrix, current.indices);
    } else {
      walk = restrict_renormalize(matrix, current.indices);
      cost_graph = symmetrized(walk);
    }
    const GraphStats stats = graph_stats(cost_graph);
    if (stats.m < 1) {
      make_leaf(node, StopReason::edgeless);
      return std::nullopt;
    }

    SplitResult split;
    try {
      const FiedlerResult fiedler = formulation == Formulation::adjacency
                                        ? fiedler_symmetric(cost_graph, options.spectral)
                                        : fiedler_stochastic(walk, options.spectral);
      split = best_threshold_split(fiedler, cost_graph, options.threshold_candidates, rule.min_segment_size);
    } catch (const SpectralError&) {
      make_leaf(node, StopReason::spectral_failure);
      return std::nullopt;
    } catch (const DegeneratePartition&) {
      make_leaf(node, StopReason::spectral_failure);
      return std::nullopt;
    }

    const StopDecision decision = should_stop(rule, split, cost_graph, stats);
    current.split_cost = split.cost;
    current.rule_statistic = decision.statistic;
    current.rule_threshold = decision.threshold;
    if (decision.stop) {
      make_leaf(node, decision.reason);
      return std::nullopt;
    }
    return split;
  }

  void run() {
    const auto n = matrix.rows();
    TreeNode root;
    root.indices.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) root.indices[static_cast<std::size_t>(i)] = static_cast<int>(i);
    tree.nodes.push_back(std::move(root));
    tree.leaf_labels.assign(static_cast<std::size_t>(n), -1);

    std::vector<int> stack{0};
    while (!stack.empty()) {
      const int node = stack.back();
      stack.pop_back();
      auto split = try_split(node);
      if (!split) {
        const int label = static_cast<int>(tree.leaves.size());
        tree.leaves.push_back(node);
        for (int v : tree.nodes[static_cast<std::size_t>(node)].indices) tree.leaf_labels[static_cast<std::size_t>(v)] = label;
        continue;
      }
      const IndexSet parent = tree.nodes[static_cast<std::size_t>(node)].indices;
      int ids[2];
      for (int side = 0; side < 2; ++side) {
        const auto& local = side == 0 ? split->partition.side_a : split->partition.side_b;
        TreeNode child;
        child.indices.reserve(local.size());
        for (int v : local) child.indices.push_back(parent[static_cast<std::size_t>(v)]);
        ids[side] = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back(std::move(child));
      }
      tree.nodes[static_cast<std::size_t>(node)].children[0] = ids[0];
      tree.nodes[static_cast<std::size_t>(node)].children[1] = ids[1];
      stack.push_back(ids[1]);
      stack.push_back(ids[0]);
    }
  }
};

}  // namespace

SegmentationTree recursive_ncut(const Matrix& matrix, Formulation formulation, const StoppingRule& rule,
                                const PartitionOptions& options) {
  rule.validate();
  if (matrix.rows() != matrix.cols()) throw InvalidArgument("recursive_ncut needs a square matrix");
  if (matrix.rows() < 1) throw InvalidArgument("recursive_ncut needs at least one vertex");
  if (!matrix.allFinite() || matrix.minCoeff() < 0.0) {
    throw InvalidArgument("recursive_ncut needs finite, non-negative weights");
  }
  if (formulation == Formulation::adjacency) {
    if (!matrix.isApprox(matrix.transpose(), 1e-12)) throw InvalidArgument("adjacency formulation needs a symmetric matrix");
  } else {
    check_row_stochastic(matrix, kTransitionRowTolerance, "random-walk matrix");
  }
  Partitioner p{matrix, formulation, rule, options, {}};
  p.run();
  return std::move(p.tree);
}

bool refines(const SegmentationTree& fine, const SegmentationTree& coarse) {
  if (fine.leaf_labels.size() != coarse.leaf_labels.size()) return false;
  std::vector<int> owner(static_cast<std::size_t>(fine.num_segments()), -1);
  for (std::size_t v = 0; v < fine.leaf_labels.size(); ++v) {
    auto& o = owner[static_cast<std::size_t>(fine.leaf_labels[v])];
    if (o < 0) {
      o = coarse.leaf_labels[v];
    } else if (o != coarse.leaf_labels[v]) {
      return false;
    }
  }
  return true;
}

}  // namespace walkcut
