#include "walkcut/pipeline.hpp"

#include "walkcut/error.hpp"
#include "walkcut/graph.hpp"
#include "walkcut/tensor_store.hpp"
#include "walkcut/walk.hpp"

#include <algorithm>

namespace walkcut {

AttentionStack load_attention_stack(const ManifestEntry& entry, const std::set<int>& resolutions) {
  AttentionStack stack;
  std::vector<int> sides;
  for (int side : resolutions) {
    const auto it = entry.attention.find(side);
    if (it == entry.attention.end()) {
      throw InvalidArgument(entry.image_id + ": no attention tensor for resolution " + std::to_string(side));
    }
    TensorFile t = read_tensor(it->second);
    const auto n = static_cast<std::uint64_t>(side) * static_cast<std::uint64_t>(side);
    const auto s = static_cast<std::uint64_t>(side);
    if (t.shape == std::vector<std::uint64_t>{s, s, s, s}) t.shape = {n, n};
    if (t.shape != std::vector<std::uint64_t>{n, n}) {
      throw FormatError(FormatErrc::invalid_shape, it->second.string() + ": expected (" + std::to_string(n) + ", " +
                                                       std::to_string(n) + ") attention for side " + std::to_string(side));
    }
    stack.maps.push_back({side, tensor_to_matrix(t)});
    sides.push_back(side);
  }
  stack.weights = default_weights(sides);
  return stack;
}

SegmentOutput segment_stack(const AttentionStack& stack, const RunConfig& config, int out_h, int out_w) {
  std::optional<std::vector<double>> weights;
  if (config.weights) {
    std::vector<double> w(stack.maps.size(), 0.0);
    std::vector<std::size_t> order(stack.maps.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return stack.maps[a].side < stack.maps[b].side; });
    std::size_t next = 0;
    for (auto i : order) {
      if (!config.resolutions.count(stack.maps[i].side)) continue;
      if (next >= config.weights->size()) throw ConfigError("more enabled maps than weights");
      w[i] = (*config.weights)[next++];
    }
    weights = std::move(w);
  }

  SegmentOutput out;
  out.transition = aggregate(stack, config.resolutions, weights);
  const Matrix& p = out.transition.p;
  const Matrix walked = config.walk_k > 1 ? matrix_power(p, config.walk_k) : Matrix{};
  const Matrix& pk = config.walk_k > 1 ? walked : p;

  PartitionOptions options;
  options.threshold_candidates = config.threshold_candidates;
  if (config.formulation == Formulation::adjacency) {
    out.tree = recursive_ncut(build_adjacency(pk, config.similarity).a, Formulation::adjacency, config.rule, options);
  } else {
    out.tree = recursive_ncut(pk, Formulation::random_walk, config.rule, options);
  }

  const int side = out.transition.side;
  out.latent = tree_label_map(out.tree, side);
  AssignOptions assign;
  assign.memory_budget = config.memory_budget;
  assign.interpolate_scores = config.interpolate_scores;
  out.labels = upsample_assign(p, side, segment_prototypes(p, out.tree), out_h, out_w, assign, &out.assign);
  return out;
}

}  // namespace walkcut
