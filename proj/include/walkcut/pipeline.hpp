#pragma once

// One image through the whole engine.

#include "walkcut/attention.hpp"
#include "walkcut/config.hpp"
#include "walkcut/manifest.hpp"
#include "walkcut/partitioner.hpp"
#include "walkcut/refine.hpp"

namespace walkcut {

struct SegmentOutput {
  TransitionMatrix transition;  ///< aggregated, before any walk power
  SegmentationTree tree;
  LabelMap latent;              ///< side x side segment ids
  LabelMap labels;              ///< output resolution
  AssignStats assign;
};

/// Reads the enabled resolutions of an entry, in ascending side order.
/// Tensors are float32 of shape (s^2, s^2) or (s, s, s, s).
AttentionStack load_attention_stack(const ManifestEntry& entry, const std::set<int>& resolutions);

/// aggregate -> power walk -> graph -> recursive NCut -> prototypes -> assignment.
/// The config must already be validated. config.weights apply to the stack
/// maps whose side is enabled, in ascending side order.
SegmentOutput segment_stack(const AttentionStack& stack, const RunConfig& config, int out_h, int out_w);

}  // namespace walkcut
