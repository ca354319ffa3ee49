#pragma once

// Segment prototypes and image-resolution label assignment.

#include "walkcut/partitioner.hpp"
#include "walkcut/types.hpp"

#include <cstdint>
#include <vector>

namespace walkcut {

/// Per-pixel label image.
struct LabelMap {
  int height = 0;
  int width = 0;
  std::vector<std::uint16_t> labels;  ///< row-major

  LabelMap() = default;
  LabelMap(int h, int w, std::uint16_t fill = 0)
      : height(h), width(w), labels(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), fill) {}

  std::uint16_t& at(int y, int x) { return labels[static_cast<std::size_t>(y) * width + x]; }
  std::uint16_t at(int y, int x) const { return labels[static_cast<std::size_t>(y) * width + x]; }
  std::uint16_t max_label() const;
  bool operator==(const LabelMap&) const = default;
};

/// K x N matrix: row k is the mean of the transition rows of segment k.
struct SegmentPrototypes {
  Matrix protos;

  int count() const { return static_cast<int>(protos.rows()); }
};

SegmentPrototypes segment_prototypes(const Matrix& p, const SegmentationTree& tree);

struct AssignOptions {
  std::size_t memory_budget = std::size_t{512} << 20;  ///< bytes of interpolated features held at once
  /// Interpolate the per-patch cosine scores instead of the features
  /// (cheaper, not equivalent).
  bool interpolate_scores = false;
};

struct AssignStats {
  int tile_rows = 0;
  int dropped_segments = 0;  ///< prototypes that win no pixel
};

/// Bilinearly interpolates the side x side grid of transition rows to
/// out_h x out_w (align-corners=false, edge clamp), then labels each pixel
/// with the prototype of highest cosine similarity (ties: lowest id).
LabelMap upsample_assign(const Matrix& p, int side, const SegmentPrototypes& protos, int out_h, int out_w,
                         const AssignOptions& options = {}, AssignStats* stats = nullptr);

/// Latent labels of a tree as a side x side map.
LabelMap tree_label_map(const SegmentationTree& tree, int side);

/// Nearest-neighbour resize (used for ground truth at a different scale).
LabelMap resize_nearest(const LabelMap& m, int out_h, int out_w);

}  // namespace walkcut
