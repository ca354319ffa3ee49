#pragma once

// Aggregation of multi-resolution self-attention maps into a single
// row-stochastic transition matrix at the finest latent resolution.

#include "walkcut/types.hpp"

#include <optional>
#include <set>
#include <vector>

namespace walkcut {

/// One head-summed, row-softmaxed self-attention map of shape (side^2, side^2).
struct AttentionMap {
  int side = 0;
  Matrix s;
};

struct AttentionStack {
  std::vector<AttentionMap> maps;
  std::vector<double> weights;  ///< one per map, summing to 1

  /// Throws InvalidArgument when an invariant is violated
  /// (non-finite or negative entries, row sums off by more than 1e-4, bad weights).
  void validate() const;
};

/// Row-stochastic matrix over the side x side latent grid.
struct TransitionMatrix {
  int side = 0;
  Matrix p;

  Eigen::Index size() const { return p.rows(); }
};

inline constexpr double kAttentionRowTolerance = 1e-4;
inline constexpr double kTransitionRowTolerance = 1e-5;

/// Largest deviation of any row sum from 1.
double max_row_sum_deviation(const Matrix& m);

/// Throws InvalidArgument unless `m` is square with finite, non-negative
/// entries whose rows sum to 1 within `tol`.
void check_row_stochastic(const Matrix& m, double tol, const char* what);

/// Linear-interpolation taps for resizing a 1-D axis with align-corners=false
/// and edge clamping. Output position o reads source (o + 0.5) * src / dst - 0.5.
struct BilinearTap {
  int lo = 0;
  int hi = 0;
  double w_lo = 1.0;  ///< weight of `lo`; `hi` receives 1 - w_lo
};
std::vector<BilinearTap> bilinear_taps(int src, int dst);

/// Bilinear in the key dimensions, nearest-neighbour in the query dimensions,
/// followed by per-row renormalization.
Matrix upsample_attention_map(const Matrix& s, int target_side);

/// w_r proportional to side length.
std::vector<double> default_weights(const std::vector<int>& sides);

/// Weighted sum of the enabled maps, each upsampled to the finest side present
/// in the stack. Weights are renormalized over the enabled subset; `weights`
/// overrides the stack's own weights when given (one per map in stack order).
TransitionMatrix aggregate(const AttentionStack& stack, const std::set<int>& enabled_sides,
                           const std::optional<std::vector<double>>& weights = std::nullopt);

}  // namespace walkcut
