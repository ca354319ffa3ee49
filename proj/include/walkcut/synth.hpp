#pragma once

// Planted-partition attention for tests and demos.

#include "walkcut/attention.hpp"
#include "walkcut/refine.hpp"
#include "walkcut/types.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace walkcut {

struct PlantedSpec {
  int side = 16;
  std::vector<IndexSet> blocks;  ///< partition of [0, side^2)
  double intra = 0.9;            ///< attention mass kept inside the own block, in (0.5, 1]
  double noise = 0.0;            ///< multiplicative noise amplitude, >= 0
  std::uint64_t seed = 1;

  /// Throws InvalidArgument on a bad spec.
  void validate() const;
};

/// Contiguous rectangles from a rows x cols grid split (uneven when side
/// is not divisible), numbered row-major.
std::vector<IndexSet> grid_blocks(int side, int rows, int cols);

/// `count` contiguous rectangles from repeatedly halving the largest one, so
/// every edge lies on a power-of-two subgrid and survives grid pooling.
std::vector<IndexSet> planted_blocks(int side, int count);

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct PlantedTransition {
  TransitionMatrix transition;
  LabelMap labels;  ///< side x side block ids
};

PlantedTransition planted_transition(const PlantedSpec& spec);

/// One map per side (each dividing spec.side), obtained by pooling the
/// planted transition over side-aligned cells; default weights.
AttentionStack planted_stack(const PlantedSpec& spec, const std::vector<int>& sides);

/// Pools a row-stochastic matrix on a fine grid to a coarser grid: query
/// cells are averaged and key cells summed, so rows still sum to 1.
Matrix pool_transition(const Matrix& p, int fine_side, int coarse_side);

}  // namespace walkcut
