#pragma once

// Random-walk operations on row-stochastic matrices.

#include "walkcut/types.hpp"

namespace walkcut {

struct WalkConfig {
  int k = 1;  ///< number of random-walk steps

  static constexpr int kMaxSteps = 16;
  void validate() const;  ///< k in [1, 16]
};

/// P^k by repeated squaring; rows renormalized once at the end.
Matrix matrix_power(const Matrix& p, int k);

/// P[subset, subset] with each row rescaled to sum 1. Rows with no mass
/// inside the subset become uniform over the subset.
Matrix restrict_renormalize(const Matrix& p, const IndexSet& subset);

/// Rescale each row to unit sum; zero rows become uniform.
void renormalize_rows(Matrix& m);

}  // namespace walkcut
