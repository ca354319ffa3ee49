#pragma once

#include <Eigen/Dense>

#include <vector>

namespace walkcut {

/// Dense row-major matrix used for attention, transition and adjacency data.
/// Computation is carried out in double precision; float32 is the on-disk type.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Sorted list of vertex (latent patch) indices.
using IndexSet = std::vector<int>;

}  // namespace walkcut
