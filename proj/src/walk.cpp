#include "walkcut/walk.hpp"

#include "walkcut/error.hpp"

#include <set>
#include <string>

namespace walkcut {

void WalkConfig::validate() const {
  if (k < 1 || k > kMaxSteps) throw ConfigError("walk steps k must be in [1, 16], got " + std::to_string(k));
}

void renormalize_rows(Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double s = m.row(i).sum();
    if (s > 0.0) {
      m.row(i) /= s;
    } else {
      m.row(i).setConstant(1.0 / static_cast<double>(m.cols()));
    }
  }
}

Matrix matrix_power(const Matrix& p, int k) {
  if (k < 1) throw InvalidArgument("matrix_power needs k >= 1, got " + std::to_string(k));
  if (p.rows() != p.cols()) throw InvalidArgument("matrix_power needs a square matrix");
  if (k == 1) return p;

  Matrix result;
  bool have_result = false;
  Matrix base = p;
  Matrix scratch(p.rows(), p.cols());
  while (true) {
    if (k & 1) {
      if (have_result) {
        scratch.noalias() = result * base;
        result.swap(scratch);
      } else {
        result = base;
        have_result = true;
      }
    }
    k >>= 1;
    if (k == 0) break;
    scratch.noalias() = base * base;
    base.swap(scratch);
  }
  renormalize_rows(result);
  return result;
}

Matrix restrict_renormalize(const Matrix& p, const IndexSet& subset) {
  if (subset.empty()) throw InvalidArgument("restrict_renormalize needs a non-empty subset");
  std::set<int> unique;
  for (int i : subset) {
    if (i < 0 || i >= p.rows()) throw InvalidArgument("subset index " + std::to_string(i) + " out of range");
    if (!unique.insert(i).second) throw InvalidArgument("subset index " + std::to_string(i) + " repeated");
  }
  const auto n = static_cast<Eigen::Index>(subset.size());
  Matrix sub(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) sub(a, b) = p(subset[static_cast<std::size_t>(a)], subset[static_cast<std::size_t>(b)]);
  renormalize_rows(sub);
  return sub;
}

}  // namespace walkcut
