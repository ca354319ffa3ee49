#include "walkcut/attention.hpp"

#include "walkcut/error.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace walkcut {

namespace {

int side_of(const Matrix& s) {
  if (s.rows() != s.cols()) throw InvalidArgument("attention map must be square");
  const auto side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(s.rows()))));
  if (static_cast<Eigen::Index>(side) * side != s.rows()) {
    throw InvalidArgument("attention map size " + std::to_string(s.rows()) + " is not a square grid");
  }
  return side;
}

void require_finite(const Matrix& s) {
  if (!s.allFinite()) throw InvalidArgument("attention map contains non-finite entries");
}

// Key-upsampled rows: one row per low-resolution query, T*T columns each,
// renormalized to sum 1.
Matrix upsample_keys(const Matrix& s, int h, int target) {
  const auto taps = bilinear_taps(h, target);
  const Eigen::Index src_n = static_cast<Eigen::Index>(h) * h;
  const Eigen::Index dst_n = static_cast<Eigen::Index>(target) * target;
  Matrix out(src_n, dst_n);
  for (Eigen::Index q = 0; q < src_n; ++q) {
    const double* row = s.data() + q * src_n;
    double* dst = out.data() + q * dst_n;
    double total = 0.0;
    for (int oy = 0; oy < target; ++oy) {
      const auto& ty = taps[static_cast<std::size_t>(oy)];
      const double* r0 = row + static_cast<std::ptrdiff_t>(ty.lo) * h;
      const double* r1 = row + static_cast<std::ptrdiff_t>(ty.hi) * h;
      for (int ox = 0; ox < target; ++ox) {
        const auto& tx = taps[static_cast<std::size_t>(ox)];
        const double top = tx.w_lo * r0[tx.lo] + (1.0 - tx.w_lo) * r0[tx.hi];
        const double bottom = tx.w_lo * r1[tx.lo] + (1.0 - tx.w_lo) * r1[tx.hi];
        const double v = ty.w_lo * top + (1.0 - ty.w_lo) * bottom;
        dst[oy * target + ox] = v;
        total += v;
      }
    }
    if (!(total > 0.0)) throw InvalidArgument("attention row has zero mass after upsampling");
    for (Eigen::Index j = 0; j < dst_n; ++j) dst[j] /= total;
  }
  return out;
}

// Index of the low-resolution query that a high-resolution query copies.
Eigen::Index source_query(Eigen::Index q, int h, int target) {
  const auto i = q / target;
  const auto j = q % target;
  return (i * h / target) * h + (j * h / target);
}

}  // namespace

double max_row_sum_deviation(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  return (m.rowwise().sum().array() - 1.0).abs().maxCoeff();
}

void check_row_stochastic(const Matrix& m, double tol, const char* what) {
  if (m.rows() != m.cols()) throw InvalidArgument(std::string(what) + " must be square");
  if (!m.allFinite()) throw InvalidArgument(std::string(what) + " contains non-finite entries");
  if (m.size() > 0 && m.minCoeff() < 0.0) throw InvalidArgument(std::string(what) + " has negative entries");
  const double dev = max_row_sum_deviation(m);
  if (dev > tol) {
    throw InvalidArgument(std::string(what) + " is not row-stochastic (max row-sum deviation " + std::to_string(dev) +
                          ")");
  }
}

void AttentionStack::validate() const {
  if (maps.empty()) throw InvalidArgument("attention stack is empty");
  if (weights.size() != maps.size()) throw InvalidArgument("one weight per attention map required");
  for (const auto& m : maps) {
    if (side_of(m.s) != m.side) throw InvalidArgument("attention map side does not match its shape");
    check_row_stochastic(m.s, kAttentionRowTolerance, "attention map");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("attention weights must be finite and >= 0");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("attention weights must sum to 1");
}

std::vector<BilinearTap> bilinear_taps(int src, int dst) {
  if (src < 1 || dst < 1) throw InvalidArgument("bilinear sizes must be positive");
  std::vector<BilinearTap> taps(static_cast<std::size_t>(dst));
  const double scale = static_cast<double>(src) / dst;
  for (int o = 0; o < dst; ++o) {
    double x = (o + 0.5) * scale - 0.5;
    if (x < 0.0) x = 0.0;
    if (x > src - 1) x = src - 1;
    const int lo = static_cast<int>(std::floor(x));
    const int hi = lo + 1 < src ? lo + 1 : lo;
    taps[static_cast<std::size_t>(o)] = {lo, hi, 1.0 - (x - lo)};
  }
  return taps;
}

Matrix upsample_attention_map(const Matrix& s, int target_side) {
  const int h = side_of(s);
  require_finite(s);
  if (h < 2) throw InvalidArgument("attention map side must be >= 2");
  if (target_side < h || target_side % h != 0) {
    throw InvalidArgument("source side " + std::to_string(h) + " does not divide target side " +
                          std::to_string(target_side));
  }
  const Matrix keys = upsample_keys(s, h, target_side);
  const Eigen::Index n = static_cast<Eigen::Index>(target_side) * target_side;
  Matrix out(n, n);
  for (Eigen::Index q = 0; q < n; ++q) out.row(q) = keys.row(source_query(q, h, target_side));
  return out;
}

std::vector<double> default_weights(const std::vector<int>& sides) {
  if (sides.empty()) throw InvalidArgument("default_weights needs at least one side");
  const double total = std::accumulate(sides.begin(), sides.end(), 0.0);
  std::vector<double> w;
  w.reserve(sides.size());
  for (int s : sides) w.push_back(s / total);
  return w;
}

TransitionMatrix aggregate(const AttentionStack& stack, const std::set<int>& enabled_sides,
                           const std::optional<std::vector<double>>& weights) {
  if (enabled_sides.empty()) throw InvalidArgument("no attention resolution enabled");
  if (stack.maps.empty()) throw InvalidArgument("attention stack is empty");
  const auto& w = weights ? *weights : stack.weights;
  if (w.size() != stack.maps.size()) throw InvalidArgument("one weight per attention map required");

  int target = 0;
  for (const auto& m : stack.maps) {
    if (side_of(m.s) != m.side) throw InvalidArgument("attention map side does not match its shape");
    target = std::max(target, m.side);
  }

  double enabled_total = 0.0;
  std::set<int> found;
  for (std::size_t r = 0; r < stack.maps.size(); ++r) {
    if (!enabled_sides.count(stack.maps[r].side)) continue;
    if (!(w[r] >= 0.0) || !std::isfinite(w[r])) throw InvalidArgument("attention weights must be finite and >= 0");
    enabled_total += w[r];
    found.insert(stack.maps[r].side);
  }
  for (int side : enabled_sides) {
    if (!found.count(side)) throw InvalidArgument("enabled resolution " + std::to_string(side) + " missing from stack");
  }
  if (!(enabled_total > 0.0)) throw InvalidArgument("enabled attention weights sum to zero");

  const Eigen::Index n = static_cast<Eigen::Index>(target) * target;
  TransitionMatrix out{target, Matrix::Zero(n, n)};
  for (std::size_t r = 0; r < stack.maps.size(); ++r) {
    const auto& map = stack.maps[r];
    if (!enabled_sides.count(map.side)) continue;
    require_finite(map.s);
    check_row_stochastic(map.s, kAttentionRowTolerance, "attention map");
    const double weight = w[r] / enabled_total;
    if (map.side == target) {
      const Eigen::VectorXd sums = map.s.rowwise().sum();
      if ((sums.array() <= 0.0).any()) throw InvalidArgument("attention row has zero mass");
      out.p.noalias() += weight * (sums.cwiseInverse().asDiagonal() * map.s);
      continue;
    }
    if (map.side < 2 || target % map.side != 0) {
      throw InvalidArgument("side " + std::to_string(map.side) + " does not divide " + std::to_string(target));
    }
    const Matrix keys = upsample_keys(map.s, map.side, target);
    for (Eigen::Index q = 0; q < n; ++q) out.p.row(q) += weight * keys.row(source_query(q, map.side, target));
  }
  check_row_stochastic(out.p, kTransitionRowTolerance, "aggregated transition matrix");
  return out;
}

}  // namespace walkcut
