#include "walkcut/refine.hpp"

#include "walkcut/attention.hpp"
#include "walkcut/error.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <string>

namespace walkcut {

std::uint16_t LabelMap::max_label() const {
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
}

SegmentPrototypes segment_prototypes(const Matrix& p, const SegmentationTree& tree) {
  if (static_cast<Eigen::Index>(tree.leaf_labels.size()) != p.rows()) {
    throw InvalidArgument("segmentation tree does not cover the transition matrix");
  }
  const int k = tree.num_segments();
  SegmentPrototypes out{Matrix::Zero(k, p.cols())};
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const int label = tree.leaf_labels[static_cast<std::size_t>(i)];
    if (label < 0 || label >= k) throw InvalidArgument("leaf label out of range");
    out.protos.row(label) += p.row(i);
    ++counts[static_cast<std::size_t>(label)];
  }
  for (int s = 0; s < k; ++s) {
    if (counts[static_cast<std::size_t>(s)] == 0) throw InvalidArgument("empty segment in tree");
    out.protos.row(s) /= counts[static_cast<std::size_t>(s)];
  }
  return out;
}

namespace {

// Cosine argmax of one feature against all prototypes. Plain loops keep the
// floating-point evaluation order fixed.
std::uint16_t best_prototype(const double* f, Eigen::Index n, const Matrix& protos, const std::vector<double>& proto_norm) {
  double norm2 = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) norm2 += f[j] * f[j];
  const double fnorm = std::sqrt(norm2);
  std::uint16_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < protos.rows(); ++k) {
    const double* q = protos.data() + k * n;
    double dot = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) dot += f[j] * q[j];
    const double denom = fnorm * proto_norm[static_cast<std::size_t>(k)];
    const double score = denom > 0.0 ? dot / denom : 0.0;
    if (score > best_score) {
      best_score = score;
      best = static_cast<std::uint16_t>(k);
    }
  }
  return best;
}

}  // namespace

LabelMap upsample_assign(const Matrix& p, int side, const SegmentPrototypes& protos, int out_h, int out_w,
                         const AssignOptions& options, AssignStats* stats) {
  const Eigen::Index n = p.cols();
  if (static_cast<Eigen::Index>(side) * side != p.rows()) throw InvalidArgument("side does not match transition matrix");
  if (protos.count() < 1) throw InvalidArgument("need at least one prototype");
  if (protos.protos.cols() != n) throw InvalidArgument("prototype length does not match transition rows");
  if (protos.count() > 65536) throw InvalidArgument("too many segments for a 16-bit label map");
  if (out_h < side || out_w < side) throw InvalidArgument("output size must be at least the latent side");

  const auto ty = bilinear_taps(side, out_h);
  const auto tx = bilinear_taps(side, out_w);
  std::vector<double> proto_norm(static_cast<std::size_t>(protos.count()));
  for (int k = 0; k < protos.count(); ++k) {
    const double* q = protos.protos.data() + static_cast<Eigen::Index>(k) * n;
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) s += q[j] * q[j];
    proto_norm[static_cast<std::size_t>(k)] = std::sqrt(s);
  }

  LabelMap out(out_h, out_w);
  const auto row_ptr = [&](int y, int x) { return p.data() + (static_cast<Eigen::Index>(y) * side + x) * n; };

  if (options.interpolate_scores) {
    // Per-patch cosine scores, then bilinear interpolation of the scores.
    Matrix scores(p.rows(), protos.count());
    std::vector<double> f(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      const double* r = p.data() + i * n;
      double norm2 = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) norm2 += r[j] * r[j];
      for (int k = 0; k < protos.count(); ++k) {
        const double* q = protos.protos.data() + static_cast<Eigen::Index>(k) * n;
        double dot = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) dot += r[j] * q[j];
        const double denom = std::sqrt(norm2) * proto_norm[static_cast<std::size_t>(k)];
        scores(i, k) = denom > 0.0 ? dot / denom : 0.0;
      }
    }
    for (int y = 0; y < out_h; ++y) {
      const auto& a = ty[static_cast<std::size_t>(y)];
      for (int x = 0; x < out_w; ++x) {
        const auto& b = tx[static_cast<std::size_t>(x)];
        std::uint16_t best = 0;
        double best_score = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < protos.count(); ++k) {
          const auto s = [&](int yy, int xx) { return scores(static_cast<Eigen::Index>(yy) * side + xx, k); };
          const double top = b.w_lo * s(a.lo, b.lo) + (1.0 - b.w_lo) * s(a.lo, b.hi);
          const double bottom = b.w_lo * s(a.hi, b.lo) + (1.0 - b.w_lo) * s(a.hi, b.hi);
          const double v = a.w_lo * top + (1.0 - a.w_lo) * bottom;
          if (v > best_score) {
            best_score = v;
            best = static_cast<std::uint16_t>(k);
          }
        }
        out.at(y, x) = best;
      }
    }
  } else {
    const std::size_t row_bytes = static_cast<std::size_t>(out_w) * static_cast<std::size_t>(n) * sizeof(double);
    const int tile_rows = static_cast<int>(std::clamp<std::size_t>(options.memory_budget / std::max<std::size_t>(row_bytes, 1), 1,
                                                                   static_cast<std::size_t>(out_h)));
    if (stats) stats->tile_rows = tile_rows;
    std::vector<double> tile(static_cast<std::size_t>(tile_rows) * static_cast<std::size_t>(out_w) * static_cast<std::size_t>(n));
    for (int y0 = 0; y0 < out_h; y0 += tile_rows) {
      const int rows = std::min(tile_rows, out_h - y0);
      for (int dy = 0; dy < rows; ++dy) {
        const auto& a = ty[static_cast<std::size_t>(y0 + dy)];
        for (int x = 0; x < out_w; ++x) {
          const auto& b = tx[static_cast<std::size_t>(x)];
          const double* r00 = row_ptr(a.lo, b.lo);
          const double* r01 = row_ptr(a.lo, b.hi);
          const double* r10 = row_ptr(a.hi, b.lo);
          const double* r11 = row_ptr(a.hi, b.hi);
          double* f = tile.data() + (static_cast<std::size_t>(dy) * out_w + x) * static_cast<std::size_t>(n);
          for (Eigen::Index j = 0; j < n; ++j) {
            const double top = b.w_lo * r00[j] + (1.0 - b.w_lo) * r01[j];
            const double bottom = b.w_lo * r10[j] + (1.0 - b.w_lo) * r11[j];
            f[j] = a.w_lo * top + (1.0 - a.w_lo) * bottom;
          }
        }
      }
      for (int dy = 0; dy < rows; ++dy) {
        for (int x = 0; x < out_w; ++x) {
          const double* f = tile.data() + (static_cast<std::size_t>(dy) * out_w + x) * static_cast<std::size_t>(n);
          out.at(y0 + dy, x) = best_prototype(f, n, protos.protos, proto_norm);
        }
      }
    }
  }

  if (stats) {
    std::vector<bool> used(static_cast<std::size_t>(protos.count()), false);
    for (auto l : out.labels) used[l] = true;
    stats->dropped_segments = static_cast<int>(std::count(used.begin(), used.end(), false));
  }
  return out;
}

LabelMap tree_label_map(const SegmentationTree& tree, int side) {
  if (static_cast<std::size_t>(side) * static_cast<std::size_t>(side) != tree.leaf_labels.size()) {
    throw InvalidArgument("tree size does not match latent side " + std::to_string(side));
  }
  LabelMap m(side, side);
  for (std::size_t i = 0; i < tree.leaf_labels.size(); ++i) m.labels[i] = static_cast<std::uint16_t>(tree.leaf_labels[i]);
  return m;
}

LabelMap resize_nearest(const LabelMap& m, int out_h, int out_w) {
  if (m.height < 1 || m.width < 1 || out_h < 1 || out_w < 1) throw InvalidArgument("resize_nearest needs positive sizes");
  LabelMap out(out_h, out_w);
  for (int y = 0; y < out_h; ++y) {
    const int sy = static_cast<int>(static_cast<long long>(y) * m.height / out_h);
    for (int x = 0; x < out_w; ++x) {
      out.at(y, x) = m.at(sy, static_cast<int>(static_cast<long long>(x) * m.width / out_w));
    }
  }
  return out;
}

}  // namespace walkcut
