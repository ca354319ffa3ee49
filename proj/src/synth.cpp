#include "walkcut/synth.hpp"

#include "walkcut/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace walkcut {

void PlantedSpec::validate() const {
  if (side < 1) throw InvalidArgument("planted side must be positive");
  if (!(intra > 0.5 && intra <= 1.0)) throw InvalidArgument("intra must lie in (0.5, 1]");
  if (!(noise >= 0.0 && noise < 1.0)) throw InvalidArgument("noise must lie in [0, 1)");
  const auto n = static_cast<std::size_t>(side) * static_cast<std::size_t>(side);
  std::vector<bool> seen(n, false);
  std::size_t covered = 0;
  for (const auto& b : blocks) {
    if (b.empty()) throw InvalidArgument("planted blocks must be non-empty");
    for (int v : b) {
      if (v < 0 || static_cast<std::size_t>(v) >= n || seen[static_cast<std::size_t>(v)]) {
        throw InvalidArgument("planted blocks must partition the grid");
      }
      seen[static_cast<std::size_t>(v)] = true;
      ++covered;
    }
  }
  if (covered != n) throw InvalidArgument("planted blocks must partition the grid");
  if (blocks.size() < 2 && intra < 1.0) throw InvalidArgument("a single block leaves nowhere for inter-block mass");
}

std::vector<IndexSet> grid_blocks(int side, int rows, int cols) {
  if (rows < 1 || cols < 1 || rows > side || cols > side) throw InvalidArgument("grid split does not fit the side");
  std::vector<IndexSet> blocks(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  for (int y = 0; y < side; ++y) {
    const int by = y * rows / side;
    for (int x = 0; x < side; ++x) {
      const int bx = x * cols / side;
      blocks[static_cast<std::size_t>(by * cols + bx)].push_back(y * side + x);
    }
  }
  return blocks;
}

std::vector<IndexSet> planted_blocks(int side, int count) {
  if (count < 1) throw InvalidArgument("block count must be positive");
  if (count > side * side) throw InvalidArgument("more blocks than grid cells");
  struct Rect {
    int y, x, h, w;
  };
  std::vector<Rect> rects{{0, 0, side, side}};
  while (static_cast<int>(rects.size()) < count) {
    // Halve the largest rectangle across its longer side, so block edges
    // stay on the dyadic grids that pooling uses.
    std::size_t pick = 0;
    for (std::size_t i = 1; i < rects.size(); ++i)
      if (rects[i].h * rects[i].w > rects[pick].h * rects[pick].w) pick = i;
    const Rect r = rects[pick];
    if (r.w >= r.h) {
      rects[pick] = {r.y, r.x, r.h, r.w / 2};
      rects.insert(rects.begin() + static_cast<std::ptrdiff_t>(pick) + 1, Rect{r.y, r.x + r.w / 2, r.h, r.w - r.w / 2});
    } else {
      rects[pick] = {r.y, r.x, r.h / 2, r.w};
      rects.insert(rects.begin() + static_cast<std::ptrdiff_t>(pick) + 1, Rect{r.y + r.h / 2, r.x, r.h - r.h / 2, r.w});
    }
  }
  std::sort(rects.begin(), rects.end(), [](const Rect& a, const Rect& b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
  std::vector<IndexSet> blocks;
  for (const auto& r : rects) {
    IndexSet block;
    for (int y = r.y; y < r.y + r.h; ++y)
      for (int x = r.x; x < r.x + r.w; ++x) block.push_back(y * side + x);
    blocks.push_back(std::move(block));
  }
  return blocks;
}

PlantedTransition planted_transition(const PlantedSpec& spec) {
  spec.validate();
  const int n = spec.side * spec.side;
  std::vector<int> owner(static_cast<std::size_t>(n));
  for (std::size_t b = 0; b < spec.blocks.size(); ++b)
    for (int v : spec.blocks[b]) owner[static_cast<std::size_t>(v)] = static_cast<int>(b);

  PlantedTransition out;
  out.transition.side = spec.side;
  out.transition.p.resize(n, n);
  out.labels = LabelMap(spec.side, spec.side);
  std::mt19937_64 rng(spec.seed);
  for (int i = 0; i < n; ++i) {
    const auto& own = spec.blocks[static_cast<std::size_t>(owner[static_cast<std::size_t>(i)])];
    const double inside = spec.intra / static_cast<double>(own.size());
    const double outside = n > static_cast<int>(own.size()) ? (1.0 - spec.intra) / static_cast<double>(n - static_cast<int>(own.size())) : 0.0;
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      double v = owner[static_cast<std::size_t>(j)] == owner[static_cast<std::size_t>(i)] ? inside : outside;
      if (spec.noise > 0.0) v *= 1.0 + spec.noise * (2.0 * unit_uniform(rng) - 1.0);
      out.transition.p(i, j) = v;
      sum += v;
    }
    out.transition.p.row(i) /= sum;
    out.labels.labels[static_cast<std::size_t>(i)] = static_cast<std::uint16_t>(owner[static_cast<std::size_t>(i)]);
  }
  return out;
}

Matrix pool_transition(const Matrix& p, int fine_side, int coarse_side) {
  if (coarse_side < 1 || fine_side % coarse_side != 0) {
    throw InvalidArgument("side " + std::to_string(coarse_side) + " does not divide " + std::to_string(fine_side));
  }
  const int f = fine_side / coarse_side;
  const int m = coarse_side * coarse_side;
  const auto cell = [&](int v) { return (v / fine_side / f) * coarse_side + (v % fine_side) / f; };
  Matrix out = Matrix::Zero(m, m);
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const int ci = cell(static_cast<int>(i));
    for (Eigen::Index j = 0; j < p.cols(); ++j) out(ci, cell(static_cast<int>(j))) += p(i, j);
  }
  out /= static_cast<double>(f) * f;
  return out;
}

AttentionStack planted_stack(const PlantedSpec& spec, const std::vector<int>& sides) {
  if (sides.empty()) throw InvalidArgument("planted_stack needs at least one side");
  const PlantedTransition planted = planted_transition(spec);
  AttentionStack stack;
  for (int s : sides) {
    stack.maps.push_back({s, s == spec.side ? planted.transition.p : pool_transition(planted.transition.p, spec.side, s)});
  }
  stack.weights = default_weights(sides);
  return stack;
}

}  // namespace walkcut
