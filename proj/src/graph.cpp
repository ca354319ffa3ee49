#include "walkcut/graph.hpp"

#include "walkcut/attention.hpp"
#include "walkcut/error.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace walkcut {

Bipartition Bipartition::from_mask(const std::vector<bool>& in_a) {
  Bipartition part;
  for (std::size_t v = 0; v < in_a.size(); ++v) (in_a[v] ? part.side_a : part.side_b).push_back(static_cast<int>(v));
  return part;
}

void Bipartition::validate(Eigen::Index n) const {
  if (side_a.empty() || side_b.empty()) throw InvalidArgument("bipartition sides must be non-empty");
  if (static_cast<Eigen::Index>(side_a.size() + side_b.size()) != n) {
    throw InvalidArgument("bipartition does not cover the vertex set");
  }
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (const auto* side : {&side_a, &side_b}) {
    for (int v : *side) {
      if (v < 0 || v >= n || seen[static_cast<std::size_t>(v)]) throw InvalidArgument("bipartition sides overlap");
      seen[static_cast<std::size_t>(v)] = true;
    }
  }
}

AdjacencyMatrix build_adjacency(const Matrix& p, Similarity similarity) {
  check_row_stochastic(p, kTransitionRowTolerance, "transition matrix");
  const auto n = p.rows();
  AdjacencyMatrix adj;
  adj.a = Matrix::Zero(n, n);
  adj.a.selfadjointView<Eigen::Lower>().rankUpdate(p);
  adj.a.triangularView<Eigen::StrictlyUpper>() = adj.a.transpose();
  if (similarity == Similarity::cosine) {
    Vector inv_norm(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double norm = std::sqrt(adj.a(i, i));
      if (!(norm > 0.0)) throw InvalidArgument("zero-norm attention row under cosine similarity");
      inv_norm(i) = 1.0 / norm;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        const double v = adj.a(i, j) * inv_norm(i) * inv_norm(j);
        adj.a(i, j) = v;
        adj.a(j, i) = v;
      }
    }
  }
  adj.self_loops_included = true;
  return adj;
}

AdjacencyMatrix symmetrized(const Matrix& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("symmetrized needs a square matrix");
  AdjacencyMatrix adj;
  adj.a = Matrix(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = 0.5 * (m(i, j) + m(j, i));
      adj.a(i, j) = v;
      adj.a(j, i) = v;
    }
  }
  return adj;
}

AdjacencyMatrix induced_subgraph(const Matrix& a, const IndexSet& subset) {
  const auto n = static_cast<Eigen::Index>(subset.size());
  AdjacencyMatrix sub;
  sub.a.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = subset[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < n; ++j) sub.a(i, j) = a(row, subset[static_cast<std::size_t>(j)]);
  }
  return sub;
}

AdjacencyMatrix induced_subgraph(const AdjacencyMatrix& adj, const IndexSet& subset) {
  auto sub = induced_subgraph(adj.a, subset);
  sub.self_loops_included = adj.self_loops_included;
  return sub;
}

GraphStats graph_stats(const AdjacencyMatrix& adj) {
  GraphStats s;
  s.n = adj.size();
  s.degrees = adj.a.rowwise().sum();
  for (Eigen::Index i = 0; i < s.n; ++i) {
    for (Eigen::Index j = i + 1; j < s.n; ++j) {
      const double w = adj.a(i, j);
      if (w > 0.0) {
        ++s.m;
        s.total += w;
      }
    }
  }
  return s;
}

double cut_cost(const AdjacencyMatrix& adj, const Bipartition& part) {
  double cut = 0.0;
  for (int u : part.side_a)
    for (int v : part.side_b) cut += adj.a(u, v);
  return cut;
}

double assoc(const AdjacencyMatrix& adj, const IndexSet& side) {
  double total = 0.0;
  for (int u : side) total += adj.a.row(u).sum();
  return total;
}

double ncut_cost(const AdjacencyMatrix& adj, const Bipartition& part) {
  const double assoc_a = assoc(adj, part.side_a);
  const double assoc_b = assoc(adj, part.side_b);
  if (!(assoc_a > 0.0) || !(assoc_b > 0.0)) {
    throw DegeneratePartition("NCut undefined: a side has zero association");
  }
  const double cut = cut_cost(adj, part);
  return cut / assoc_a + cut / assoc_b;
}

double manc_threshold(const GraphStats& stats) {
  if (stats.m < 1) throw InvalidArgument("MAN-C threshold undefined on an edgeless graph");
  return static_cast<double>(stats.n) * stats.total / (2.0 * static_cast<double>(stats.m));
}

MinCut stoer_wagner(const AdjacencyMatrix& adj) {
  const auto n = adj.size();
  if (n < 2) throw InvalidArgument("minimum cut needs at least two vertices");

  Matrix w = adj.a;
  w.diagonal().setZero();
  std::vector<std::vector<int>> members(static_cast<std::size_t>(n));
  for (Eigen::Index v = 0; v < n; ++v) members[static_cast<std::size_t>(v)] = {static_cast<int>(v)};
  std::vector<bool> merged(static_cast<std::size_t>(n), false);

  MinCut best;
  best.weight = std::numeric_limits<double>::infinity();
  std::vector<double> key(static_cast<std::size_t>(n));
  std::vector<bool> added(static_cast<std::size_t>(n));

  for (Eigen::Index phase = 0; phase + 1 < n; ++phase) {
    std::fill(key.begin(), key.end(), 0.0);
    std::fill(added.begin(), added.end(), false);
    Eigen::Index prev = -1;
    const Eigen::Index active = n - phase;
    for (Eigen::Index step = 0; step < active; ++step) {
      Eigen::Index sel = -1;
      for (Eigen::Index v = 0; v < n; ++v) {
        const auto vi = static_cast<std::size_t>(v);
        if (merged[vi] || added[vi]) continue;
        if (sel < 0 || key[vi] > key[static_cast<std::size_t>(sel)]) sel = v;
      }
      const auto si = static_cast<std::size_t>(sel);
      added[si] = true;
      if (step + 1 == active) {
        if (key[si] < best.weight) {
          best.weight = key[si];
          best.side.assign(static_cast<std::size_t>(n), false);
          for (int v : members[si]) best.side[static_cast<std::size_t>(v)] = true;
        }
        // Contract sel into prev.
        const auto pi = static_cast<std::size_t>(prev);
        members[pi].insert(members[pi].end(), members[si].begin(), members[si].end());
        for (Eigen::Index v = 0; v < n; ++v) {
          w(prev, v) += w(sel, v);
          w(v, prev) = w(prev, v);
        }
        w(prev, prev) = 0.0;
        merged[si] = true;
      } else {
        prev = sel;
        for (Eigen::Index v = 0; v < n; ++v) {
          if (!merged[static_cast<std::size_t>(v)] && !added[static_cast<std::size_t>(v)]) key[static_cast<std::size_t>(v)] += w(sel, v);
        }
      }
    }
  }
  return best;
}

double min_cut(const AdjacencyMatrix& adj, MinCutMode mode, std::optional<double> proxy_cut) {
  if (adj.size() < 2) throw InvalidArgument("minimum cut needs at least two vertices");
  if (mode == MinCutMode::proxy) {
    if (!proxy_cut) throw InvalidArgument("proxy min-cut mode needs the proposed cut value");
    return *proxy_cut;
  }
  if (adj.size() > kMaxExactMinCutVertices) {
    throw InvalidArgument("exact minimum cut limited to " + std::to_string(kMaxExactMinCutVertices) + " vertices, got " +
                          std::to_string(adj.size()));
  }
  return stoer_wagner(adj).weight;
}

}  // namespace walkcut
