#pragma once

// Independent reference implementations used only by the tests. Each one
// takes a different route from the library code (brute force, dense
// solvers, naive loops) so agreement is meaningful.

#include "walkcut/types.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using walkcut::Matrix;
using walkcut::Vector;

inline double uniform(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline Matrix random_stochastic(int n, std::mt19937_64& rng, double floor = 0.0) {
  Matrix p(n, n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += p(i, j) = floor + uniform(rng);
    for (int j = 0; j < n; ++j) p(i, j) /= s;
  }
  return p;
}

inline Matrix random_symmetric(int n, std::mt19937_64& rng, double lo = 0.01, double hi = 1.0) {
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = uniform(rng, lo, hi);
  return a;
}

/// Two planted blocks with weights `intra` inside and `inter` across.
inline Matrix two_blocks(int n_a, int n_b, double intra, double inter) {
  const int n = n_a + n_b;
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = ((i < n_a) == (j < n_a)) ? intra : inter;
  return a;
}

inline Matrix naive_multiply(const Matrix& x, const Matrix& y) {
  Matrix z = Matrix::Zero(x.rows(), y.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < x.cols(); ++k) s += x(i, k) * y(k, j);
      z(i, j) = s;
    }
  return z;
}

inline Matrix naive_power(const Matrix& p, int k) {
  Matrix r = p;
  for (int i = 1; i < k; ++i) r = naive_multiply(r, p);
  return r;
}

/// NCut by explicit double loops over a side mask.
inline double naive_ncut(const Matrix& a, const std::vector<bool>& in_a) {
  double cut = 0.0, assoc_a = 0.0, assoc_b = 0.0;
  const auto n = a.rows();
  for (Eigen::Index u = 0; u < n; ++u)
    for (Eigen::Index v = 0; v < n; ++v) {
      const double w = a(u, v);
      if (in_a[static_cast<std::size_t>(u)]) {
        assoc_a += w;
        if (!in_a[static_cast<std::size_t>(v)]) cut += w;
      } else {
        assoc_b += w;
      }
    }
  return cut / assoc_a + cut / assoc_b;
}

inline double naive_cut(const Matrix& a, const std::vector<bool>& in_a) {
  double cut = 0.0;
  for (Eigen::Index u = 0; u < a.rows(); ++u)
    for (Eigen::Index v = 0; v < a.cols(); ++v)
      if (in_a[static_cast<std::size_t>(u)] && !in_a[static_cast<std::size_t>(v)]) cut += a(u, v);
  return cut;
}

inline std::vector<bool> mask_of(std::uint64_t bits, Eigen::Index n) {
  std::vector<bool> m(static_cast<std::size_t>(n));
  for (Eigen::Index v = 0; v < n; ++v) m[static_cast<std::size_t>(v)] = (bits >> v) & 1u;
  return m;
}

struct BestCut {
  double value = std::numeric_limits<double>::infinity();
  std::vector<bool> side;
};

/// Enumerates the 2^(n-1) - 1 bipartitions with vertex n-1 fixed on side B.
template <typename Cost>
BestCut exhaustive_bipartition(Eigen::Index n, Cost cost) {
  BestCut best;
  const std::uint64_t limit = std::uint64_t{1} << (n - 1);
  for (std::uint64_t bits = 1; bits < limit; ++bits) {
    auto m = mask_of(bits, n);
    const double c = cost(m);
    if (c < best.value) {
      best.value = c;
      best.side = std::move(m);
    }
  }
  return best;
}

inline BestCut exhaustive_min_ncut(const Matrix& a) {
  return exhaustive_bipartition(a.rows(), [&](const std::vector<bool>& m) { return naive_ncut(a, m); });
}

inline BestCut exhaustive_min_cut(const Matrix& a) {
  return exhaustive_bipartition(a.rows(), [&](const std::vector<bool>& m) { return naive_cut(a, m); });
}

struct Eigenpair {
  double value = 0.0;
  Vector vector;
};

/// Second-smallest generalized eigenpair of (D - A) x = lambda D x, by Eigen's
/// dense generalized self-adjoint solver.
inline Eigenpair dense_generalized_fiedler(const Matrix& a) {
  const Vector d = a.rowwise().sum();
  const Eigen::MatrixXd dm = d.asDiagonal();
  const Eigen::MatrixXd l = dm - Eigen::MatrixXd(a);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(l, dm);
  return {es.eigenvalues()(1), es.eigenvectors().col(1).normalized()};
}

/// Eigenvalues of the same pencil, ascending.
inline Vector dense_generalized_spectrum(const Matrix& a) {
  const Vector d = a.rowwise().sum();
  const Eigen::MatrixXd dm = d.asDiagonal();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(dm - Eigen::MatrixXd(a), dm, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

/// Eigenpair of a (generally nonsymmetric) matrix with the second-largest
/// real eigenvalue, by Eigen's dense nonsymmetric solver.
inline Eigenpair dense_second_right_eigenpair(const Matrix& p) {
  Eigen::EigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(p)};
  const auto values = es.eigenvalues();
  std::vector<int> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) { return values(x).real() > values(y).real(); });
  const int k = order[1];
  return {values(k).real(), es.eigenvectors().col(k).real().normalized()};
}

/// |cos| of the angle between two vectors.
inline double abs_cosine(const Vector& x, const Vector& y) { return std::abs(x.dot(y)) / (x.norm() * y.norm()); }

/// Brute-force maximum total weight of an injective map from rows into columns
/// (or columns into rows when there are fewer columns).
inline double brute_force_assignment(const std::vector<double>& w, int rows, int cols) {
  const bool rows_small = rows <= cols;
  const int small = rows_small ? rows : cols;
  const int large = rows_small ? cols : rows;
  const auto weight = [&](int s, int l) {
    return rows_small ? w[static_cast<std::size_t>(s) * cols + l] : w[static_cast<std::size_t>(l) * cols + s];
  };
  double best = 0.0;
  std::vector<int> choice(static_cast<std::size_t>(small), -1);
  std::vector<bool> used(static_cast<std::size_t>(large), false);
  // Depth-first over partial injective maps; a small item may also stay unmatched.
  auto rec = [&](auto&& self, int s, double total) -> void {
    if (s == small) {
      best = std::max(best, total);
      return;
    }
    self(self, s + 1, total);
    for (int l = 0; l < large; ++l) {
      if (used[static_cast<std::size_t>(l)]) continue;
      used[static_cast<std::size_t>(l)] = true;
      self(self, s + 1, total + weight(s, l));
      used[static_cast<std::size_t>(l)] = false;
    }
  };
  rec(rec, 0, 0.0);
  return best;
}

/// 1-D bilinear weight matrix (dst x src), align-corners=false with edge
/// clamping, written out directly from the sampling formula.
inline Matrix bilinear_weights(int src, int dst) {
  Matrix w = Matrix::Zero(dst, src);
  for (int o = 0; o < dst; ++o) {
    double x = (o + 0.5) * src / dst - 0.5;
    x = std::clamp(x, 0.0, static_cast<double>(src - 1));
    const int x0 = static_cast<int>(std::floor(x));
    const int x1 = std::min(x0 + 1, src - 1);
    const double f = x - x0;
    w(o, x0) += 1.0 - f;
    w(o, x1) += f;
  }
  return w;
}

/// Materializes every interpolated pixel feature through the separable
/// weight matrices, then takes the cosine argmax (lowest id on ties).
inline std::vector<int> naive_assign(const Matrix& p, int side, const Matrix& protos, int out_h, int out_w) {
  const Matrix wy = bilinear_weights(side, out_h);
  const Matrix wx = bilinear_weights(side, out_w);
  std::vector<int> labels(static_cast<std::size_t>(out_h) * static_cast<std::size_t>(out_w));
  for (int y = 0; y < out_h; ++y)
    for (int x = 0; x < out_w; ++x) {
      Vector f = Vector::Zero(p.cols());
      for (int a = 0; a < side; ++a)
        for (int b = 0; b < side; ++b) {
          const double w = wy(y, a) * wx(x, b);
          if (w != 0.0) f += w * p.row(a * side + b).transpose();
        }
      int best = 0;
      double best_score = -std::numeric_limits<double>::infinity();
      for (Eigen::Index k = 0; k < protos.rows(); ++k) {
        const double s = f.dot(protos.row(k).transpose()) / (f.norm() * protos.row(k).norm());
        if (s > best_score) {
          best_score = s;
          best = static_cast<int>(k);
        }
      }
      labels[static_cast<std::size_t>(y) * out_w + x] = best;
    }
  return labels;
}

}  // namespace oracle
