#include "walkcut/spectral.hpp"

#include "walkcut/attention.hpp"
#include "walkcut/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace walkcut {

namespace {

using Operator = std::function<void(const Vector&, Vector&)>;
using Deflation = std::function<void(Vector&)>;

struct PowerOutcome {
  Vector x;
  double mu = 0.0;  // eigenvalue of the unshifted operator
  int iterations = 0;
  double gap_estimate = 0.0;
  bool converged = false;
  bool clustered = false;  // settled in a cluster of nearly equal eigenvalues
};

Vector start_vector(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    x(i) = 2.0 * u - 1.0;
  }
  return x;
}

bool normalize(Vector& x) {
  const double norm = x.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) return false;
  x /= norm;
  return true;
}

// Rayleigh-Ritz over the Krylov block {x, Ax, A^2 x, ...} of the shifted,
// deflated operator. Returns the top Ritz vector and its residual.
std::optional<std::pair<Vector, double>> ritz_refine(const Vector& x, const Operator& op, double sigma,
                                                     const Deflation& deflate, int dimension) {
  const Eigen::Index n = x.size();
  const int m = static_cast<int>(std::min<Eigen::Index>(dimension, n - 1));
  if (m < 2) return std::nullopt;
  Matrix q(n, m), aq(n, m);
  q.col(0) = x;
  int k = 0;
  Vector v(n);
  for (; k < m; ++k) {
    op(q.col(k), v);
    if (sigma != 0.0) v -= sigma * q.col(k);
    deflate(v);
    aq.col(k) = v;
    if (k + 1 == m) {
      ++k;
      break;
    }
    for (int pass = 0; pass < 2; ++pass) v -= q.leftCols(k + 1) * (q.leftCols(k + 1).transpose() * v);
    const double norm = v.norm();
    if (!(norm > 1e-13)) {
      ++k;  // invariant subspace
      break;
    }
    q.col(k + 1) = v / norm;
  }
  const Matrix h = q.leftCols(k).transpose() * aq.leftCols(k);
  Eigen::EigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) return std::nullopt;
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < k; ++i)
    if (es.eigenvalues()(i).real() > es.eigenvalues()(best).real()) best = i;
  Vector y = q.leftCols(k) * es.eigenvectors().col(best).real();
  deflate(y);
  if (!normalize(y)) return std::nullopt;
  op(y, v);
  if (sigma != 0.0) v -= sigma * y;
  deflate(v);
  return std::pair{y, (v - y.dot(v) * y).norm()};
}

// Power iteration on the deflated operator. A short probe on (I - Op) first
// estimates the bottom of the spectrum; when it is negative the main run
// iterates Op - sigma I with sigma half that estimate, so the eigenvalue of
// largest magnitude is the top one.
PowerOutcome deflated_power_iteration(Eigen::Index n, const Operator& op, const Deflation& deflate,
                                      const SpectralOptions& options) {
  if (n < 2) throw SpectralError(SpectralErrc::degenerate_spectrum, "Fiedler vector needs at least two vertices");
  Vector x = start_vector(n, options.seed);
  deflate(x);
  if (!normalize(x)) throw SpectralError(SpectralErrc::degenerate_spectrum, "start vector vanished after deflation");

  Vector y(n);
  double sigma = 0.0;
  if (options.shift_probe_iterations > 0 && n > 2) {
    Vector probe = x;
    for (int it = 0; it < options.shift_probe_iterations; ++it) {
      op(probe, y);
      y = probe - y;
      deflate(y);
      if (!normalize(y)) break;
      probe.swap(y);
    }
    op(probe, y);
    deflate(y);
    const double low = probe.dot(y);
    if (low < 0.0) sigma = 0.5 * low;
  }

  PowerOutcome out;
  double prev_change = std::numeric_limits<double>::infinity();
  double ratio = 1.0;
  std::vector<double> history;  // residual per iteration
  for (int it = 1; it <= options.max_iterations; ++it) {
    op(x, y);
    if (sigma != 0.0) y -= sigma * x;
    deflate(y);
    // Residual of the current unit iterate; inside an exactly repeated
    // eigenspace it vanishes even while the iterate keeps rotating.
    const double rq = x.dot(y);
    const double residual = (y - rq * x).norm();
    if (residual <= options.tolerance) {
      out.iterations = it;
      out.converged = true;
      break;
    }
    // Slow decay means a cluster of nearly equal eigenvalues: the iterate
    // already lies in their span, so a Ritz step separates them.
    history.push_back(residual);
    const auto w = static_cast<std::size_t>(options.stall_window);
    if (w > 0 && history.size() > w && history.size() % w == 0 && residual >= 0.5 * history[history.size() - 1 - w]) {
      if (auto ritz = ritz_refine(x, op, sigma, deflate, options.ritz_dimension)) {
        if (ritz->second <= options.tolerance) {
          x = std::move(ritz->first);
          out.iterations = it;
          out.converged = true;
          out.clustered = true;
          break;
        }
      }
    }
    if (!normalize(y)) {
      // The iterate fell into the null space of the shifted operator: zero eigenvalue.
      out.x = x;
      out.mu = sigma;
      out.iterations = it;
      out.converged = true;
      return out;
    }
    const double sign = y.dot(x) < 0.0 ? -1.0 : 1.0;
    const double change = (y - sign * x).norm();
    if (std::isfinite(prev_change) && prev_change > 0.0) ratio = std::min(1.0, change / prev_change);
    prev_change = change;
    x.swap(y);
    out.iterations = it;
  }
  op(x, y);
  deflate(y);
  out.mu = x.dot(y);
  out.gap_estimate = (1.0 - ratio) * std::abs(out.mu - sigma);
  out.x = std::move(x);
  if (!out.converged) {
    if (history.back() <= options.cluster_tolerance) {
      // Still mixing inside a cluster; any vector of its span is a valid relaxation.
      out.converged = true;
      out.clustered = true;
    } else if (out.gap_estimate < 1e-10) {
      throw SpectralError(SpectralErrc::degenerate_spectrum,
                          "power iteration stalled on a degenerate spectrum (gap " + std::to_string(out.gap_estimate) +
                              ")");
    }
  }
  return out;
}

void orient(Vector& x) {
  const double scale = x.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(x(i)) > 1e-12 * scale) {
      if (x(i) < 0.0) x = -x;
      return;
    }
  }
}

constexpr double kDegenerateGap = 1e-10;

}  // namespace

FiedlerResult fiedler_symmetric(const AdjacencyMatrix& adj, const SpectralOptions& options) {
  const auto n = adj.size();
  const Vector degrees = adj.a.rowwise().sum();
  if (n > 0 && !(degrees.minCoeff() > 0.0)) {
    throw SpectralError(SpectralErrc::zero_degree, "Fiedler vector undefined: a vertex has zero degree");
  }
  const Vector inv_sqrt = degrees.cwiseSqrt().cwiseInverse();
  Vector top = degrees.cwiseSqrt();
  top.normalize();

  Vector scratch(n);
  const Operator op = [&](const Vector& in, Vector& out) {
    scratch = inv_sqrt.cwiseProduct(in);
    out.noalias() = adj.a * scratch;
    out.array() *= inv_sqrt.array();
  };
  const Deflation deflate = [&](Vector& v) { v -= top.dot(v) * top; };

  auto run = deflated_power_iteration(n, op, deflate, options);

  FiedlerResult r;
  r.vector = inv_sqrt.cwiseProduct(run.x);
  r.vector.normalize();
  orient(r.vector);
  r.walk_eigenvalue = run.mu;
  r.eigenvalue = 1.0 - run.mu;
  r.iterations = run.iterations;
  r.gap_estimate = run.gap_estimate;
  r.degenerate = run.clustered || run.gap_estimate < kDegenerateGap;
  // L x - lambda D x = mu D x - A x
  const Vector resid = run.mu * degrees.cwiseProduct(r.vector) - adj.a * r.vector;
  r.residual = resid.norm() / r.vector.norm();
  if (!run.converged) {
    throw SpectralError(SpectralErrc::non_convergence,
                        "symmetric power iteration did not converge in " + std::to_string(options.max_iterations) +
                            " iterations",
                        r.residual);
  }
  return r;
}

FiedlerResult fiedler_stochastic(const Matrix& p, const SpectralOptions& options) {
  try {
    check_row_stochastic(p, kTransitionRowTolerance, "walk matrix");
  } catch (const InvalidArgument& e) {
    throw SpectralError(SpectralErrc::not_stochastic, e.what());
  }
  const auto n = p.rows();
  const Operator op = [&](const Vector& in, Vector& out) { out.noalias() = p * in; };
  const Deflation deflate = [](Vector& v) { v.array() -= v.mean(); };

  auto run = deflated_power_iteration(n, op, deflate, options);

  // The iterate y satisfies P y = mu y + c' 1; shifting by a constant
  // recovers the right eigenvector v = y + c 1 with c = mean(P y) / (mu - 1).
  Vector py = p * run.x;
  Vector v = run.x;
  if (std::abs(1.0 - run.mu) > 1e-8) v.array() += py.mean() / (run.mu - 1.0);

  FiedlerResult r;
  r.vector = v;
  if (!normalize(r.vector)) r.vector = run.x;
  orient(r.vector);
  r.walk_eigenvalue = run.mu;
  r.eigenvalue = 1.0 - run.mu;
  r.iterations = run.iterations;
  r.gap_estimate = run.gap_estimate;
  r.degenerate = run.clustered || run.gap_estimate < kDegenerateGap;
  r.residual = (p * r.vector - run.mu * r.vector).norm();
  if (!run.converged) {
    throw SpectralError(SpectralErrc::non_convergence,
                        "stochastic power iteration did not converge in " + std::to_string(options.max_iterations) +
                            " iterations",
                        r.residual);
  }
  return r;
}

SplitResult best_threshold_split(const FiedlerResult& fiedler, const AdjacencyMatrix& adj, int num_candidates,
                                 int min_side) {
  const auto n = adj.size();
  if (n < 2) throw InvalidArgument("threshold split needs at least two vertices");
  if (fiedler.vector.size() != n) throw InvalidArgument("Fiedler vector length does not match the graph");
  if (num_candidates < 0) throw InvalidArgument("num_candidates must be >= 0");
  if (min_side < 1) min_side = 1;
  const Vector& x = fiedler.vector;

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return x(a) < x(b); });
  auto value_at = [&](Eigen::Index k) { return x(order[static_cast<std::size_t>(k)]); };

  // Candidate prefix sizes k (side A = first k vertices in sorted order) and
  // their thresholds.
  std::vector<std::pair<Eigen::Index, double>> candidates;
  if (num_candidates == kAllThresholds || n - 1 <= num_candidates) {
    for (Eigen::Index k = 1; k < n; ++k) {
      if (value_at(k - 1) < value_at(k)) candidates.emplace_back(k, 0.5 * (value_at(k - 1) + value_at(k)));
    }
  } else {
    Eigen::Index last_k = -1;
    for (int j = 1; j <= num_candidates; ++j) {
      const double pos = static_cast<double>(j) / (num_candidates + 1) * static_cast<double>(n - 1);
      const auto lo = static_cast<Eigen::Index>(std::floor(pos));
      const auto hi = std::min<Eigen::Index>(lo + 1, n - 1);
      const double t = value_at(lo) + (pos - static_cast<double>(lo)) * (value_at(hi) - value_at(lo));
      Eigen::Index k = 0;
      while (k < n && value_at(k) <= t) ++k;
      if (k == 0 || k == n || k == last_k) continue;
      candidates.emplace_back(k, t);
      last_k = k;
    }
  }

  // Incremental sweep: cut and assoc of every prefix in O(n^2).
  const Vector degrees = adj.a.rowwise().sum();
  const double volume = degrees.sum();
  std::vector<double> ncut_at(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  {
    Vector link = Vector::Zero(n);  // weight from each vertex into the current side A
    double cut = 0.0;
    double vol_a = 0.0;
    for (Eigen::Index k = 1; k < n; ++k) {
      const int v = order[static_cast<std::size_t>(k - 1)];
      cut += degrees(v) - adj.a(v, v) - 2.0 * link(v);
      vol_a += degrees(v);
      link += adj.a.row(v).transpose();
      const double vol_b = volume - vol_a;
      if (vol_a > 0.0 && vol_b > 0.0) ncut_at[static_cast<std::size_t>(k)] = std::max(0.0, cut) / vol_a + std::max(0.0, cut) / vol_b;
    }
  }

  double best_approx = std::numeric_limits<double>::infinity();
  for (const auto& [k, t] : candidates) {
    if (k < min_side || n - k < min_side) continue;
    best_approx = std::min(best_approx, ncut_at[static_cast<std::size_t>(k)]);
  }
  if (!std::isfinite(best_approx)) {
    throw SpectralError(SpectralErrc::degenerate_spectrum, "no admissible threshold on the Fiedler vector");
  }

  // Re-evaluate the near-optimal candidates exactly and apply the tie-breaks.
  const double slack = 1e-9 * std::max(1.0, best_approx);
  bool have = false;
  SplitResult best;
  Eigen::Index best_imbalance = 0;
  for (const auto& [k, t] : candidates) {
    if (k < min_side || n - k < min_side) continue;
    if (ncut_at[static_cast<std::size_t>(k)] > best_approx + slack) continue;
    std::vector<bool> in_a(static_cast<std::size_t>(n), false);
    for (Eigen::Index i = 0; i < k; ++i) in_a[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = true;
    SplitResult cand;
    cand.partition = Bipartition::from_mask(in_a);
    try {
      cand.cost = ncut_cost(adj, cand.partition);
    } catch (const DegeneratePartition&) {
      continue;
    }
    cand.cut = cut_cost(adj, cand.partition);
    cand.threshold = t;
    const Eigen::Index imbalance = std::abs(static_cast<Eigen::Index>(cand.partition.side_a.size()) -
                                            static_cast<Eigen::Index>(cand.partition.side_b.size()));
    bool better = !have;
    if (have) {
      const double tie = 1e-12 * std::max(1.0, std::abs(best.cost));
      if (cand.cost < best.cost - tie) {
        better = true;
      } else if (std::abs(cand.cost - best.cost) <= tie) {
        better = imbalance < best_imbalance || (imbalance == best_imbalance && cand.threshold < best.threshold);
      }
    }
    if (better) {
      best = std::move(cand);
      best_imbalance = imbalance;
      have = true;
    }
  }
  if (!have) throw SpectralError(SpectralErrc::degenerate_spectrum, "every threshold split is degenerate");
  return best;
}

}  // namespace walkcut
