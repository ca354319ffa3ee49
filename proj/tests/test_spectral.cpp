#include "walkcut/error.hpp"
#include "walkcut/spectral.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace walkcut;

namespace {

AdjacencyMatrix wrap(const Matrix& a) {
  AdjacencyMatrix adj;
  adj.a = a;
  return adj;
}

Matrix four_node() {
  Matrix a = Matrix::Zero(4, 4);
  a(0, 1) = a(1, 0) = 1.0;
  a(2, 3) = a(3, 2) = 1.0;
  for (int u : {0, 1})
    for (int v : {2, 3}) a(u, v) = a(v, u) = 0.1;
  return a;
}

Matrix row_normalized(const Matrix& a) { return a.array().colwise() / a.rowwise().sum().array(); }

std::vector<bool> side_mask(const Bipartition& part, Eigen::Index n) {
  std::vector<bool> m(static_cast<std::size_t>(n), false);
  for (int v : part.side_a) m[static_cast<std::size_t>(v)] = true;
  return m;
}

bool same_partition(const Bipartition& x, const Bipartition& y, Eigen::Index n) {
  const auto a = side_mask(x, n);
  const auto b = side_mask(y, n);
  return a == b || a == std::vector<bool>(b.rbegin(), b.rend()) ||
         [&] {
           for (std::size_t i = 0; i < a.size(); ++i)
             if (a[i] == b[i]) return false;
           return true;
         }();
}

}  // namespace

TEST_CASE("symmetric Fiedler vector on the four-node graph") {
  const auto r = fiedler_symmetric(wrap(four_node()));
  const auto ref = oracle::dense_generalized_fiedler(four_node());
  CHECK(r.eigenvalue == doctest::Approx(ref.value).epsilon(1e-9));
  CHECK(oracle::abs_cosine(r.vector, ref.vector) > 1 - 1e-10);
  CHECK((r.vector(0) > 0) == (r.vector(1) > 0));
  CHECK((r.vector(0) > 0) != (r.vector(2) > 0));
  CHECK(r.vector(0) > 0);  // sign convention
  CHECK(r.vector.norm() == doctest::Approx(1.0));
}

TEST_CASE("disconnected components give lambda2 = 0 and a piecewise-constant vector") {
  Matrix a = Matrix::Zero(6, 6);
  a.topLeftCorner(3, 3).setOnes();
  a.bottomRightCorner(3, 3).setOnes();
  const auto r = fiedler_symmetric(wrap(a));
  CHECK(std::abs(r.eigenvalue) < 1e-9);
  CHECK(r.vector(0) == doctest::Approx(r.vector(2)));
  CHECK(r.vector(3) == doctest::Approx(r.vector(5)));
  CHECK(r.vector(0) * r.vector(3) < 0);
}

TEST_CASE("symmetric Fiedler matches the dense generalized solver on random graphs") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 50; ++t) {
    const int n = 3 + static_cast<int>(rng() % 30);
    const Matrix a = oracle::random_symmetric(n, rng);
    const auto r = fiedler_symmetric(wrap(a));
    const auto ref = oracle::dense_generalized_fiedler(a);
    CHECK(std::abs(r.eigenvalue - ref.value) < 1e-6);
    CHECK(oracle::abs_cosine(r.vector, ref.vector) > 1 - 1e-6);
    // Residual and D-orthogonality to the constant vector.
    const Vector d = a.rowwise().sum();
    const Vector res = (Matrix(d.asDiagonal()) - a) * r.vector - r.eigenvalue * d.cwiseProduct(r.vector);
    CHECK(res.norm() / r.vector.norm() < 1e-5);
    CHECK(std::abs(r.vector.dot(d)) <= 1e-6 * d.norm());
  }
}

TEST_CASE("stochastic Fiedler matches the dense nonsymmetric solver") {
  std::mt19937_64 rng(22);
  int checked = 0;
  for (int t = 0; t < 40; ++t) {
    // Reversible chains have a real spectrum, so the second eigenpair is real.
    const Matrix p = row_normalized(oracle::random_symmetric(16, rng));
    const auto ref = oracle::dense_second_right_eigenpair(p);
    const auto r = fiedler_stochastic(p);
    CHECK(std::abs(r.walk_eigenvalue - ref.value) < 1e-5);
    CHECK(oracle::abs_cosine(r.vector, ref.vector) > 1 - 1e-5);
    CHECK(r.eigenvalue == doctest::Approx(1.0 - r.walk_eigenvalue));
    ++checked;
  }
  CHECK(checked == 40);
}

TEST_CASE("random-walk and adjacency Fiedler vectors span the same line") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 30; ++t) {
    const Matrix a = oracle::random_symmetric(20, rng);
    const auto s = fiedler_symmetric(wrap(a));
    const auto w = fiedler_stochastic(row_normalized(a));
    CHECK(oracle::abs_cosine(s.vector, w.vector) > 1 - 1e-5);
    CHECK(std::abs(s.eigenvalue - w.eigenvalue) < 1e-6);
  }
}

TEST_CASE("block-diagonal walk gives opposite constant blocks") {
  Matrix p = Matrix::Zero(6, 6);
  p.topLeftCorner(2, 2).setConstant(0.5);
  p.bottomRightCorner(4, 4).setConstant(0.25);
  const auto r = fiedler_stochastic(p);
  CHECK(r.walk_eigenvalue == doctest::Approx(1.0));
  CHECK(r.vector(0) == doctest::Approx(r.vector(1)));
  CHECK(r.vector(2) == doctest::Approx(r.vector(5)));
  CHECK(r.vector(0) * r.vector(2) < 0);
}

TEST_CASE("spectral preconditions") {
  Matrix a = four_node();
  a.row(3).setZero();
  a.col(3).setZero();
  try {
    fiedler_symmetric(wrap(a));
    FAIL("expected zero-degree error");
  } catch (const SpectralError& e) {
    CHECK(e.code() == SpectralErrc::zero_degree);
  }
  try {
    fiedler_stochastic(Matrix::Constant(3, 3, 0.5));
    FAIL("expected stochasticity error");
  } catch (const SpectralError& e) {
    CHECK(e.code() == SpectralErrc::not_stochastic);
  }
  SpectralOptions tight;
  tight.max_iterations = 2;
  tight.tolerance = 1e-15;
  std::mt19937_64 rng(24);
  const Matrix r = oracle::random_symmetric(30, rng, 0.5, 1.0);
  try {
    fiedler_symmetric(wrap(r), tight);
    FAIL("expected non-convergence");
  } catch (const SpectralError& e) {
    CHECK(e.code() == SpectralErrc::non_convergence);
    CHECK(e.residual() > 0.0);
  }
}

TEST_CASE("nearly repeated lambda2 is resolved by a Ritz step") {
  // Four blocks joined by almost equal weights: lambda2 and lambda3 differ by ~1e-5.
  const int b = 8;
  Matrix a = Matrix::Constant(4 * b, 4 * b, 0.0);
  const double inter[4][4] = {{0, 0.0100, 0.0100, 0.0100}, {0.0100, 0, 0.0100, 0.01001}, {0.0100, 0.0100, 0, 0.0100},
                              {0.0100, 0.01001, 0.0100, 0}};
  for (int i = 0; i < 4 * b; ++i)
    for (int j = 0; j < 4 * b; ++j) a(i, j) = i / b == j / b ? 1.0 : inter[i / b][j / b];
  const auto spectrum = oracle::dense_generalized_spectrum(a);
  REQUIRE(spectrum(2) - spectrum(1) < 1e-4);

  const auto f = fiedler_symmetric(wrap(a));
  const auto dense = oracle::dense_generalized_fiedler(a);
  CHECK(f.degenerate);
  CHECK(f.eigenvalue == doctest::Approx(dense.value).epsilon(1e-9));
  CHECK(oracle::abs_cosine(f.vector, dense.vector) > 1.0 - 1e-8);

  SpectralOptions plain;
  plain.stall_window = 0;
  plain.max_iterations = 300;
  plain.cluster_tolerance = 0.0;
  CHECK_THROWS_AS(fiedler_symmetric(wrap(a), plain), SpectralError);
}

TEST_CASE("best threshold split") {
  SUBCASE("four-node example") {
    const auto adj = wrap(four_node());
    const auto split = best_threshold_split(fiedler_symmetric(adj), adj, kAllThresholds);
    CHECK(split.cost == doctest::Approx(1.0 / 3.0));
    CHECK(same_partition(split.partition, Bipartition{{0, 1}, {2, 3}}, 4));
    CHECK(split.cut == doctest::Approx(0.4));
  }
  SUBCASE("two-valued vector") {
    const auto adj = wrap(four_node());
    FiedlerResult f;
    f.vector = (Vector(4) << -1, -1, 1, 1).finished();
    const auto split = best_threshold_split(f, adj, 5);
    CHECK(split.threshold == doctest::Approx(0.0));
    CHECK(split.cost == ncut_cost(adj, split.partition));
  }
  SUBCASE("constant vector is degenerate") {
    FiedlerResult f;
    f.vector = Vector::Ones(4);
    CHECK_THROWS_AS(best_threshold_split(f, wrap(four_node()), kAllThresholds), SpectralError);
  }
  SUBCASE("all midpoints equal the exhaustive threshold sweep") {
    std::mt19937_64 rng(25);
    for (int t = 0; t < 50; ++t) {
      const Matrix a = oracle::random_symmetric(10, rng);
      const auto adj = wrap(a);
      const auto f = fiedler_symmetric(adj);
      const auto split = best_threshold_split(f, adj, 9);
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < 10; ++i) {
        std::vector<bool> m(10);
        for (int v = 0; v < 10; ++v) m[static_cast<std::size_t>(v)] = f.vector(v) <= f.vector(i);
        if (std::count(m.begin(), m.end(), false) == 0) continue;
        best = std::min(best, oracle::naive_ncut(a, m));
      }
      CHECK(std::abs(split.cost - best) < 1e-12);
      CHECK(split.cost == ncut_cost(adj, split.partition));
      // The relaxation can never beat the exhaustive optimum.
      CHECK(split.cost >= oracle::exhaustive_min_ncut(a).value - 1e-12);
    }
  }
  SUBCASE("quantile candidates") {
    std::mt19937_64 rng(26);
    const Matrix a = oracle::random_symmetric(40, rng);
    const auto adj = wrap(a);
    const auto f = fiedler_symmetric(adj);
    const auto coarse = best_threshold_split(f, adj, 4);
    const auto full = best_threshold_split(f, adj, kAllThresholds);
    CHECK(coarse.cost >= full.cost);
    CHECK(coarse.cost == ncut_cost(adj, coarse.partition));
  }
  SUBCASE("scale invariance") {
    std::mt19937_64 rng(27);
    const Matrix a = oracle::random_symmetric(24, rng);
    const auto s1 = best_threshold_split(fiedler_symmetric(wrap(a)), wrap(a), kAllThresholds);
    const auto s3 = best_threshold_split(fiedler_symmetric(wrap(3 * a)), wrap(3 * a), kAllThresholds);
    CHECK(same_partition(s1.partition, s3.partition, 24));
  }
  SUBCASE("min side") {
    const auto adj = wrap(four_node());
    const auto split = best_threshold_split(fiedler_symmetric(adj), adj, kAllThresholds, 2);
    CHECK(split.partition.side_a.size() == 2);
  }
}

TEST_CASE("planted two-block graphs are split at the planted boundary") {
  std::mt19937_64 rng(28);
  for (int t = 0; t < 30; ++t) {
    const int na = 4 + static_cast<int>(rng() % 5), nb = 4 + static_cast<int>(rng() % 5);
    const double eps = oracle::uniform(rng, 0.001, 0.05);
    Matrix a = oracle::two_blocks(na, nb, 1.0, eps);
    // Shuffle vertex order so the split is not simply a prefix.
    Eigen::PermutationMatrix<Eigen::Dynamic> pm(na + nb);
    pm.setIdentity();
    std::shuffle(pm.indices().data(), pm.indices().data() + na + nb, rng);
    a = pm * a * pm.transpose();
    const auto split = best_threshold_split(fiedler_symmetric(wrap(a)), wrap(a), kAllThresholds);
    const auto ex = oracle::exhaustive_min_ncut(a);
    CHECK(std::abs(split.cost - ex.value) < 1e-12);
    CHECK(same_partition(split.partition, Bipartition::from_mask(ex.side), na + nb));
  }
}
