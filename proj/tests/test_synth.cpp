#include "walkcut/attention.hpp"
#include "walkcut/error.hpp"
#include "walkcut/synth.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace walkcut;

TEST_CASE("block helpers") {
  const auto quads = grid_blocks(4, 2, 2);
  REQUIRE(quads.size() == 4);
  CHECK(quads[0] == IndexSet{0, 1, 4, 5});
  CHECK(quads[3] == IndexSet{10, 11, 14, 15});
  const auto uneven = grid_blocks(5, 2, 1);
  CHECK(uneven[0].size() == 15);
  CHECK(uneven[1].size() == 10);
  CHECK(planted_blocks(16, 5).size() == 5);
  CHECK(planted_blocks(16, 6).size() == 6);
  CHECK(planted_blocks(16, 4) == grid_blocks(16, 2, 2));
  CHECK_THROWS_AS(grid_blocks(3, 4, 1), InvalidArgument);
}

TEST_CASE("planted blocks tile the grid along pooling cells") {
  for (int count = 1; count <= 16; ++count) {
    const auto blocks = planted_blocks(16, count);
    REQUIRE(static_cast<int>(blocks.size()) == count);
    std::vector<int> owner(256, -1);
    for (std::size_t b = 0; b < blocks.size(); ++b)
      for (int v : blocks[b]) {
        CHECK(owner[static_cast<std::size_t>(v)] == -1);
        owner[static_cast<std::size_t>(v)] = static_cast<int>(b);
      }
    for (int v : owner) CHECK(v >= 0);
    // Every 4x4 cell belongs to one block, so pooling to sides 8 and 4 keeps the blocks exact.
    for (int cy = 0; cy < 16; cy += 4)
      for (int cx = 0; cx < 16; cx += 4)
        for (int y = cy; y < cy + 4; ++y)
          for (int x = cx; x < cx + 4; ++x) CHECK(owner[static_cast<std::size_t>(y * 16 + x)] == owner[static_cast<std::size_t>(cy * 16 + cx)]);
  }
  const auto five = planted_blocks(16, 5);
  std::vector<std::size_t> sizes;
  for (const auto& b : five) sizes.push_back(b.size());
  CHECK(sizes == std::vector<std::size_t>{32, 32, 64, 64, 64});
}

TEST_CASE("planted transition closed forms") {
  SUBCASE("intra 1 without noise is block-diagonal uniform") {
    PlantedSpec spec;
    spec.side = 4;
    spec.blocks = grid_blocks(4, 1, 2);
    spec.intra = 1.0;
    const auto pt = planted_transition(spec);
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j) CHECK(pt.transition.p(i, j) == ((i % 4 < 2) == (j % 4 < 2) ? 1.0 / 8 : 0.0));
  }
  SUBCASE("two equal blocks with intra 0.9") {
    PlantedSpec spec;
    spec.side = 6;
    spec.blocks = grid_blocks(6, 2, 1);
    spec.intra = 0.9;
    const auto pt = planted_transition(spec);
    const double half = 36 / 2.0;
    for (int i = 0; i < 36; ++i)
      for (int j = 0; j < 36; ++j) {
        const bool same = (i < 18) == (j < 18);
        CHECK(pt.transition.p(i, j) == doctest::Approx(same ? 0.9 / half : 0.1 / half).epsilon(1e-14));
      }
    CHECK(pt.labels.at(0, 0) == 0);
    CHECK(pt.labels.at(5, 5) == 1);
  }
}

TEST_CASE("noisy planted transitions are stochastic, positive and deterministic") {
  std::mt19937_64 rng(61);
  for (int t = 0; t < 20; ++t) {
    PlantedSpec spec;
    spec.side = 8;
    spec.blocks = planted_blocks(8, 2 + static_cast<int>(rng() % 5));
    spec.intra = oracle::uniform(rng, 0.6, 1.0);
    spec.noise = oracle::uniform(rng, 0.0, 0.5);
    spec.seed = rng();
    const auto a = planted_transition(spec);
    const auto b = planted_transition(spec);
    CHECK(a.transition.p == b.transition.p);
    CHECK((a.transition.p.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-9);
    CHECK(a.transition.p.minCoeff() >= 0.0);
    // Every row keeps more mass inside its own block than the planted floor allows elsewhere.
    for (int i = 0; i < 64; ++i) {
      double inside = 0.0;
      for (int j = 0; j < 64; ++j)
        if (a.labels.labels[static_cast<std::size_t>(i)] == a.labels.labels[static_cast<std::size_t>(j)]) inside += a.transition.p(i, j);
      CHECK(inside > 0.5);
    }
  }
}

TEST_CASE("unit_uniform is reproducible across platforms") {
  std::mt19937_64 rng(5489);
  // First output of the reference mt19937_64 is 14514284786278117030.
  CHECK(unit_uniform(rng) == static_cast<double>(14514284786278117030ull >> 11) * 0x1.0p-53);
}

TEST_CASE("pooling preserves stochasticity and block structure") {
  PlantedSpec spec;
  spec.side = 16;
  spec.blocks = grid_blocks(16, 2, 2);
  spec.intra = 0.85;
  spec.noise = 0.1;
  spec.seed = 3;
  const auto stack = planted_stack(spec, {4, 8, 16});
  CHECK_NOTHROW(stack.validate());
  REQUIRE(stack.maps.size() == 3);
  CHECK(stack.maps[2].s == planted_transition(spec).transition.p);
  for (const auto& m : stack.maps) {
    CHECK((m.s.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-9);
    const int s = m.side;
    const auto quad = [s](int v) { return 2 * ((v / s) * 2 / s) + (v % s) * 2 / s; };
    for (int i = 0; i < s * s; ++i) {
      double inside = 0.0;
      for (int j = 0; j < s * s; ++j)
        if (quad(i) == quad(j)) inside += m.s(i, j);
      CHECK(inside > 0.8);
    }
  }
  // Pooling by hand on a 2x2 -> 1x1 grid sums everything and divides by 4.
  const Matrix p = Matrix::Constant(4, 4, 0.25);
  CHECK(pool_transition(p, 2, 1)(0, 0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(pool_transition(p, 2, 3), InvalidArgument);
  CHECK_THROWS_AS(planted_stack(spec, {5}), InvalidArgument);
}

TEST_CASE("planted spec validation") {
  PlantedSpec spec;
  spec.side = 4;
  spec.blocks = grid_blocks(4, 2, 2);
  CHECK_NOTHROW(spec.validate());
  spec.intra = 0.5;
  CHECK_THROWS_AS(spec.validate(), InvalidArgument);
  spec.intra = 0.9;
  spec.noise = -0.1;
  CHECK_THROWS_AS(spec.validate(), InvalidArgument);
  spec.noise = 0.0;
  spec.blocks.back().push_back(0);
  CHECK_THROWS_AS(spec.validate(), InvalidArgument);
  spec.blocks = {grid_blocks(4, 1, 1)};
  CHECK_THROWS_AS(spec.validate(), InvalidArgument);
  spec.intra = 1.0;
  CHECK_NOTHROW(spec.validate());
  spec.blocks = grid_blocks(4, 2, 1);
  spec.blocks[0].pop_back();
  CHECK_THROWS_AS(spec.validate(), InvalidArgument);
}
