#include <gtest/gtest.h>

#include <set>

#include "fovea/geometry.hpp"
#include "fovea/grid.hpp"
#include "fovea/rng.hpp"
#include "oracles.hpp"

using namespace fovea;

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, DerivedSeedsDistinctPerTag) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t t = 0; t < 1000; ++t) seen.insert(derive_seed(7, t));
  EXPECT_EQ(seen.size(), 1000u);
}

TEST(Rng, BernoulliEdges) {
  Rng r(1);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_FALSE(r.bernoulli(0.0));
    EXPECT_TRUE(r.bernoulli(1.0));
  }
}

TEST(Design, Area) {
  EXPECT_DOUBLE_EQ((Design{0, 0, 1, 1}).area(), 1.0);
  EXPECT_DOUBLE_EQ((Design{0.25, 0.25, 0.5, 0.5}).area(), 0.25);
  EXPECT_NEAR((Design{0.9, 0.9, 0.1, 0.1}).area(), 0.01, 1e-15);
}

TEST(Design, Validity) {
  EXPECT_TRUE(is_valid(full_image()));
  EXPECT_FALSE(is_valid(Design{0.5, 0.5, 0.6, 0.1}));
  EXPECT_FALSE(is_valid(Design{-0.1, 0, 0.5, 0.5}));
  EXPECT_FALSE(is_valid(Design{0, 0, 0, 0.5}));
  EXPECT_THROW(require_valid(Design{0.5, 0.5, 0.6, 0.1}), ParameterError);
}

TEST(Design, ClampKeepsExtentAndStaysInside) {
  const Design d = clamp_to(Design{0.8, 0.9, 0.3, 0.2});
  EXPECT_DOUBLE_EQ(d.w, 0.3);
  EXPECT_DOUBLE_EQ(d.h, 0.2);
  EXPECT_LE(d.right(), 1.0 + 1e-15);
  EXPECT_LE(d.bottom(), 1.0 + 1e-15);
  EXPECT_TRUE(is_valid(d));
}

TEST(Design, IouIdentityAndDisjoint) {
  const Design a{0.1, 0.1, 0.2, 0.2};
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(iou(a, Design{0.5, 0.5, 0.2, 0.2}), 0.0);
  EXPECT_NEAR(iou(Design{0, 0, 0.5, 0.5}, Design{0.25, 0, 0.5, 0.5}), 0.125 / 0.375, 1e-15);
}

TEST(Grid, OverlapFractionsMatchIntervalOracle) {
  const Grid g(5);
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    const double w = rng.uniform(0.01, 1.0), h = rng.uniform(0.01, 1.0);
    const Design d{rng.uniform(0.0, 1.0 - w), rng.uniform(0.0, 1.0 - h), w, h};
    for (std::size_t c = 0; c < g.cells(); ++c) {
      const Design r = g.cell_rect(c);
      const double want = oracle::overlap_1d(r.u, r.right(), d.u, d.right()) *
                          oracle::overlap_1d(r.v, r.bottom(), d.v, d.bottom()) / g.cell_area();
      EXPECT_NEAR(g.overlap_fraction(c, d), want, 1e-12);
    }
  }
}

TEST(Grid, CellsContainingBoundaryPoint) {
  const Grid g(4);
  EXPECT_EQ(g.cells_containing(Point{0.1, 0.1}).size(), 1u);
  EXPECT_EQ(g.cells_containing(Point{0.25, 0.1}).size(), 2u);
  EXPECT_EQ(g.cells_containing(Point{0.5, 0.5}).size(), 4u);
}

TEST(Grid, StableSumAndNormalize) {
  std::vector<double> xs(1000, 0.1);
  EXPECT_NEAR(stable_sum(xs), 100.0, 1e-12);
  normalize_in_place(xs);
  EXPECT_NEAR(stable_sum(xs), 1.0, 1e-15);
}
