#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "sombra/quality.hpp"
#include "test_util.hpp"

using namespace sombra;

TEST(Adjacent, Modes) {
  GridGeometry g{5, 5};
  const auto n00 = g.node_at({0, 0});
  const auto n11 = g.node_at({1, 1});
  const auto n02 = g.node_at({0, 2});
  for (auto mode : {AdjacencyMode::manhattan1, AdjacencyMode::chebyshev1}) {
    EXPECT_TRUE(adjacent(n00, n00, g, mode));
    EXPECT_FALSE(adjacent(n00, n02, g, mode));
    EXPECT_TRUE(adjacent(n00, g.node_at({1, 0}), g, mode));
    EXPECT_TRUE(adjacent(n00, g.node_at({0, 1}), g, mode));
  }
  EXPECT_FALSE(adjacent(n00, n11, g, AdjacencyMode::manhattan1));
  EXPECT_TRUE(adjacent(n00, n11, g, AdjacencyMode::chebyshev1));
}

TEST(Adjacent, NoWrapAcrossRows) {
  // Consecutive indices on different rows are not neighbours.
  GridGeometry g{4, 3};
  EXPECT_FALSE(adjacent(3, 4, g, AdjacencyMode::manhattan1));
  EXPECT_FALSE(adjacent(3, 4, g, AdjacencyMode::chebyshev1));
  EXPECT_TRUE(adjacent(3, 7, g, AdjacencyMode::manhattan1));
}

TEST(TopographicError, Fractions) {
  GridGeometry g{10, 1};
  std::vector<NodeIndex> b1(10), b2(10);
  for (NodeIndex i = 0; i < 10; ++i) {
    b1[i] = i;
    b2[i] = i == 9 ? 8 : i + 1;
  }
  EXPECT_EQ(topographic_error(b1, b2, g, AdjacencyMode::manhattan1), 0.0);
  for (NodeIndex i = 0; i < 10; ++i) b2[i] = (i + 5) % 10;
  EXPECT_EQ(topographic_error(b1, b2, g, AdjacencyMode::manhattan1), 1.0);
  for (NodeIndex i = 0; i < 10; ++i) b2[i] = i < 3 ? (i + 3) : (i == 9 ? 8 : i + 1);
  EXPECT_DOUBLE_EQ(topographic_error(b1, b2, g, AdjacencyMode::manhattan1), 0.3);
}

TEST(TopographicError, ComplementsAdjacentFraction) {
  GridGeometry g{7, 6};
  std::mt19937_64 rng(2);
  std::vector<NodeIndex> b1(1000), b2(1000);
  std::size_t adj = 0;
  for (std::size_t i = 0; i < 1000; ++i) {
    b1[i] = static_cast<NodeIndex>(rng() % 42);
    b2[i] = static_cast<NodeIndex>(rng() % 42);
    adj += adjacent(b1[i], b2[i], g, AdjacencyMode::chebyshev1);
  }
  const double te = topographic_error(b1, b2, g, AdjacencyMode::chebyshev1);
  EXPECT_EQ(te + static_cast<double>(adj) / 1000.0, 1.0);
}

TEST(TopographicError, EmptyIsArgumentError) {
  GridGeometry g{2, 2};
  EXPECT_THROW(topographic_error({}, {}, g, AdjacencyMode::manhattan1), ArgumentError);
}

TEST(QuantizationError, Mean) {
  std::vector<double> zeros(5, 0.0);
  EXPECT_EQ(quantization_error(zeros), 0.0);
  std::vector<double> v{1.0, 3.0};
  EXPECT_EQ(quantization_error(v), 2.0);
  EXPECT_THROW(quantization_error({}), ArgumentError);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::vector<double> r(777);
  double s = 0.0;
  for (auto& x : r) s += (x = u(rng));
  EXPECT_NEAR(quantization_error(r), s / 777.0, 1e-12);
}

TEST(Umatrix, ConstantCodebookIsZero) {
  Codebook cb({4, 3}, 5, std::vector<float>(60, 0.25f));
  auto u = umatrix(cb);
  ASSERT_EQ(u.n_rows(), 3u);
  ASSERT_EQ(u.n_cols(), 4u);
  for (float v : u.data()) EXPECT_EQ(v, 0.0f);
}

TEST(Umatrix, TwoNodes) {
  Codebook cb({2, 1}, 2, {0, 0, 3, 4});
  auto u = umatrix(cb);
  ASSERT_EQ(u.n_rows(), 1u);
  EXPECT_FLOAT_EQ(u(0, 0), 5.0f);
  EXPECT_FLOAT_EQ(u(0, 1), 5.0f);
}

TEST(Umatrix, MirrorSymmetricCodebook) {
  // Node (x, y) and (W-1-x, y) carry the same vector.
  const std::size_t w = 5, h = 4, d = 3;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<float> u01(0.0f, 1.0f);
  std::vector<float> weights(w * h * d);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x <= w / 2; ++x) {
      for (std::size_t j = 0; j < d; ++j) {
        const float v = u01(rng);
        weights[(y * w + x) * d + j] = v;
        weights[(y * w + (w - 1 - x)) * d + j] = v;
      }
    }
  }
  auto u = umatrix(Codebook({w, h}, d, weights));
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      EXPECT_FLOAT_EQ(u(y, x), u(y, w - 1 - x));
      EXPECT_GE(u(y, x), 0.0f);
    }
  }
}

TEST(BmuDensity, Counts) {
  GridGeometry g{3, 2};
  std::vector<NodeIndex> b(4, 0);
  auto c = bmu_density(b, g);
  EXPECT_EQ(c, (std::vector<std::uint64_t>{4, 0, 0, 0, 0, 0}));
  std::mt19937_64 rng(8);
  std::vector<NodeIndex> r(6000);
  for (auto& v : r) v = static_cast<NodeIndex>(rng() % 6);
  auto cr = bmu_density(r, g);
  std::uint64_t total = 0;
  double chi2 = 0.0;
  for (auto v : cr) {
    total += v;
    chi2 += (static_cast<double>(v) - 1000.0) * (static_cast<double>(v) - 1000.0) / 1000.0;
  }
  EXPECT_EQ(total, 6000u);
  EXPECT_LT(chi2, 30.0);  // 5 degrees of freedom; p < 1e-5 beyond this
}

TEST(EvaluateQuality, MatchesComponents) {
  auto x = test::random_sbm(200, 30, 1, 8, 3);
  auto cb = test::random_codebook(4, 4, 30, 4);
  BmuPair p;
  auto r = evaluate_quality(x, cb, AdjacencyMode::chebyshev1, 2, &p);
  EXPECT_EQ(r.n_articles, 200u);
  EXPECT_EQ(r.topographic_error, topographic_error(p.bmu1, p.bmu2, cb.grid(), AdjacencyMode::chebyshev1));
  EXPECT_EQ(r.quantization_error, quantization_error(p.dst1));
  const auto j = to_json(r);
  EXPECT_EQ(j["adjacency"], "chebyshev1");
  EXPECT_EQ(j["n_articles"], 200);
}

TEST(GridCsv, HeaderAndRows) {
  GridGeometry g{3, 2};
  std::vector<std::uint64_t> v{1, 2, 3, 4, 5, 6};
  std::ostringstream out;
  write_grid_csv<std::uint64_t>(out, g, v);
  EXPECT_EQ(out.str(), "# side_x=3 side_y=2\n1,2,3\n4,5,6\n");
}
