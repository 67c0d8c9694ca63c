#include <atomic>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "plfe/parallel.hpp"
#include "plfe/rng.hpp"

using namespace plfe;

TEST(Rng, StreamsAreReproducibleAndDistinct) {
  auto a = make_stream(7, {1, 2});
  auto b = make_stream(7, {1, 2});
  auto c = make_stream(7, {2, 1});
  auto d = make_stream(8, {1, 2});
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
  EXPECT_NE(x, d());
  EXPECT_EQ(derive_seed(3, {4}), derive_seed(3, {4}));
  EXPECT_NE(derive_seed(3, {4}), derive_seed(3, {5}));
  EXPECT_NE(derive_seed(3, {}), derive_seed(3, {0}));
}

TEST(Rng, NormalsAndUniformsHaveTheRightMoments) {
  auto gen = make_stream(1, {});
  const Eigen::VectorXd z = standard_normals(gen, 20000);
  EXPECT_NEAR(z.mean(), 0.0, 0.03);
  EXPECT_NEAR(z.squaredNorm() / 20000.0, 1.0, 0.04);
  const Eigen::VectorXd u = uniforms(gen, 20000, -1.0, 1.0);
  EXPECT_GE(u.minCoeff(), -1.0);
  EXPECT_LT(u.maxCoeff(), 1.0);
  EXPECT_NEAR(u.mean(), 0.0, 0.02);
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
  const std::size_t saved = max_threads();
  for (std::size_t threads : {1u, 3u, 8u}) {
    set_max_threads(threads);
    std::vector<std::atomic<int>> hits(257);
    parallel_for(hits.size(), [&](std::size_t i) { ++hits[i]; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
  set_max_threads(saved);
}

TEST(ParallelFor, RethrowsLowestFailingIndex) {
  const std::size_t saved = max_threads();
  set_max_threads(4);
  try {
    parallel_for(100, [](std::size_t i) {
      if (i == 13 || i == 70) throw std::runtime_error(std::to_string(i));
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "13");
  }
  set_max_threads(saved);
}
