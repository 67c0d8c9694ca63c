#include "plfe/rng.hpp"

#include <vector>

namespace plfe {

std::mt19937_64 make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * path.size());
  words.push_back(static_cast<std::uint32_t>(seed));
  words.push_back(static_cast<std::uint32_t>(seed >> 32));
  for (std::uint64_t p : path) {
    words.push_back(static_cast<std::uint32_t>(p));
    words.push_back(static_cast<std::uint32_t>(p >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  auto gen = make_stream(seed, path);
  return gen();
}

Eigen::VectorXd standard_normals(std::mt19937_64& gen, Eigen::Index count) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd out(count);
  for (Eigen::Index i = 0; i < count; ++i) out(i) = normal(gen);
  return out;
}

Eigen::VectorXd uniforms(std::mt19937_64& gen, Eigen::Index count, double lo, double hi) {
  std::uniform_real_distribution<double> unif(lo, hi);
  Eigen::VectorXd out(count);
  for (Eigen::Index i = 0; i < count; ++i) out(i) = unif(gen);
  return out;
}

}  // namespace plfe
