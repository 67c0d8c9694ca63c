#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Dense>

namespace plfe {

/// Independent random stream addressed by a master seed and a path of
/// counters (e.g. {replicate} or {replicate, bootstrap_rep}). The stream for a
/// given (seed, path) never depends on which other streams were drawn, which
/// is what makes replicate loops order-independent.
std::mt19937_64 make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

/// Derived 64-bit seed for a child stream; used to nest seeds across layers.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

Eigen::VectorXd standard_normals(std::mt19937_64& gen, Eigen::Index count);
Eigen::VectorXd uniforms(std::mt19937_64& gen, Eigen::Index count, double lo, double hi);

}  // namespace plfe
