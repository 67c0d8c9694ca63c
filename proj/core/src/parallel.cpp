#include "plfe/parallel.hpp"

namespace plfe {

namespace {
std::atomic<std::size_t> g_max_threads{0};
}

std::size_t max_threads() noexcept {
  const std::size_t configured = g_max_threads.load();
  if (configured > 0) return configured;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void set_max_threads(std::size_t count) noexcept { g_max_threads.store(count); }

}  // namespace plfe
