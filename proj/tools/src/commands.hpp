#pragma once

#include <ostream>

namespace plfe::cli {

/// Entry point of the `plfe` tool. Returns 0 on success, 2 on usage errors and
/// 1 when loading or estimation fails.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace plfe::cli
