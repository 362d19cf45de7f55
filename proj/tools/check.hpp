#pragma once

#include <cstdint>
#include <ostream>

namespace bpo::tools {

// Gradient, advantage, KL and bi-mode invariant checks on a small model.
// Prints one line per check; returns the number of failures.
int run_checks(std::uint64_t seed, std::ostream& out);

}  // namespace bpo::tools
