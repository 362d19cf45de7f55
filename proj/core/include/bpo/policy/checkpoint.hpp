#pragma once

#include <string>

#include "bpo/policy/policy.hpp"

namespace bpo {

// Layout: 8-byte magic "BPOPOLv1", then V, W, d, h as little-endian uint64,
// then the flat parameters as little-endian IEEE-754 doubles.
void save_checkpoint(const PolicyParams& params, const std::string& path);
PolicyParams load_checkpoint(const std::string& path);

}  // namespace bpo
