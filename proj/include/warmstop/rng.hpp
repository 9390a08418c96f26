#pragma once

#include <cstdint>
#include <string_view>

namespace warmstop {

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);

// Per-stage seed: splitmix64(seed ^ fnv1a64(stage)). Every random stream in
// the pipeline is derived from one global seed this way.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage);

}  // namespace warmstop
