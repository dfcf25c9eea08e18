#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ihgnn {

using Rng = std::mt19937_64;

// Independent generator for one purpose ("init", "dropout", "splits", ...)
// derived from a run seed. Same (seed, purpose) always yields the same stream.
Rng substream(std::uint64_t seed, std::string_view purpose);

} // namespace ihgnn
