#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace encyclink {

using Sha256Digest = std::array<std::uint8_t, 32>;

Sha256Digest sha256(std::string_view data);
std::string sha256_hex(std::string_view data);
std::string to_hex(const Sha256Digest& d);
Sha256Digest digest_from_hex(std::string_view hex);

// 64-bit FNV-1a mixed with a seed and finalized with splitmix64. Stable
// across platforms and runs; used for every feature-hashing step.
std::uint64_t stable_hash(std::string_view data, std::uint64_t seed);

}  // namespace encyclink
