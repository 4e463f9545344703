#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace opo {

// Hex-encoded SHA-256 of the input bytes.
std::string sha256_hex(std::string_view data);

// First 8 bytes of SHA-256(data), big-endian, as a PRNG seed.
std::uint64_t digest_seed(std::string_view data);

}  // namespace opo
