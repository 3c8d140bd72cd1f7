#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "pokforge/bitstring.hpp"

namespace pokforge {

using Digest = std::array<std::uint8_t, 32>;
using KeyCheck = std::array<std::uint8_t, 8>;

Digest hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> message);

/// HMAC-SHA-256 keyed with k packed MSB-first over the packed challenge.
/// Always 256 bits.
BitString respond(const BitString& key, const BitString& challenge);

/// First 8 bytes of the PRF over the ASCII string "POK-KCV".
KeyCheck key_check(const BitString& key);

}  // namespace pokforge
