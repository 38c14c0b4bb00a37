#pragma once

#include <cstdint>
#include <vector>

#include "qarg/rng.hpp"

namespace qarg {

using Bits = std::vector<std::uint8_t>;

/// Longest accepted seed, in bits.
inline constexpr std::size_t kMaxSeedBits = 248;

/// Deterministic expansion of a seed of 1..248 bits into `out_len` bits.
///
/// The seed bits are packed MSB-first into bytes 0..30 of a 32-byte key
/// (zero-filled) and byte 31 holds the seed length. The output is the
/// ChaCha20 (IETF, zero nonce, counter 0) keystream under that key, read
/// MSB-first. Outputs are prefix-consistent in `out_len`.
Bits prg_expand(const Bits& seed, std::size_t out_len);

/// Uniform seed of `len` bits.
Bits random_bits(std::size_t len, Rng& rng);

/// Packs bits MSB-first; the last byte is zero-padded.
std::vector<std::uint8_t> pack_bits(const Bits& bits);
/// Inverse of pack_bits for the first `len` bits.
Bits unpack_bits(const std::vector<std::uint8_t>& bytes, std::size_t len);

}  // namespace qarg
