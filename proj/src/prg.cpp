#include "qarg/prg.hpp"

#include <sodium.h>

#include "qarg/error.hpp"
#include "sodium_init.hpp"

namespace qarg {

std::vector<std::uint8_t> pack_bits(const Bits& bits) {
  std::vector<std::uint8_t> out((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] > 1) throw RangeError("bit strings hold only 0 and 1");
    if (bits[i]) out[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  }
  return out;
}

Bits unpack_bits(const std::vector<std::uint8_t>& bytes, std::size_t len) {
  if (len > bytes.size() * 8) throw RangeError("unpack_bits: not enough bytes");
  Bits out(len);
  for (std::size_t i = 0; i < len; ++i) out[i] = (bytes[i / 8] >> (7 - i % 8)) & 1;
  return out;
}

Bits prg_expand(const Bits& seed, std::size_t out_len) {
  if (seed.empty() || seed.size() > kMaxSeedBits) throw RangeError("PRG seed must have 1 to 248 bits");
  if (out_len < 1) throw RangeError("PRG output length must be positive");
  detail::ensure_sodium();
  std::uint8_t key[crypto_stream_chacha20_ietf_KEYBYTES] = {};
  const auto packed = pack_bits(seed);
  std::copy(packed.begin(), packed.end(), key);
  key[31] = static_cast<std::uint8_t>(seed.size());
  const std::uint8_t nonce[crypto_stream_chacha20_ietf_NONCEBYTES] = {};
  std::vector<std::uint8_t> stream((out_len + 7) / 8);
  crypto_stream_chacha20_ietf(stream.data(), stream.size(), nonce, key);
  sodium_memzero(key, sizeof key);
  return unpack_bits(stream, out_len);
}

Bits random_bits(std::size_t len, Rng& rng) {
  Bits out(len);
  for (auto& b : out) b = rng.bit() ? 1 : 0;
  return out;
}

}  // namespace qarg
