#include <array>
#include <cstring>
#include <set>

#include "doctest.h"
#include "qarg/commit.hpp"
#include "qarg/prg.hpp"
#include "qarg/stats.hpp"

using namespace qarg;

namespace {

// ChaCha20 block function written from the published algorithm, test-only.
std::uint32_t rotl(std::uint32_t v, int c) { return (v << c) | (v >> (32 - c)); }

void quarter(std::array<std::uint32_t, 16>& s, int a, int b, int c, int d) {
  s[a] += s[b]; s[d] ^= s[a]; s[d] = rotl(s[d], 16);
  s[c] += s[d]; s[b] ^= s[c]; s[b] = rotl(s[b], 12);
  s[a] += s[b]; s[d] ^= s[a]; s[d] = rotl(s[d], 8);
  s[c] += s[d]; s[b] ^= s[c]; s[b] = rotl(s[b], 7);
}

std::uint32_t le32(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 | std::uint32_t{p[2]} << 16 | std::uint32_t{p[3]} << 24;
}

std::array<std::uint8_t, 64> chacha_block(const std::uint8_t key[32], std::uint32_t counter, const std::uint8_t nonce[12]) {
  std::array<std::uint32_t, 16> init{0x61707865, 0x3320646e, 0x79622d32, 0x6b206574};
  for (int i = 0; i < 8; ++i) init[4 + i] = le32(key + 4 * i);
  init[12] = counter;
  for (int i = 0; i < 3; ++i) init[13 + i] = le32(nonce + 4 * i);
  auto s = init;
  for (int r = 0; r < 10; ++r) {
    quarter(s, 0, 4, 8, 12);
    quarter(s, 1, 5, 9, 13);
    quarter(s, 2, 6, 10, 14);
    quarter(s, 3, 7, 11, 15);
    quarter(s, 0, 5, 10, 15);
    quarter(s, 1, 6, 11, 12);
    quarter(s, 2, 7, 8, 13);
    quarter(s, 3, 4, 9, 14);
  }
  std::array<std::uint8_t, 64> out{};
  for (int i = 0; i < 16; ++i) {
    const std::uint32_t v = s[i] + init[i];
    for (int b = 0; b < 4; ++b) out[4 * i + b] = static_cast<std::uint8_t>(v >> (8 * b));
  }
  return out;
}

Bits oracle_expand(const Bits& seed, std::size_t out_len) {
  std::uint8_t key[32] = {};
  for (std::size_t i = 0; i < seed.size(); ++i)
    if (seed[i]) key[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  key[31] = static_cast<std::uint8_t>(seed.size());
  const std::uint8_t nonce[12] = {};
  Bits out;
  for (std::uint32_t block = 0; out.size() < out_len; ++block) {
    const auto bytes = chacha_block(key, block, nonce);
    for (const std::uint8_t byte : bytes)
      for (int b = 7; b >= 0 && out.size() < out_len; --b) out.push_back((byte >> b) & 1);
  }
  return out;
}

Bits bits_of(const std::string& s) {
  Bits b;
  for (const char c : s) b.push_back(c == '1');
  return b;
}

std::string hex_of(const Bits& b) { return to_hex(pack_bits(b)); }

}  // namespace

TEST_CASE("oracle block function reproduces the published test vector") {
  std::uint8_t key[32];
  for (int i = 0; i < 32; ++i) key[i] = static_cast<std::uint8_t>(i);
  const std::uint8_t nonce[12] = {0, 0, 0, 0x09, 0, 0, 0, 0x4a, 0, 0, 0, 0};
  const auto block = chacha_block(key, 1, nonce);
  CHECK(to_hex(Bytes(block.begin(), block.end())) ==
        "10f1e7e4d13b5915500fdd1fa32071c4c7d1f4c733c068030422aa9ac3d46c4e"
        "d2826446079faa0914c2d705d98b02a2b5129cd1de164eb9cbd083e8a2503c4e");
}

TEST_CASE("prg_expand matches the oracle") {
  Rng rng(501);
  for (const std::size_t len : {1u, 7u, 8u, 9u, 16u, 128u, 247u, 248u}) {
    for (int trial = 0; trial < 5; ++trial) {
      const Bits seed = random_bits(len, rng);
      for (const std::size_t out : {1u, 63u, 512u, 513u, 1500u}) CHECK(prg_expand(seed, out) == oracle_expand(seed, out));
    }
  }
}

TEST_CASE("pinned PRG outputs") {
  CHECK(hex_of(prg_expand(bits_of("10110011"), 64)) == hex_of(oracle_expand(bits_of("10110011"), 64)));
  CHECK(hex_of(prg_expand(bits_of("10110011"), 64)) == "760fde0f5bb864c3");
  CHECK(hex_of(prg_expand(bits_of("1"), 32)) == "f2e8207e");
  CHECK(hex_of(prg_expand(bits_of("0000000000000000"), 48)) == "c74c41db293b");
}

TEST_CASE("PRG outputs are prefix-consistent") {
  Rng rng(503);
  const Bits seed = random_bits(8, rng);
  const Bits long_out = prg_expand(seed, 4096);
  for (const std::size_t n : {1u, 5u, 64u, 1000u, 4095u}) CHECK(prg_expand(seed, n) == Bits(long_out.begin(), long_out.begin() + n));
}

TEST_CASE("seed length is part of the key") {
  CHECK(prg_expand(bits_of("1"), 256) != prg_expand(bits_of("10"), 256));
  CHECK(prg_expand(bits_of("0"), 256) != prg_expand(bits_of("00"), 256));
}

TEST_CASE("every 8-bit seed gives a distinct output") {
  std::set<Bits> seen;
  for (int s = 0; s < 256; ++s) {
    Bits seed(8);
    for (int i = 0; i < 8; ++i) seed[i] = (s >> (7 - i)) & 1;
    seen.insert(prg_expand(seed, 64));
  }
  CHECK(seen.size() == 256);
}

TEST_CASE("monobit and pair frequencies are balanced") {
  Rng rng(509);
  const std::size_t n = 200000;
  const Bits out = prg_expand(random_bits(16, rng), n);
  std::size_t ones = 0;
  std::array<std::size_t, 4> pairs{};
  for (std::size_t i = 0; i < n; ++i) ones += out[i];
  for (std::size_t i = 0; i + 1 < n; i += 2) ++pairs[out[i] * 2 + out[i + 1]];
  CHECK(std::abs(z_score(static_cast<double>(ones) / n, 0.5, n)) < 4.0);
  for (const std::size_t c : pairs) CHECK(std::abs(z_score(static_cast<double>(c) / (n / 2), 0.25, n / 2)) < 4.0);
}

TEST_CASE("PRG argument checks") {
  CHECK_THROWS_AS(prg_expand(Bits{}, 8), RangeError);
  CHECK_THROWS_AS(prg_expand(Bits(249, 0), 8), RangeError);
  CHECK_THROWS_AS(prg_expand(Bits{1}, 0), RangeError);
  CHECK_THROWS_AS(pack_bits(Bits{2}), RangeError);
}

TEST_CASE("pack and unpack round trip") {
  Rng rng(521);
  for (const std::size_t len : {0u, 1u, 8u, 13u, 100u}) {
    const Bits b = random_bits(len, rng);
    CHECK(unpack_bits(pack_bits(b), len) == b);
  }
  CHECK(pack_bits(bits_of("101")) == std::vector<std::uint8_t>{0xa0});
  CHECK_THROWS_AS(unpack_bits({0xff}, 9), RangeError);
}
