#include "oramfs/random.hpp"

#include <openssl/rand.h>

#include <algorithm>
#include <limits>

#include "oramfs/error.hpp"

namespace oramfs {

void secure_random_bytes(std::span<std::uint8_t> out) {
  // RAND_bytes takes an int length.
  constexpr std::size_t kChunk = 1u << 30;
  for (std::size_t off = 0; off < out.size(); off += kChunk) {
    auto n = std::min(kChunk, out.size() - off);
    if (RAND_bytes(out.data() + off, static_cast<int>(n)) != 1) {
      throw Error(Errc::storage_error, "CSPRNG failure");
    }
  }
}

Rng::Rng(std::optional<std::uint64_t> seed) : seeded_(seed.has_value()) {
  if (seed) engine_.seed(*seed);
}

std::uint64_t Rng::next_u64() {
  if (seeded_) return engine_();
  std::uint64_t v = 0;
  secure_random_bytes({reinterpret_cast<std::uint8_t*>(&v), sizeof(v)});
  return v;
}

std::uint64_t Rng::uniform(std::uint64_t bound) {
  // Rejection sampling keeps the result exactly uniform and the seeded
  // sequence identical across standard library implementations.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % bound;
}

}  // namespace oramfs
