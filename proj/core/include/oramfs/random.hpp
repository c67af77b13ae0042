#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>

namespace oramfs {

// Fills `out` from the operating system CSPRNG (OpenSSL RAND_bytes).
void secure_random_bytes(std::span<std::uint8_t> out);

// Source of leaf choices. Unseeded instances draw from the CSPRNG; seeded
// instances are reproducible, which tests and benchmarks rely on.
class Rng {
 public:
  explicit Rng(std::optional<std::uint64_t> seed = std::nullopt);

  std::uint64_t next_u64();

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t uniform(std::uint64_t bound);

  bool seeded() const { return seeded_; }

 private:
  bool seeded_;
  std::mt19937_64 engine_;
};

}  // namespace oramfs
