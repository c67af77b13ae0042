#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace oramfs {

using Bytes = std::vector<std::uint8_t>;

// Block ids and bucket indices are both 64-bit; leaves are bucket indices of
// childless buckets in heap order.
using BlockId = std::uint64_t;
using BucketIndex = std::uint64_t;

inline constexpr BlockId kDummyBlockId = std::numeric_limits<BlockId>::max();

// Serialized block header: big-endian id followed by big-endian leaf.
inline constexpr std::size_t kBlockHeaderSize = 16;

struct OramConfig {
  std::uint32_t z = 3;                  // block slots per bucket
  std::uint32_t segment_size = 65536;   // payload bytes per block
  std::uint32_t stash_max = 100;        // in blocks
  std::uint32_t group_size = 3;         // segments fetched per path
  std::optional<std::uint64_t> rng_seed;

  // Throws Error(invalid_config) when a field is out of range.
  void validate() const;

  std::size_t block_size() const { return kBlockHeaderSize + segment_size; }
  std::size_t bucket_plaintext_size() const { return z * block_size(); }
};

}  // namespace oramfs
