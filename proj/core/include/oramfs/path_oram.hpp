#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "oramfs/backend.hpp"
#include "oramfs/crypto.hpp"
#include "oramfs/random.hpp"
#include "oramfs/types.hpp"

namespace oramfs {

// ---- heap-ordered tree geometry -------------------------------------------
//
// Buckets live in heap order: bucket i has children 2i+1 and 2i+2 when those
// indices are below the bucket count. A leaf is any childless bucket, so for
// n buckets the leaves are exactly [n/2, n).

inline constexpr BucketIndex parent_of(BucketIndex i) { return (i - 1) / 2; }
inline constexpr bool is_leaf(BucketIndex i, std::uint64_t n) { return i < n && 2 * i + 1 >= n; }
inline constexpr BucketIndex first_leaf(std::uint64_t n) { return n / 2; }
inline constexpr std::uint64_t leaf_count(std::uint64_t n) { return n - n / 2; }
int depth_of(BucketIndex i);

// Root-to-leaf bucket indices, root first. Throws invalid_leaf when
// leaf >= n and not_a_leaf when the bucket has a child.
std::vector<BucketIndex> path_indices(BucketIndex leaf, std::uint64_t n);

enum class AccessOp { read, write, remove };

// Exact, instrumented counters. A "path" is one full root-to-leaf read
// followed by the write-back of the same buckets.
struct OramStats {
  std::uint64_t foreground_paths = 0;
  std::uint64_t eviction_paths = 0;
  std::uint64_t bucket_reads = 0;
  std::uint64_t bucket_writes = 0;
  std::uint64_t bytes_read = 0;
  std::uint64_t bytes_written = 0;

  std::uint64_t bytes_moved() const { return bytes_read + bytes_written; }
};

// Path ORAM over an untrusted Backend. The position map and stash stay on the
// client; every access reads one root-to-leaf path and writes the same path
// back with fresh encryption. Blocks are placed greedily into the deepest
// bucket on the fetched path that lies on their own assigned path.
//
// Invariant after every public call: each live block is either in the stash
// or in a bucket on the path to its mapped leaf.
class PathOram {
 public:
  using PositionMap = std::map<BlockId, BucketIndex>;
  using Stash = std::map<BlockId, Bytes>;
  using Mutator = std::function<void(std::span<std::uint8_t>)>;

  // Everything the client has to keep to resume work against the same backend.
  struct ClientState {
    std::uint64_t bucket_count = 1;
    PositionMap positions;
    Stash stash;
  };

  // Formats a fresh tree of `bucket_count` dummy buckets on the backend.
  PathOram(const OramConfig& config, Backend& backend, SecretKey key, std::uint64_t bucket_count = 1);

  // Resumes from saved client state; the backend must already hold the tree.
  static std::unique_ptr<PathOram> restore(const OramConfig& config, Backend& backend, SecretKey key,
                                           ClientState state);

  PathOram(const PathOram&) = delete;
  PathOram& operator=(const PathOram&) = delete;

  // Single-block access. read/remove return the prior payload; write returns
  // the prior payload when the block already existed. Payloads shorter than
  // segment_size are zero-padded.
  std::optional<Bytes> access(AccessOp op, BlockId id,
                              std::optional<std::span<const std::uint8_t>> payload = std::nullopt);

  Bytes read(BlockId id);
  void write(BlockId id, std::span<const std::uint8_t> payload);
  Bytes remove(BlockId id);
  // Read-modify-write of one block through a single path access.
  void update(BlockId id, const Mutator& mutate);

  // Services every block of `group` with one path read and one path write.
  // Members must share a leaf (new blocks written together are given one);
  // survivors are remapped together to one fresh leaf. For writes,
  // `payloads` is parallel to `group`.
  std::vector<Bytes> multi_access(AccessOp op, std::span<const BlockId> group,
                                  std::span<const Bytes> payloads = {});

  // Dummy accesses on uniformly random paths; drains the stash without
  // remapping any block.
  void background_evict(std::uint64_t paths);

  // Live blocks over total slots; stash-resident blocks count as live.
  double utilization() const;

  bool contains(BlockId id) const { return positions_.contains(id); }
  std::uint64_t bucket_count() const { return bucket_count_; }
  std::uint64_t live_blocks() const { return positions_.size(); }
  std::size_t stash_size() const { return stash_.size(); }
  const PositionMap& positions() const { return positions_; }
  const Stash& stash() const { return stash_; }
  const OramConfig& config() const { return config_; }
  const OramStats& stats() const { return stats_; }
  void reset_stats() { stats_ = {}; }
  Backend& backend() const { return *backend_; }
  const SecretKey& key() const { return key_; }

  ClientState snapshot() const { return {bucket_count_, positions_, stash_}; }

 private:
  friend class Resizer;

  struct RestoreTag {};
  PathOram(RestoreTag, const OramConfig& config, Backend& backend, SecretKey key, ClientState state);

  std::vector<Bytes> run_access(AccessOp op, std::span<const BlockId> ids,
                                std::span<const Bytes> payloads, const Mutator* mutate);
  BucketIndex random_leaf();
  Bytes padded(std::span<const std::uint8_t> payload) const;

  // Pulls every real block of the bucket into the stash.
  void load_bucket(BucketIndex index);
  void store_bucket(BucketIndex index, std::span<const BlockId> members);
  void read_path(std::span<const BucketIndex> path);
  void write_path(std::span<const BucketIndex> path);
  void relieve_stash_pressure();

  OramConfig config_;
  Backend* backend_;
  SecretKey key_;
  Rng rng_;
  std::uint64_t bucket_count_;
  PositionMap positions_;
  Stash stash_;
  OramStats stats_;
  Bytes plain_scratch_;
  Bytes cipher_scratch_;
};

}  // namespace oramfs
