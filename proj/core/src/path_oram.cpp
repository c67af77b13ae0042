#include "oramfs/path_oram.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <stdexcept>
#include <string>

#include "oramfs/detail/byte_io.hpp"
#include "oramfs/error.hpp"

namespace oramfs {
namespace {

// Stash pressure response: evict in batches of this many paths ...
constexpr std::uint64_t kEvictBatch = 4;
// ... for at most this many paths per operation ...
constexpr std::uint64_t kEvictBudget = 32;
// ... and fail once the stash is this many times over its limit.
constexpr std::size_t kHardCapFactor = 4;

}  // namespace

void OramConfig::validate() const {
  if (z < 1) throw Error(Errc::invalid_config, "z must be at least 1");
  if (segment_size < 1024) throw Error(Errc::invalid_config, "segment_size must be at least 1024 bytes");
  if (group_size < 1) throw Error(Errc::invalid_config, "group_size must be at least 1");
  if (stash_max < 1) throw Error(Errc::invalid_config, "stash_max must be at least 1");
}

int depth_of(BucketIndex i) { return std::bit_width(i + 1) - 1; }

std::vector<BucketIndex> path_indices(BucketIndex leaf, std::uint64_t n) {
  if (leaf >= n) {
    throw Error(Errc::invalid_leaf, "bucket " + std::to_string(leaf) + " outside tree of " + std::to_string(n));
  }
  if (!is_leaf(leaf, n)) throw Error(Errc::not_a_leaf, "bucket " + std::to_string(leaf) + " has a child");
  std::vector<BucketIndex> path(static_cast<std::size_t>(depth_of(leaf)) + 1);
  for (auto it = path.rbegin(); it != path.rend(); ++it) {
    *it = leaf;
    leaf = leaf == 0 ? 0 : parent_of(leaf);
  }
  return path;
}

namespace {

// Depth of the deepest bucket on `path` that also lies on the path to `leaf`.
std::size_t deepest_shared_depth(BucketIndex leaf, std::span<const BucketIndex> path) {
  const int leaf_depth = depth_of(leaf);
  int d = std::min<int>(leaf_depth, static_cast<int>(path.size()) - 1);
  for (; d > 0; --d) {
    BucketIndex ancestor = ((leaf + 1) >> (leaf_depth - d)) - 1;
    if (ancestor == path[static_cast<std::size_t>(d)]) break;
  }
  return static_cast<std::size_t>(d);
}

}  // namespace

PathOram::PathOram(const OramConfig& config, Backend& backend, SecretKey key, std::uint64_t bucket_count)
    : config_(config), backend_(&backend), key_(key), rng_(config.rng_seed), bucket_count_(bucket_count) {
  config_.validate();
  if (bucket_count_ < 1) throw Error(Errc::invalid_config, "tree needs at least the root bucket");
  for (BucketIndex i = 0; i < bucket_count_; ++i) store_bucket(i, {});
}

PathOram::PathOram(RestoreTag, const OramConfig& config, Backend& backend, SecretKey key, ClientState state)
    : config_(config),
      backend_(&backend),
      key_(key),
      rng_(config.rng_seed),
      bucket_count_(state.bucket_count),
      positions_(std::move(state.positions)),
      stash_(std::move(state.stash)) {
  config_.validate();
  if (bucket_count_ < 1) throw Error(Errc::invalid_config, "tree needs at least the root bucket");
}

std::unique_ptr<PathOram> PathOram::restore(const OramConfig& config, Backend& backend, SecretKey key,
                                            ClientState state) {
  return std::unique_ptr<PathOram>(new PathOram(RestoreTag{}, config, backend, key, std::move(state)));
}

BucketIndex PathOram::random_leaf() {
  return first_leaf(bucket_count_) + rng_.uniform(leaf_count(bucket_count_));
}

Bytes PathOram::padded(std::span<const std::uint8_t> payload) const {
  if (payload.size() > config_.segment_size) {
    throw std::invalid_argument("payload of " + std::to_string(payload.size()) +
                                " bytes exceeds segment size " + std::to_string(config_.segment_size));
  }
  Bytes out(config_.segment_size, 0);
  std::copy(payload.begin(), payload.end(), out.begin());
  return out;
}

double PathOram::utilization() const {
  return static_cast<double>(positions_.size()) /
         (static_cast<double>(bucket_count_) * static_cast<double>(config_.z));
}

// ---- bucket I/O -------------------------------------------------------------

void PathOram::load_bucket(BucketIndex index) {
  Bytes envelope = backend_->get_bucket({index});
  stats_.bucket_reads++;
  stats_.bytes_read += envelope.size();
  if (envelope.size() != sealed_size(config_.bucket_plaintext_size())) {
    throw Error(Errc::storage_error, "bucket " + std::to_string(index) + " has unexpected size");
  }
  plain_scratch_.resize(config_.bucket_plaintext_size());
  open_into(envelope, key_, plain_scratch_);

  const std::size_t block_size = config_.block_size();
  for (std::uint32_t slot = 0; slot < config_.z; ++slot) {
    const std::uint8_t* block = plain_scratch_.data() + slot * block_size;
    BlockId id = detail::load_be64(block);
    if (id == kDummyBlockId) continue;
    if (!positions_.contains(id) || stash_.contains(id)) {
      throw Error(Errc::storage_error,
                  "bucket " + std::to_string(index) + " holds an unexpected block; wrong key or corrupt tree");
    }
    const std::uint8_t* payload = block + kBlockHeaderSize;
    stash_.emplace(id, Bytes(payload, payload + config_.segment_size));
  }
}

void PathOram::store_bucket(BucketIndex index, std::span<const BlockId> members) {
  const std::size_t block_size = config_.block_size();
  plain_scratch_.resize(config_.bucket_plaintext_size());
  std::size_t slot = 0;
  for (BlockId id : members) {
    std::uint8_t* block = plain_scratch_.data() + slot * block_size;
    detail::store_be64(block, id);
    detail::store_be64(block + 8, positions_.at(id));
    const Bytes& payload = stash_.at(id);
    std::memcpy(block + kBlockHeaderSize, payload.data(), config_.segment_size);
    ++slot;
  }
  for (; slot < config_.z; ++slot) {
    std::uint8_t* block = plain_scratch_.data() + slot * block_size;
    detail::store_be64(block, kDummyBlockId);
    detail::store_be64(block + 8, 0);
    secure_random_bytes({block + kBlockHeaderSize, config_.segment_size});
  }
  cipher_scratch_.resize(sealed_size(plain_scratch_.size()));
  seal_into(plain_scratch_, key_, cipher_scratch_);
  backend_->put_bucket({index}, cipher_scratch_);
  stats_.bucket_writes++;
  stats_.bytes_written += cipher_scratch_.size();
}

void PathOram::read_path(std::span<const BucketIndex> path) {
  for (BucketIndex index : path) load_bucket(index);
}

void PathOram::write_path(std::span<const BucketIndex> path) {
  const std::size_t levels = path.size();
  std::vector<std::vector<BlockId>> by_depth(levels);
  for (const auto& [id, _] : stash_) {
    by_depth[deepest_shared_depth(positions_.at(id), path)].push_back(id);
  }

  // Fill from the leaf upwards; anything eligible at depth d is also
  // eligible at every shallower bucket on the path.
  std::vector<BlockId> candidates;
  std::vector<BlockId> chosen;
  for (std::size_t d = levels; d-- > 0;) {
    candidates.insert(candidates.end(), by_depth[d].begin(), by_depth[d].end());
    chosen.clear();
    while (!candidates.empty() && chosen.size() < config_.z) {
      chosen.push_back(candidates.back());
      candidates.pop_back();
    }
    store_bucket(path[d], chosen);
    for (BlockId id : chosen) stash_.erase(id);
  }
}

void PathOram::relieve_stash_pressure() {
  if (stash_.size() <= config_.stash_max) return;
  for (std::uint64_t done = 0; done < kEvictBudget && stash_.size() > config_.stash_max; done += kEvictBatch) {
    background_evict(kEvictBatch);
  }
  if (stash_.size() > kHardCapFactor * config_.stash_max) {
    throw Error(Errc::stash_overflow, "stash holds " + std::to_string(stash_.size()) + " blocks after eviction");
  }
}

// ---- accesses ---------------------------------------------------------------

std::vector<Bytes> PathOram::run_access(AccessOp op, std::span<const BlockId> ids,
                                        std::span<const Bytes> payloads, const Mutator* mutate) {
  if (ids.empty()) return {};
  if (op == AccessOp::write && !mutate && payloads.size() != ids.size()) {
    throw std::invalid_argument("write needs one payload per block");
  }

  std::optional<BucketIndex> leaf;
  std::size_t mapped = 0;
  for (BlockId id : ids) {
    if (id == kDummyBlockId) throw std::invalid_argument("the all-ones block id is reserved for dummies");
    auto it = positions_.find(id);
    if (it == positions_.end()) {
      if (op != AccessOp::write) throw Error(Errc::not_found, "block " + std::to_string(id));
      continue;
    }
    ++mapped;
    if (leaf && *leaf != it->second) {
      throw Error(Errc::grouping_violated, "group members are mapped to different leaves");
    }
    leaf = it->second;
  }
  if (mapped != 0 && mapped != ids.size()) {
    throw Error(Errc::grouping_violated, "group mixes new and existing blocks");
  }
  if (!leaf) leaf = random_leaf();

  // Padding is done before touching the backend so bad input cannot leave
  // the stash half-updated.
  std::vector<Bytes> fresh;
  if (op == AccessOp::write && !mutate) {
    fresh.reserve(ids.size());
    for (const Bytes& p : payloads) fresh.push_back(padded(p));
  }

  const auto path = path_indices(*leaf, bucket_count_);
  read_path(path);

  std::vector<Bytes> results;
  results.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const BlockId id = ids[i];
    auto it = stash_.find(id);
    if (mapped != 0 && it == stash_.end()) {
      throw Error(Errc::storage_error, "block " + std::to_string(id) + " missing from its path");
    }
    switch (op) {
      case AccessOp::read:
        if (mutate) (*mutate)(it->second);
        results.push_back(it->second);
        break;
      case AccessOp::write:
        results.push_back(it == stash_.end() ? Bytes{} : std::move(it->second));
        stash_[id] = std::move(fresh[i]);
        break;
      case AccessOp::remove:
        results.push_back(std::move(it->second));
        stash_.erase(it);
        positions_.erase(id);
        break;
    }
  }
  if (op != AccessOp::remove) {
    const BucketIndex next = random_leaf();
    for (BlockId id : ids) positions_[id] = next;
  }

  write_path(path);
  stats_.foreground_paths++;
  relieve_stash_pressure();
  return results;
}

std::optional<Bytes> PathOram::access(AccessOp op, BlockId id, std::optional<std::span<const std::uint8_t>> payload) {
  if (op == AccessOp::write && !payload) throw std::invalid_argument("write needs a payload");
  const bool existed = contains(id);
  std::vector<Bytes> payloads;
  if (payload) payloads.emplace_back(payload->begin(), payload->end());
  auto out = run_access(op, std::span(&id, 1), payloads, nullptr);
  if (op == AccessOp::write && !existed) return std::nullopt;
  return std::move(out.front());
}

Bytes PathOram::read(BlockId id) { return *access(AccessOp::read, id); }

void PathOram::write(BlockId id, std::span<const std::uint8_t> payload) { access(AccessOp::write, id, payload); }

Bytes PathOram::remove(BlockId id) { return *access(AccessOp::remove, id); }

void PathOram::update(BlockId id, const Mutator& mutate) {
  run_access(AccessOp::read, std::span(&id, 1), {}, &mutate);
}

std::vector<Bytes> PathOram::multi_access(AccessOp op, std::span<const BlockId> group,
                                          std::span<const Bytes> payloads) {
  return run_access(op, group, payloads, nullptr);
}

void PathOram::background_evict(std::uint64_t paths) {
  for (std::uint64_t i = 0; i < paths; ++i) {
    const auto path = path_indices(random_leaf(), bucket_count_);
    read_path(path);
    write_path(path);
    stats_.eviction_paths++;
  }
}

}  // namespace oramfs
