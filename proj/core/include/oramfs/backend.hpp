#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>

#include "oramfs/types.hpp"

namespace oramfs {

struct BucketKey {
  std::uint64_t index;
  friend auto operator<=>(const BucketKey&, const BucketKey&) = default;
};

// Named objects a backend accepts. Anything else is rejected with
// Errc::invalid_name.
inline constexpr std::string_view kCheckpointObject = "checkpoint";
bool is_valid_object_name(std::string_view name);

// Untrusted storage. A backend only moves opaque byte strings around and never
// interprets them. get_bucket may be called concurrently for distinct keys;
// mutations are serialized by the caller.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual void put_bucket(BucketKey key, std::span<const std::uint8_t> envelope) = 0;
  virtual Bytes get_bucket(BucketKey key) const = 0;
  virtual void delete_bucket(BucketKey key) = 0;

  virtual void put_named(std::string_view name, std::span<const std::uint8_t> body) = 0;
  virtual Bytes get_named(std::string_view name) const = 0;
};

class MemoryBackend final : public Backend {
 public:
  void put_bucket(BucketKey key, std::span<const std::uint8_t> envelope) override;
  Bytes get_bucket(BucketKey key) const override;
  void delete_bucket(BucketKey key) override;
  void put_named(std::string_view name, std::span<const std::uint8_t> body) override;
  Bytes get_named(std::string_view name) const override;

  std::size_t bucket_object_count() const;
  std::size_t stored_bytes() const;

 private:
  mutable std::shared_mutex mu_;
  std::map<std::uint64_t, Bytes> buckets_;
  std::map<std::string, Bytes, std::less<>> named_;
};

// Local directory standing in for a cloud-synced folder:
//   <root>/bucket_<index>.bin   one file per bucket
//   <root>/checkpoint.oram      the session checkpoint
// Writes go to a temporary sibling that is renamed into place.
class DirectoryBackend final : public Backend {
 public:
  // Creates the directory if it does not exist.
  explicit DirectoryBackend(std::filesystem::path root);

  void put_bucket(BucketKey key, std::span<const std::uint8_t> envelope) override;
  Bytes get_bucket(BucketKey key) const override;
  void delete_bucket(BucketKey key) override;
  void put_named(std::string_view name, std::span<const std::uint8_t> body) override;
  Bytes get_named(std::string_view name) const override;

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path bucket_path(BucketKey key) const;
  std::filesystem::path named_path(std::string_view name) const;

 private:
  std::filesystem::path root_;
};

}  // namespace oramfs
