#include "oramfs/backend.hpp"

#include <fstream>
#include <mutex>
#include <system_error>

#include "oramfs/error.hpp"

namespace fs = std::filesystem;

namespace oramfs {
namespace {

void check_name(std::string_view name) {
  if (!is_valid_object_name(name)) {
    throw Error(Errc::invalid_name, "object name '" + std::string(name) + "' is not allowed");
  }
}

Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::missing_object, path.filename().string());
  in.seekg(0, std::ios::end);
  auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  Bytes out(size);
  if (size > 0 && !in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(size))) {
    throw Error(Errc::storage_error, "short read from " + path.string());
  }
  return out;
}

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> body) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::storage_error, "cannot open " + tmp.string());
    out.write(reinterpret_cast<const char*>(body.data()), static_cast<std::streamsize>(body.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw Error(Errc::storage_error, "write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(Errc::storage_error, "rename into " + path.string() + " failed");
  }
}

}  // namespace

bool is_valid_object_name(std::string_view name) { return name == kCheckpointObject; }

// ---- MemoryBackend ---------------------------------------------------------

void MemoryBackend::put_bucket(BucketKey key, std::span<const std::uint8_t> envelope) {
  std::unique_lock lock(mu_);
  buckets_[key.index].assign(envelope.begin(), envelope.end());
}

Bytes MemoryBackend::get_bucket(BucketKey key) const {
  std::shared_lock lock(mu_);
  auto it = buckets_.find(key.index);
  if (it == buckets_.end()) {
    throw Error(Errc::missing_object, "bucket " + std::to_string(key.index));
  }
  return it->second;
}

void MemoryBackend::delete_bucket(BucketKey key) {
  std::unique_lock lock(mu_);
  if (buckets_.erase(key.index) == 0) {
    throw Error(Errc::missing_object, "bucket " + std::to_string(key.index));
  }
}

void MemoryBackend::put_named(std::string_view name, std::span<const std::uint8_t> body) {
  check_name(name);
  std::unique_lock lock(mu_);
  named_[std::string(name)].assign(body.begin(), body.end());
}

Bytes MemoryBackend::get_named(std::string_view name) const {
  check_name(name);
  std::shared_lock lock(mu_);
  auto it = named_.find(name);
  if (it == named_.end()) throw Error(Errc::missing_object, std::string(name));
  return it->second;
}

std::size_t MemoryBackend::bucket_object_count() const {
  std::shared_lock lock(mu_);
  return buckets_.size();
}

std::size_t MemoryBackend::stored_bytes() const {
  std::shared_lock lock(mu_);
  std::size_t total = 0;
  for (const auto& [_, b] : buckets_) total += b.size();
  for (const auto& [_, b] : named_) total += b.size();
  return total;
}

// ---- DirectoryBackend ------------------------------------------------------

DirectoryBackend::DirectoryBackend(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec || !fs::is_directory(root_)) {
    throw Error(Errc::storage_error, "cannot create directory " + root_.string());
  }
}

fs::path DirectoryBackend::bucket_path(BucketKey key) const {
  return root_ / ("bucket_" + std::to_string(key.index) + ".bin");
}

fs::path DirectoryBackend::named_path(std::string_view name) const {
  return root_ / (std::string(name) + ".oram");
}

void DirectoryBackend::put_bucket(BucketKey key, std::span<const std::uint8_t> envelope) {
  write_file_atomic(bucket_path(key), envelope);
}

Bytes DirectoryBackend::get_bucket(BucketKey key) const {
  auto path = bucket_path(key);
  if (!fs::exists(path)) throw Error(Errc::missing_object, "bucket " + std::to_string(key.index));
  return read_file(path);
}

void DirectoryBackend::delete_bucket(BucketKey key) {
  std::error_code ec;
  if (!fs::remove(bucket_path(key), ec)) {
    if (ec) throw Error(Errc::storage_error, "cannot remove bucket " + std::to_string(key.index));
    throw Error(Errc::missing_object, "bucket " + std::to_string(key.index));
  }
}

void DirectoryBackend::put_named(std::string_view name, std::span<const std::uint8_t> body) {
  check_name(name);
  write_file_atomic(named_path(name), body);
}

Bytes DirectoryBackend::get_named(std::string_view name) const {
  check_name(name);
  auto path = named_path(name);
  if (!fs::exists(path)) throw Error(Errc::missing_object, std::string(name));
  return read_file(path);
}

}  // namespace oramfs
