#pragma once

#include <vector>

#include "oramfs/backend.hpp"

namespace oramfs::testing {

// Forwards to an inner backend and logs every bucket touch in order.
class RecordingBackend final : public Backend {
 public:
  enum class Kind { get, put, del };
  struct Event {
    Kind kind;
    std::uint64_t index;
  };

  explicit RecordingBackend(Backend& inner) : inner_(inner) {}

  void put_bucket(BucketKey key, std::span<const std::uint8_t> envelope) override {
    events_.push_back({Kind::put, key.index});
    sizes_.push_back(envelope.size());
    inner_.put_bucket(key, envelope);
  }
  Bytes get_bucket(BucketKey key) const override {
    events_.push_back({Kind::get, key.index});
    return inner_.get_bucket(key);
  }
  void delete_bucket(BucketKey key) override {
    events_.push_back({Kind::del, key.index});
    inner_.delete_bucket(key);
  }
  void put_named(std::string_view name, std::span<const std::uint8_t> body) override {
    inner_.put_named(name, body);
  }
  Bytes get_named(std::string_view name) const override { return inner_.get_named(name); }

  const std::vector<Event>& events() const { return events_; }
  const std::vector<std::size_t>& put_sizes() const { return sizes_; }
  void clear() {
    events_.clear();
    sizes_.clear();
  }

 private:
  Backend& inner_;
  mutable std::vector<Event> events_;
  std::vector<std::size_t> sizes_;
};

// Splits an event log into consecutive path accesses. Returns false if the
// log is not a sequence of (read path P, write path P) pairs where every P is
// a root-to-leaf path of a tree with `n` buckets.
bool split_into_paths(const std::vector<RecordingBackend::Event>& events, std::uint64_t n,
                      std::vector<std::vector<std::uint64_t>>* paths);

}  // namespace oramfs::testing
