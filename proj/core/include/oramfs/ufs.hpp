#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oramfs/path_oram.hpp"
#include "oramfs/resizer.hpp"

namespace oramfs {

using SegmentId = std::uint64_t;
using SegmentGroup = std::vector<SegmentId>;

struct FileRecord {
  std::vector<SegmentId> segment_ids;  // ceil(total_bytes / segment_size) entries
  std::uint64_t total_bytes = 0;

  friend bool operator==(const FileRecord&, const FileRecord&) = default;
};

// Where a packed tail segment lives: [start, end) inside the host block.
struct PackLocation {
  BlockId host = 0;
  std::uint32_t start = 0;
  std::uint32_t end = 0;

  std::uint32_t length() const { return end - start; }
  friend bool operator==(const PackLocation&, const PackLocation&) = default;
};

struct FreeSpaceEntry {
  BlockId host = 0;
  std::uint32_t free_bytes = 0;

  friend bool operator==(const FreeSpaceEntry&, const FreeSpaceEntry&) = default;
};

// All file-system metadata, i.e. what a checkpoint must carry besides the
// ORAM client state. free_space is kept in insertion order; first-fit scans
// it front to back.
struct UfsTables {
  std::map<std::string, FileRecord, std::less<>> files;
  std::map<SegmentId, PackLocation> packs;
  std::vector<FreeSpaceEntry> free_space;
  std::uint64_t next_id = 0;

  friend bool operator==(const UfsTables&, const UfsTables&) = default;
};

struct UfsOptions {
  bool packing = true;
  bool auto_resize = true;
  ResizePolicy resize;
};

// Consecutive chunks of `group_size`; the last chunk may be shorter.
std::vector<SegmentGroup> make_groups(std::span<const SegmentId> segment_ids, std::uint32_t group_size);

// The user-facing file store. Files are split into segment_size pieces; full
// pieces are written in groups that share one leaf so one path serves the
// whole group, and a partial final piece is packed next to other files'
// tails inside a shared host block.
class FileSystem {
 public:
  using ResizeObserver = std::function<void(const ResizeReport&)>;

  FileSystem(std::unique_ptr<PathOram> oram, UfsOptions options);
  FileSystem(std::unique_ptr<PathOram> oram, UfsOptions options, UfsTables tables);

  // Replaces any existing file with the same name.
  void write_file(std::string_view name, std::span<const std::uint8_t> data);
  Bytes read_file(std::string_view name);
  void delete_file(std::string_view name);

  bool exists(std::string_view name) const { return tables_.files.contains(name); }
  std::vector<std::string> list() const;

  // Packs a tail of 0 < size < segment_size bytes; first fit over hosts in
  // insertion order, else a fresh host block.
  PackLocation pack_tail(SegmentId segment, std::span<const std::uint8_t> tail);
  // Removes a packed segment, closes the gap it leaves and frees the host
  // block once it is empty.
  void unpack_and_compact(SegmentId segment);

  // Runs the resizer if auto-resize is on. Called internally after each
  // mutation; exposed for callers that toggle the option.
  ResizeReport maybe_resize();

  void set_resize_observer(ResizeObserver observer) { observer_ = std::move(observer); }

  PathOram& oram() { return *oram_; }
  const PathOram& oram() const { return *oram_; }
  const UfsTables& tables() const { return tables_; }
  const UfsOptions& options() const { return options_; }
  const Resizer& resizer() const { return resizer_; }

 private:
  std::uint32_t segment_size() const { return oram_->config().segment_size; }
  std::vector<SegmentId> block_backed_segments(const FileRecord& record) const;
  std::vector<std::pair<SegmentId, PackLocation*>> occupants(BlockId host);
  FreeSpaceEntry* free_entry(BlockId host);

  std::unique_ptr<PathOram> oram_;
  UfsOptions options_;
  Resizer resizer_;
  UfsTables tables_;
  ResizeObserver observer_;
};

}  // namespace oramfs
