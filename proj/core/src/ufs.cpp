#include "oramfs/ufs.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

#include "oramfs/error.hpp"

namespace oramfs {

std::vector<SegmentGroup> make_groups(std::span<const SegmentId> segment_ids, std::uint32_t group_size) {
  if (group_size == 0) throw std::invalid_argument("group size must be positive");
  std::vector<SegmentGroup> groups;
  for (std::size_t i = 0; i < segment_ids.size(); i += group_size) {
    auto n = std::min<std::size_t>(group_size, segment_ids.size() - i);
    groups.emplace_back(segment_ids.begin() + static_cast<std::ptrdiff_t>(i),
                        segment_ids.begin() + static_cast<std::ptrdiff_t>(i + n));
  }
  return groups;
}

FileSystem::FileSystem(std::unique_ptr<PathOram> oram, UfsOptions options)
    : FileSystem(std::move(oram), options, UfsTables{}) {}

FileSystem::FileSystem(std::unique_ptr<PathOram> oram, UfsOptions options, UfsTables tables)
    : oram_(std::move(oram)), options_(options), resizer_(options.resize), tables_(std::move(tables)) {
  if (!oram_) throw std::invalid_argument("file system needs an ORAM");
}

std::vector<std::string> FileSystem::list() const {
  std::vector<std::string> names;
  names.reserve(tables_.files.size());
  for (const auto& [name, _] : tables_.files) names.push_back(name);
  return names;
}

std::vector<SegmentId> FileSystem::block_backed_segments(const FileRecord& record) const {
  std::vector<SegmentId> ids = record.segment_ids;
  if (!ids.empty() && tables_.packs.contains(ids.back())) ids.pop_back();
  return ids;
}

ResizeReport FileSystem::maybe_resize() {
  if (!options_.auto_resize) return {};
  ResizeReport report = resizer_.maybe_resize(*oram_);
  if (report.triggered() && observer_) observer_(report);
  return report;
}

void FileSystem::write_file(std::string_view name, std::span<const std::uint8_t> data) {
  if (exists(name)) delete_file(name);

  const std::size_t seg = segment_size();
  const std::size_t full = data.size() / seg;
  const std::size_t tail = data.size() % seg;

  FileRecord record;
  record.total_bytes = data.size();
  for (std::size_t i = 0; i < full + (tail ? 1 : 0); ++i) record.segment_ids.push_back(tables_.next_id++);

  const bool pack = options_.packing && tail != 0;
  std::span<const SegmentId> blocks(record.segment_ids);
  if (pack) blocks = blocks.first(full);

  std::size_t index = 0;
  for (const auto& group : make_groups(blocks, oram_->config().group_size)) {
    std::vector<Bytes> payloads;
    payloads.reserve(group.size());
    for (std::size_t k = 0; k < group.size(); ++k, ++index) {
      auto piece = data.subspan(index * seg, std::min(seg, data.size() - index * seg));
      payloads.emplace_back(piece.begin(), piece.end());
    }
    oram_->multi_access(AccessOp::write, group, payloads);
    maybe_resize();
  }
  if (pack) {
    pack_tail(record.segment_ids.back(), data.last(tail));
    maybe_resize();
  }
  tables_.files.emplace(std::string(name), std::move(record));
}

Bytes FileSystem::read_file(std::string_view name) {
  auto it = tables_.files.find(name);
  if (it == tables_.files.end()) throw Error(Errc::not_found, "file '" + std::string(name) + "'");
  const FileRecord& record = it->second;
  const std::size_t seg = segment_size();

  Bytes out(record.total_bytes);
  const auto blocks = block_backed_segments(record);
  std::size_t index = 0;
  for (const auto& group : make_groups(blocks, oram_->config().group_size)) {
    auto payloads = oram_->multi_access(AccessOp::read, group);
    for (const Bytes& p : payloads) {
      const std::size_t offset = index * seg;
      const std::size_t n = std::min<std::size_t>(seg, out.size() - offset);
      std::memcpy(out.data() + offset, p.data(), n);
      ++index;
    }
  }
  if (blocks.size() < record.segment_ids.size()) {
    const PackLocation& loc = tables_.packs.at(record.segment_ids.back());
    Bytes host = oram_->read(loc.host);
    std::memcpy(out.data() + index * seg, host.data() + loc.start, loc.length());
  }
  return out;
}

void FileSystem::delete_file(std::string_view name) {
  auto it = tables_.files.find(name);
  if (it == tables_.files.end()) throw Error(Errc::not_found, "file '" + std::string(name) + "'");
  const FileRecord record = std::move(it->second);
  tables_.files.erase(it);

  const auto blocks = block_backed_segments(record);
  for (const auto& group : make_groups(blocks, oram_->config().group_size)) {
    oram_->multi_access(AccessOp::remove, group);
    maybe_resize();
  }
  if (blocks.size() < record.segment_ids.size()) {
    unpack_and_compact(record.segment_ids.back());
    maybe_resize();
  }
}

FreeSpaceEntry* FileSystem::free_entry(BlockId host) {
  auto it = std::find_if(tables_.free_space.begin(), tables_.free_space.end(),
                         [host](const FreeSpaceEntry& e) { return e.host == host; });
  return it == tables_.free_space.end() ? nullptr : &*it;
}

std::vector<std::pair<SegmentId, PackLocation*>> FileSystem::occupants(BlockId host) {
  std::vector<std::pair<SegmentId, PackLocation*>> out;
  for (auto& [segment, loc] : tables_.packs) {
    if (loc.host == host) out.emplace_back(segment, &loc);
  }
  return out;
}

PackLocation FileSystem::pack_tail(SegmentId segment, std::span<const std::uint8_t> tail) {
  const std::uint32_t seg = segment_size();
  if (tail.empty() || tail.size() >= seg) {
    throw std::invalid_argument("packed tail must be shorter than a segment and non-empty");
  }
  const auto len = static_cast<std::uint32_t>(tail.size());

  for (FreeSpaceEntry& entry : tables_.free_space) {
    if (entry.free_bytes < len) continue;
    const std::uint32_t offset = seg - entry.free_bytes;
    oram_->update(entry.host, [&](std::span<std::uint8_t> block) {
      std::memcpy(block.data() + offset, tail.data(), len);
    });
    entry.free_bytes -= len;
    PackLocation loc{entry.host, offset, offset + len};
    tables_.packs[segment] = loc;
    return loc;
  }

  const BlockId host = tables_.next_id++;
  oram_->write(host, tail);
  tables_.free_space.push_back({host, seg - len});
  PackLocation loc{host, 0, len};
  tables_.packs[segment] = loc;
  return loc;
}

void FileSystem::unpack_and_compact(SegmentId segment) {
  auto it = tables_.packs.find(segment);
  if (it == tables_.packs.end()) throw Error(Errc::not_found, "packed segment " + std::to_string(segment));
  const PackLocation loc = it->second;
  FreeSpaceEntry* entry = free_entry(loc.host);
  if (!entry) throw Error(Errc::not_found, "host block " + std::to_string(loc.host) + " has no free-space entry");

  const std::uint32_t seg = segment_size();
  const std::uint32_t used = seg - entry->free_bytes;
  const std::uint32_t len = loc.length();

  if (used == len) {
    oram_->remove(loc.host);
    tables_.free_space.erase(tables_.free_space.begin() + (entry - tables_.free_space.data()));
    tables_.packs.erase(it);
    return;
  }

  oram_->update(loc.host, [&](std::span<std::uint8_t> block) {
    std::memmove(block.data() + loc.start, block.data() + loc.end, used - loc.end);
    std::memset(block.data() + used - len, 0, len);
  });
  tables_.packs.erase(it);
  for (auto& [_, other] : occupants(loc.host)) {
    if (other->start >= loc.end) {
      other->start -= len;
      other->end -= len;
    }
  }
  entry->free_bytes += len;
}

}  // namespace oramfs
