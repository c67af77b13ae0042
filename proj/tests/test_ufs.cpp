#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <stdexcept>

#include "oramfs/error.hpp"
#include "oramfs/ufs.hpp"
#include "support/invariant_checker.hpp"
#include "support/recording_backend.hpp"
#include "support/test_util.hpp"

namespace oramfs {
namespace {

using testing::check_oram;
using testing::check_packing;
using testing::fixed_key;
using testing::random_bytes;
using testing::small_config;

constexpr std::uint32_t kKiB = 1024;

OramConfig config_with_segment(std::uint32_t segment, std::uint32_t group = 3) {
  OramConfig c = small_config();
  c.segment_size = segment;
  c.group_size = group;
  return c;
}

std::unique_ptr<FileSystem> make_fs(Backend& backend, OramConfig config, UfsOptions options = {}) {
  return std::make_unique<FileSystem>(std::make_unique<PathOram>(config, backend, fixed_key()), options);
}

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

TEST(MakeGroups, Examples) {
  const std::vector<SegmentId> seven{0, 1, 2, 3, 4, 5, 6};
  EXPECT_EQ(make_groups(seven, 3), (std::vector<SegmentGroup>{{0, 1, 2}, {3, 4, 5}, {6}}));
  const std::vector<SegmentId> three{0, 1, 2};
  EXPECT_EQ(make_groups(three, 3), (std::vector<SegmentGroup>{{0, 1, 2}}));
  EXPECT_TRUE(make_groups({}, 3).empty());
  EXPECT_THROW(make_groups(three, 0), std::invalid_argument);
}

TEST(FileSystem, SeventyKilobyteFileSplitsIntoSegmentAndPackedTail) {
  MemoryBackend backend;
  auto fs = make_fs(backend, config_with_segment(64 * kKiB));
  std::mt19937_64 rng(1);
  const Bytes data = random_bytes(rng, 70 * kKiB);
  fs->write_file("a", data);
  const FileRecord& rec = fs->tables().files.at("a");
  EXPECT_EQ(rec.total_bytes, 71680u);
  ASSERT_EQ(rec.segment_ids.size(), 2u);
  const PackLocation& tail = fs->tables().packs.at(rec.segment_ids[1]);
  EXPECT_EQ(tail.length(), 6144u);
  EXPECT_EQ(tail.start, 0u);
  EXPECT_EQ(fs->read_file("a"), data);
}

TEST(FileSystem, ExactMultipleHasNoPackedTail) {
  MemoryBackend backend;
  auto fs = make_fs(backend, config_with_segment(64 * kKiB));
  fs->write_file("a", Bytes(64 * kKiB, 7));
  EXPECT_EQ(fs->tables().files.at("a").segment_ids.size(), 1u);
  EXPECT_TRUE(fs->tables().packs.empty());
  EXPECT_EQ(fs->read_file("a"), Bytes(64 * kKiB, 7));
}

TEST(FileSystem, GroupedReadUsesOnePathPerGroup) {
  for (std::uint32_t group : {1u, 2u, 3u, 5u}) {
    MemoryBackend backend;
    UfsOptions opts;
    opts.auto_resize = false;
    auto fs = make_fs(backend, config_with_segment(kKiB, group), opts);
    fs->oram().reset_stats();
    // 200 full segments, no tail.
    fs->write_file("big", Bytes(200 * kKiB, 1));
    EXPECT_EQ(fs->oram().stats().foreground_paths, ceil_div(200, group)) << group;
    fs->oram().reset_stats();
    fs->read_file("big");
    EXPECT_EQ(fs->oram().stats().foreground_paths, ceil_div(200, group)) << group;
  }
}

TEST(FileSystem, ThirtySegmentsInGroupsOfThreeReadInTenPaths) {
  MemoryBackend inner;
  testing::RecordingBackend backend(inner);
  auto fs = make_fs(backend, config_with_segment(kKiB, 3));
  std::mt19937_64 rng(5);
  const Bytes data = random_bytes(rng, 30 * kKiB);
  fs->write_file("f", data);
  fs->oram().reset_stats();
  backend.clear();
  EXPECT_EQ(fs->read_file("f"), data);
  std::vector<std::vector<std::uint64_t>> paths;
  ASSERT_TRUE(testing::split_into_paths(backend.events(), fs->oram().bucket_count(), &paths));
  EXPECT_EQ(fs->oram().stats().foreground_paths, 10u);
  EXPECT_EQ(paths.size(), 10u + fs->oram().stats().eviction_paths);
}

TEST(FileSystem, GroupMembersShareALeaf) {
  MemoryBackend backend;
  auto fs = make_fs(backend, config_with_segment(kKiB, 4));
  fs->write_file("f", Bytes(10 * kKiB, 3));
  const auto& ids = fs->tables().files.at("f").segment_ids;
  for (const auto& group : make_groups(ids, 4)) {
    const BucketIndex leaf = fs->oram().positions().at(group.front());
    for (SegmentId id : group) EXPECT_EQ(fs->oram().positions().at(id), leaf);
  }
}

TEST(FileSystem, RoundTripsAssortedSizes) {
  for (bool packing : {true, false}) {
    MemoryBackend backend;
    UfsOptions opts;
    opts.packing = packing;
    auto fs = make_fs(backend, config_with_segment(kKiB), opts);
    std::mt19937_64 rng(9);
    std::map<std::string, Bytes> expected;
    for (std::size_t size : {0u, 1u, 1023u, 1024u, 1025u, 3071u, 3072u, 5000u, 17 * 1024u + 5}) {
      const std::string name = "f" + std::to_string(size);
      expected[name] = random_bytes(rng, size);
      fs->write_file(name, expected[name]);
    }
    for (const auto& [name, data] : expected) EXPECT_EQ(fs->read_file(name), data) << name << " packing=" << packing;
    EXPECT_TRUE(fs->read_file("f0").empty());
    EXPECT_TRUE(check_oram(fs->oram(), fixed_key()).empty());
    EXPECT_TRUE(check_packing(*fs).empty());
  }
}

TEST(FileSystem, OverwriteReplacesContent) {
  MemoryBackend backend;
  auto fs = make_fs(backend, config_with_segment(kKiB));
  fs->write_file("x", Bytes(5000, 1));
  fs->write_file("x", Bytes(700, 2));
  EXPECT_EQ(fs->read_file("x"), Bytes(700, 2));
  EXPECT_EQ(fs->list(), std::vector<std::string>{"x"});
  EXPECT_EQ(fs->oram().live_blocks(), 1u);
}

TEST(FileSystem, MissingFileIsNotFound) {
  MemoryBackend backend;
  auto fs = make_fs(backend, config_with_segment(kKiB));
  for (auto fn : {+[](FileSystem& f) { f.read_file("nope"); }, +[](FileSystem& f) { f.delete_file("nope"); }}) {
    try {
      fn(*fs);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::not_found);
    }
  }
}

TEST(FileSystem, DeleteReleasesBlocksAndTables) {
  MemoryBackend backend;
  UfsOptions opts;
  opts.auto_resize = false;
  auto fs = make_fs(backend, config_with_segment(kKiB), opts);
  fs->write_file("a", Bytes(4 * kKiB + 100, 1));
  fs->write_file("b", Bytes(300, 2));
  ASSERT_EQ(fs->oram().live_blocks(), 5u);  // 4 full + one shared host
  fs->delete_file("a");
  EXPECT_FALSE(fs->exists("a"));
  EXPECT_EQ(fs->oram().live_blocks(), 1u);
  EXPECT_EQ(fs->tables().packs.size(), 1u);
  ASSERT_EQ(fs->tables().free_space.size(), 1u);
  EXPECT_EQ(fs->tables().free_space[0].free_bytes, kKiB - 300);
  EXPECT_EQ(fs->read_file("b"), Bytes(300, 2));
  fs->delete_file("b");
  EXPECT_EQ(fs->oram().live_blocks(), 0u);
  EXPECT_TRUE(fs->tables().packs.empty());
  EXPECT_TRUE(fs->tables().free_space.empty());
}

TEST(Packing, FirstFitAppendsAtTheUsedPrefix) {
  MemoryBackend backend;
  auto fs = make_fs(backend, config_with_segment(64 * kKiB));
  const PackLocation a = fs->pack_tail(100, Bytes(6144, 1));
  const PackLocation b = fs->pack_tail(101, Bytes(6144, 2));
  EXPECT_EQ(a, (PackLocation{a.host, 0, 6144}));
  EXPECT_EQ(b, (PackLocation{a.host, 6144, 12288}));
  ASSERT_EQ(fs->tables().free_space.size(), 1u);
  EXPECT_EQ(fs->tables().free_space[0].free_bytes, 65536u - 12288u);

  // 60 KB does not fit in the remaining 52 KB, so it opens a new host.
  const PackLocation c = fs->pack_tail(102, Bytes(60 * kKiB, 3));
  EXPECT_NE(c.host, a.host);
  EXPECT_EQ(c.start, 0u);
  EXPECT_EQ(fs->tables().free_space.size(), 2u);
}

TEST(Packing, DeletingMiddleTailCompacts) {
  MemoryBackend backend;
  auto fs = make_fs(backend, config_with_segment(64 * kKiB));
  fs->write_file("a", Bytes(6144, 'a'));
  fs->write_file("b", Bytes(6144, 'b'));
  fs->write_file("c", Bytes(6144, 'c'));
  fs->delete_file("b");
  const auto& packs = fs->tables().packs;
  const PackLocation a = packs.at(fs->tables().files.at("a").segment_ids[0]);
  const PackLocation c = packs.at(fs->tables().files.at("c").segment_ids[0]);
  EXPECT_EQ(a.start, 0u);
  EXPECT_EQ(c.start, 6144u);
  EXPECT_EQ(c.end, 12288u);
  EXPECT_EQ(fs->tables().free_space[0].free_bytes, 65536u - 12288u);
  EXPECT_EQ(fs->read_file("c"), Bytes(6144, 'c'));
  // Bytes past the used prefix are zeroed.
  const Bytes host = fs->oram().read(a.host);
  EXPECT_TRUE(std::all_of(host.begin() + 12288, host.end(), [](std::uint8_t b) { return b == 0; }));
}

TEST(Packing, RemovingOnlyOccupantFreesHost) {
  MemoryBackend backend;
  auto fs = make_fs(backend, config_with_segment(kKiB));
  const PackLocation loc = fs->pack_tail(42, Bytes(10, 1));
  fs->unpack_and_compact(42);
  EXPECT_FALSE(fs->oram().contains(loc.host));
  EXPECT_TRUE(fs->tables().free_space.empty());
  EXPECT_TRUE(fs->tables().packs.empty());
}

TEST(Packing, RejectsEmptyOrFullSegmentTail) {
  MemoryBackend backend;
  auto fs = make_fs(backend, config_with_segment(kKiB));
  EXPECT_THROW(fs->pack_tail(1, Bytes{}), std::invalid_argument);
  EXPECT_THROW(fs->pack_tail(1, Bytes(kKiB, 0)), std::invalid_argument);
}

// Plain-list model of the pack table: hosts in creation order, each holding
// (segment, length) pairs laid end to end.
struct PackModel {
  std::uint32_t segment;
  std::vector<std::pair<BlockId, std::vector<std::pair<SegmentId, std::uint32_t>>>> hosts;

  static std::uint32_t used(const std::vector<std::pair<SegmentId, std::uint32_t>>& items) {
    std::uint32_t u = 0;
    for (auto [_, len] : items) u += len;
    return u;
  }

  void add(SegmentId seg, std::uint32_t len, BlockId fresh_host) {
    for (auto& [host, items] : hosts) {
      if (segment - used(items) >= len) {
        items.emplace_back(seg, len);
        return;
      }
    }
    hosts.push_back({fresh_host, {{seg, len}}});
  }

  void remove(SegmentId seg) {
    for (auto it = hosts.begin(); it != hosts.end(); ++it) {
      auto& items = it->second;
      auto pos = std::find_if(items.begin(), items.end(), [seg](const auto& p) { return p.first == seg; });
      if (pos == items.end()) continue;
      items.erase(pos);
      if (items.empty()) hosts.erase(it);
      return;
    }
  }

  std::map<SegmentId, PackLocation> packs() const {
    std::map<SegmentId, PackLocation> out;
    for (const auto& [host, items] : hosts) {
      std::uint32_t offset = 0;
      for (auto [seg, len] : items) {
        out[seg] = {host, offset, offset + len};
        offset += len;
      }
    }
    return out;
  }

  std::vector<FreeSpaceEntry> free_space() const {
    std::vector<FreeSpaceEntry> out;
    for (const auto& [host, items] : hosts) out.push_back({host, segment - used(items)});
    return out;
  }
};

TEST(Packing, RandomizedAgainstListModel) {
  MemoryBackend backend;
  const OramConfig config = config_with_segment(4 * kKiB);
  auto fs = make_fs(backend, config);
  PackModel model{config.segment_size, {}};
  std::mt19937_64 rng(77);
  std::map<std::string, Bytes> files;
  std::uint64_t counter = 0;

  for (int op = 0; op < 1200; ++op) {
    if (files.empty() || rng() % 100 < 55) {
      const std::string name = "f" + std::to_string(counter++);
      // Sub-segment sizes only, so every file is exactly one packed tail.
      const std::size_t size = 1 + rng() % (config.segment_size - 1);
      files[name] = random_bytes(rng, size);
      const BlockId next = fs->tables().next_id;
      fs->write_file(name, files[name]);
      model.add(next, static_cast<std::uint32_t>(size), next + 1);
    } else {
      auto it = files.begin();
      std::advance(it, rng() % files.size());
      const SegmentId seg = fs->tables().files.at(it->first).segment_ids[0];
      fs->delete_file(it->first);
      model.remove(seg);
      files.erase(it);
    }
    ASSERT_EQ(fs->tables().packs, model.packs()) << "op " << op;
    ASSERT_EQ(fs->tables().free_space, model.free_space()) << "op " << op;
    const auto pv = check_packing(*fs);
    ASSERT_TRUE(pv.empty()) << "op " << op << ": " << pv.front();
    if (op % 50 == 0) {
      for (const auto& [name, data] : files) ASSERT_EQ(fs->read_file(name), data) << name;
    }
  }
  for (const auto& [name, data] : files) EXPECT_EQ(fs->read_file(name), data) << name;
}

TEST(FileSystem, AddThenDeleteEverythingShrinksToRoot) {
  MemoryBackend backend;
  auto fs = make_fs(backend, config_with_segment(kKiB));
  std::mt19937_64 rng(3);
  for (int i = 0; i < 40; ++i) fs->write_file("f" + std::to_string(i), random_bytes(rng, 1 + rng() % 6000));
  EXPECT_GT(fs->oram().bucket_count(), 1u);
  for (int i = 0; i < 40; ++i) fs->delete_file("f" + std::to_string(i));
  EXPECT_EQ(fs->oram().live_blocks(), 0u);
  EXPECT_EQ(fs->oram().bucket_count(), 1u);
  EXPECT_TRUE(check_oram(fs->oram(), fixed_key()).empty());
}

TEST(FileSystem, ResizeObserverSeesEveryTriggeredResize) {
  MemoryBackend backend;
  auto fs = make_fs(backend, config_with_segment(kKiB));
  std::vector<ResizeReport> seen;
  fs->set_resize_observer([&](const ResizeReport& r) { seen.push_back(r); });
  fs->write_file("f", Bytes(20 * kKiB, 1));
  ASSERT_FALSE(seen.empty());
  for (const auto& r : seen) {
    EXPECT_TRUE(r.triggered());
    EXPECT_LE(r.utilization_after, 0.5);
  }
}

}  // namespace
}  // namespace oramfs
