#include <gtest/gtest.h>

#include <map>
#include <random>

#include "oramfs/error.hpp"
#include "oramfs/session.hpp"
#include "support/invariant_checker.hpp"
#include "support/test_util.hpp"

namespace oramfs {
namespace {

using testing::fixed_key;
using testing::random_bytes;
using testing::small_config;

constexpr std::size_t kSmallPad = 256 * 1024;

template <typename Fn>
Errc error_code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected oramfs::Error";
  return Errc::invalid_config;
}

std::unique_ptr<FileSystem> make_fs(Backend& backend, const SecretKey& key) {
  return std::make_unique<FileSystem>(std::make_unique<PathOram>(small_config(), backend, key), UfsOptions{});
}

std::map<std::string, Bytes> populate(FileSystem& fs, std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::map<std::string, Bytes> files;
  for (int i = 0; i < count; ++i) {
    const std::string name = "file-" + std::to_string(seed) + "-" + std::to_string(i);
    files[name] = random_bytes(rng, rng() % 5000);
    fs.write_file(name, files[name]);
  }
  return files;
}

TEST(Checkpoint, LengthDependsOnlyOnPadSize) {
  const auto key = fixed_key();
  MemoryBackend b1, b2;
  auto small = make_fs(b1, key);
  auto large = make_fs(b2, key);
  populate(*small, 1, 1);
  populate(*large, 2, 60);
  EXPECT_EQ(seal_checkpoint(*small, key, kSmallPad).size(), kSmallPad + kNonceSize);
  EXPECT_EQ(seal_checkpoint(*large, key, kSmallPad).size(), kSmallPad + kNonceSize);
  EXPECT_EQ(seal_checkpoint(*small, key).size(), kDefaultPadSize + 16);
}

TEST(Checkpoint, HeaderLayout) {
  MemoryBackend backend;
  auto fs = make_fs(backend, fixed_key());
  const Bytes body = encode_checkpoint(*fs);
  ASSERT_GE(body.size(), 6u);
  EXPECT_EQ(Bytes(body.begin(), body.begin() + 6), (Bytes{0x4F, 0x52, 0x41, 0x4D, 0x00, 0x01}));
}

TEST(Checkpoint, OverflowAtPadBoundary) {
  MemoryBackend backend;
  const auto key = fixed_key();
  auto fs = make_fs(backend, key);
  populate(*fs, 3, 10);
  const std::size_t body = encode_checkpoint(*fs).size();
  EXPECT_EQ(seal_checkpoint(*fs, key, body).size(), body + 16);
  EXPECT_EQ(error_code_of([&] { seal_checkpoint(*fs, key, body - 1); }), Errc::checkpoint_overflow);
}

TEST(Session, LogoutLoginRoundTrip) {
  MemoryBackend backend;
  const auto key = fixed_key();
  std::map<std::string, Bytes> files;
  UfsTables tables_before;
  std::uint64_t buckets_before = 0;
  double utilization_before = 0;
  {
    auto fs = make_fs(backend, key);
    files = populate(*fs, 4, 40);
    for (int i = 0; i < 10; ++i) {
      fs->delete_file("file-4-" + std::to_string(i));
      files.erase("file-4-" + std::to_string(i));
    }
    tables_before = fs->tables();
    buckets_before = fs->oram().bucket_count();
    utilization_before = fs->oram().utilization();
    logout(*fs, key, kDefaultPadSize);
  }
  auto fs = login(backend, key);
  EXPECT_EQ(fs->tables(), tables_before);
  EXPECT_EQ(fs->oram().bucket_count(), buckets_before);
  EXPECT_DOUBLE_EQ(fs->oram().utilization(), utilization_before);
  EXPECT_TRUE(testing::check_oram(fs->oram(), key).empty());
  for (const auto& [name, data] : files) EXPECT_EQ(fs->read_file(name), data) << name;

  // The restored store keeps working.
  fs->write_file("after", Bytes(3000, 9));
  EXPECT_EQ(fs->read_file("after"), Bytes(3000, 9));
}

TEST(Session, LoginWithoutCheckpointIsNotFound) {
  MemoryBackend backend;
  EXPECT_EQ(error_code_of([&] { login(backend, fixed_key()); }), Errc::not_found);
}

TEST(Session, WrongKeyIsCorrupt) {
  MemoryBackend backend;
  auto fs = make_fs(backend, fixed_key(1));
  populate(*fs, 5, 3);
  logout(*fs, fixed_key(1), kSmallPad);
  EXPECT_EQ(error_code_of([&] { login(backend, fixed_key(2)); }), Errc::corrupt_checkpoint);
}

TEST(Session, DamagedBodyIsCorrupt) {
  MemoryBackend backend;
  const auto key = fixed_key();
  auto fs = make_fs(backend, key);
  populate(*fs, 6, 3);
  Bytes sealed = seal_checkpoint(*fs, key, kSmallPad);
  // Flip a byte in the zero padding.
  sealed[sealed.size() - 10] ^= 0x01;
  EXPECT_EQ(error_code_of([&] { open_checkpoint(sealed, key, backend); }), Errc::corrupt_checkpoint);
  EXPECT_EQ(error_code_of([&] { open_checkpoint(Bytes(8, 0), key, backend); }), Errc::corrupt_checkpoint);
}

TEST(Session, OtherVersionIsUnsupported) {
  MemoryBackend backend;
  const auto key = fixed_key();
  auto fs = make_fs(backend, key);
  Bytes body = encode_checkpoint(*fs);
  body[5] = 2;
  body.resize(kSmallPad, 0);
  const Bytes sealed = seal(body, key);
  EXPECT_EQ(error_code_of([&] { open_checkpoint(sealed, key, backend); }), Errc::unsupported_version);
}

TEST(Session, StashSurvivesCheckpoint) {
  MemoryBackend backend;
  const auto key = fixed_key();
  OramConfig config = small_config();
  // Stash-heavy state: many blocks squeezed into a tiny tree.
  PathOram::ClientState state{1, {}, {}};
  for (BlockId id = 0; id < 20; ++id) {
    state.positions[id] = 0;
    state.stash[id] = Bytes(config.segment_size, static_cast<std::uint8_t>(id));
  }
  backend.put_bucket({0}, seal(Bytes(config.bucket_plaintext_size(), 0xFF), key));
  auto oram = PathOram::restore(config, backend, key, state);
  UfsOptions opts;
  opts.auto_resize = false;
  FileSystem fs(std::move(oram), opts);
  const auto stash_before = fs.oram().stash();
  auto restored = open_checkpoint(seal_checkpoint(fs, key, kSmallPad), key, backend);
  EXPECT_EQ(restored->oram().stash(), stash_before);
  EXPECT_EQ(restored->options().auto_resize, false);
}

}  // namespace
}  // namespace oramfs
