#include <gtest/gtest.h>

#include <unistd.h>

#include <filesystem>
#include <functional>
#include <memory>
#include <set>

#include "oramfs/backend.hpp"
#include "oramfs/error.hpp"
#include "oramfs/path_oram.hpp"
#include "oramfs/resizer.hpp"
#include "support/test_util.hpp"

namespace fs = std::filesystem;

namespace oramfs {
namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected oramfs::Error";
  return Errc::invalid_config;
}

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("oramfs_backend_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  return dir;
}

class BackendContract : public ::testing::TestWithParam<std::string> {
 protected:
  void SetUp() override {
    if (GetParam() == "memory") {
      backend_ = std::make_unique<MemoryBackend>();
    } else {
      dir_ = scratch_dir(::testing::UnitTest::GetInstance()->current_test_info()->name());
      backend_ = std::make_unique<DirectoryBackend>(dir_);
    }
  }
  void TearDown() override {
    backend_.reset();
    if (!dir_.empty()) fs::remove_all(dir_);
  }

  std::unique_ptr<Backend> backend_;
  fs::path dir_;
};

TEST_P(BackendContract, PutGetOverwrite) {
  backend_->put_bucket({3}, Bytes{1, 2, 3});
  EXPECT_EQ(backend_->get_bucket({3}), (Bytes{1, 2, 3}));
  backend_->put_bucket({3}, Bytes{9});
  EXPECT_EQ(backend_->get_bucket({3}), (Bytes{9}));
  EXPECT_EQ(code_of([&] { backend_->get_bucket({4}); }), Errc::missing_object);
}

TEST_P(BackendContract, Delete) {
  backend_->put_bucket({7}, Bytes{7});
  backend_->delete_bucket({7});
  EXPECT_EQ(code_of([&] { backend_->get_bucket({7}); }), Errc::missing_object);
  EXPECT_EQ(code_of([&] { backend_->delete_bucket({8}); }), Errc::missing_object);
  backend_->put_bucket({7}, Bytes{8});
  EXPECT_EQ(backend_->get_bucket({7}), (Bytes{8}));
}

TEST_P(BackendContract, NamedObjects) {
  EXPECT_EQ(code_of([&] { backend_->get_named("checkpoint"); }), Errc::missing_object);
  backend_->put_named("checkpoint", Bytes{4, 5});
  EXPECT_EQ(backend_->get_named("checkpoint"), (Bytes{4, 5}));
  EXPECT_EQ(code_of([&] { backend_->put_named("evil", Bytes{1}); }), Errc::invalid_name);
  EXPECT_EQ(code_of([&] { backend_->get_named("../checkpoint"); }), Errc::invalid_name);
}

TEST_P(BackendContract, EmptyBodies) {
  backend_->put_bucket({0}, Bytes{});
  EXPECT_TRUE(backend_->get_bucket({0}).empty());
}

INSTANTIATE_TEST_SUITE_P(Backends, BackendContract, ::testing::Values("memory", "directory"));

TEST(DirectoryBackend, LayoutHasOnlyBucketsAndNamedObjects) {
  const auto dir = scratch_dir("layout");
  {
    DirectoryBackend backend(dir);
    OramConfig config = testing::small_config();
    PathOram oram(config, backend, testing::fixed_key(), 1);
    for (BlockId id = 0; id < 40; ++id) {
      oram.write(id, Bytes{1});
      Resizer().maybe_resize(oram);
    }
    for (BlockId id = 0; id < 30; ++id) {
      oram.remove(id);
      Resizer().maybe_resize(oram);
    }
    backend.put_named("checkpoint", Bytes{1});

    std::set<std::string> expected{"checkpoint.oram"};
    for (std::uint64_t i = 0; i < oram.bucket_count(); ++i) expected.insert("bucket_" + std::to_string(i) + ".bin");
    std::set<std::string> actual;
    for (const auto& entry : fs::directory_iterator(dir)) actual.insert(entry.path().filename().string());
    EXPECT_EQ(actual, expected);
  }
  fs::remove_all(dir);
}

}  // namespace
}  // namespace oramfs
