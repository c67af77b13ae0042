#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>

#include "cli_config.hpp"
#include "oramfs/backend.hpp"
#include "oramfs/crypto.hpp"
#include "oramfs/ufs.hpp"

namespace oramfs::cli {

// The store root has not been through `init`, or this machine holds no
// client state (logged out). Maps to exit code 2.
class NotReady : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// On-disk layout under the root:
//   oramfs.conf      configuration (no secrets)
//   sync/            the untrusted folder: bucket objects and the checkpoint
//   local/state.bin  this machine's sealed client state while logged in
//   local/counters   cumulative path counters shown by `stats`
//   lock             held with flock() for the life of the process
class Store {
 public:
  static std::filesystem::path default_config_path(const std::filesystem::path& root) {
    return root / "oramfs.conf";
  }

  Store(std::filesystem::path root, std::filesystem::path config_path,
        std::optional<std::filesystem::path> key_file = std::nullopt);
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  // Creates the layout, a one-bucket tree and a local client state.
  static void init(const std::filesystem::path& root, const std::filesystem::path& config_path, CliConfig config,
                   const std::optional<std::filesystem::path>& key_file);

  const CliConfig& config() const { return config_; }
  bool logged_in() const;

  // Loads the local client state; NotReady when logged out.
  FileSystem& fs();
  // Seals the in-memory state back to local/state.bin and folds this
  // process's path counters into local/counters.
  void save();

  // Pull the checkpoint from sync/ into local state, or push it and drop
  // local state.
  void login();
  void logout();

  struct Counters {
    std::uint64_t foreground_paths = 0;
    std::uint64_t eviction_paths = 0;
  };
  Counters counters() const;

 private:
  std::filesystem::path state_path() const { return root_ / "local" / "state.bin"; }
  std::filesystem::path counters_path() const { return root_ / "local" / "counters"; }
  const SecretKey& key();
  void write_local_state(std::span<const std::uint8_t> sealed);

  std::filesystem::path root_;
  CliConfig config_;
  std::optional<std::filesystem::path> key_file_;
  int lock_fd_ = -1;
  std::optional<SecretKey> key_;
  std::unique_ptr<DirectoryBackend> backend_;
  std::unique_ptr<FileSystem> fs_;
};

// Passphrase from ORAMFS_PASSPHRASE, or a key file holding 32 hex digits
// (the file path wins when both are set).
SecretKey resolve_key(const CliConfig& config, const std::optional<std::filesystem::path>& key_file_override);

}  // namespace oramfs::cli
