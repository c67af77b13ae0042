#include "store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <iterator>

#include "oramfs/error.hpp"
#include "oramfs/random.hpp"
#include "oramfs/session.hpp"

namespace oramfs::cli {
namespace fs = std::filesystem;

namespace {

Bytes read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::storage_error, "cannot read " + p.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_atomic(const fs::path& p, std::span<const std::uint8_t> body) {
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(body.data()), static_cast<std::streamsize>(body.size()));
    if (!out) throw Error(Errc::storage_error, "cannot write " + tmp.string());
  }
  fs::rename(tmp, p);
}

}  // namespace

SecretKey resolve_key(const CliConfig& config, const std::optional<fs::path>& key_file_override) {
  fs::path key_file = key_file_override.value_or(fs::path(config.key_file));
  if (!key_file.empty()) {
    const Bytes raw = read_file(key_file);
    std::string text(raw.begin(), raw.end());
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r' || text.back() == ' ')) text.pop_back();
    const Bytes bytes = from_hex(text);
    if (bytes.size() != SecretKey::kSize) {
      throw Error(Errc::invalid_config, "key file must hold " + std::to_string(2 * SecretKey::kSize) + " hex digits");
    }
    return SecretKey(std::span<const std::uint8_t, SecretKey::kSize>(bytes.data(), SecretKey::kSize));
  }
  const char* pass = std::getenv("ORAMFS_PASSPHRASE");
  if (!pass || !*pass) {
    throw Error(Errc::invalid_config, "no key: set ORAMFS_PASSPHRASE or pass --key-file");
  }
  if (config.kdf_salt.empty()) throw Error(Errc::invalid_config, "config has no kdf_salt");
  return SecretKey::from_passphrase(pass, from_hex(config.kdf_salt), config.kdf_iterations);
}

void Store::init(const fs::path& root, const fs::path& config_path, CliConfig config,
                 const std::optional<fs::path>& key_file) {
  if (fs::exists(config_path)) {
    throw Error(Errc::invalid_config, "store already initialized (" + config_path.string() + " exists)");
  }
  if (key_file) config.key_file = fs::absolute(*key_file).string();
  if (config.key_file.empty() && config.kdf_salt.empty()) {
    Bytes salt(16);
    secure_random_bytes(salt);
    config.kdf_salt = to_hex(salt);
  }
  config.validate();
  const SecretKey key = resolve_key(config, std::nullopt);

  fs::create_directories(root / "local");
  fs::create_directories(config_path.parent_path().empty() ? fs::path(".") : config_path.parent_path());
  DirectoryBackend backend(root / "sync");
  FileSystem store(std::make_unique<PathOram>(config.oram, backend, key), config.ufs);
  write_file_atomic(root / "local" / "state.bin", seal_checkpoint(store, key, config.pad_size));
  config.save(config_path);
}

Store::Store(fs::path root, fs::path config_path, std::optional<fs::path> key_file)
    : root_(std::move(root)), key_file_(std::move(key_file)) {
  if (!fs::exists(config_path)) {
    throw NotReady("store at " + root_.string() + " is not initialized; run `oramfs init` first");
  }
  config_ = CliConfig::load(config_path);
  fs::create_directories(root_ / "local");
  lock_fd_ = ::open((root_ / "lock").c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0600);
  if (lock_fd_ < 0) throw Error(Errc::storage_error, "cannot open lock file");
  if (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(lock_fd_);
    lock_fd_ = -1;
    throw Error(Errc::storage_error, "store is in use by another oramfs process");
  }
  backend_ = std::make_unique<DirectoryBackend>(root_ / "sync");
}

Store::~Store() {
  fs_.reset();
  if (lock_fd_ >= 0) {
    ::flock(lock_fd_, LOCK_UN);
    ::close(lock_fd_);
  }
}

const SecretKey& Store::key() {
  if (!key_) key_ = resolve_key(config_, key_file_);
  return *key_;
}

bool Store::logged_in() const { return fs::exists(state_path()); }

FileSystem& Store::fs() {
  if (fs_) return *fs_;
  if (!logged_in()) throw NotReady("not logged in on this machine; run `oramfs login`");
  fs_ = open_checkpoint(read_file(state_path()), key(), *backend_);
  return *fs_;
}

void Store::write_local_state(std::span<const std::uint8_t> sealed) { write_file_atomic(state_path(), sealed); }

Store::Counters Store::counters() const {
  Counters c;
  std::ifstream in(counters_path());
  if (in) in >> c.foreground_paths >> c.eviction_paths;
  if (fs_) {
    c.foreground_paths += fs_->oram().stats().foreground_paths;
    c.eviction_paths += fs_->oram().stats().eviction_paths;
  }
  return c;
}

void Store::save() {
  if (!fs_) return;
  write_local_state(seal_checkpoint(*fs_, key(), config_.pad_size));
  const Counters c = counters();
  std::ofstream out(counters_path(), std::ios::trunc);
  out << c.foreground_paths << ' ' << c.eviction_paths << '\n';
  fs_->oram().reset_stats();
}

void Store::login() {
  if (logged_in()) throw Error(Errc::invalid_config, "already logged in on this machine");
  fs_ = oramfs::login(*backend_, key());
  save();
}

void Store::logout() {
  FileSystem& store = fs();
  save();
  oramfs::logout(store, key(), config_.pad_size);
  fs_.reset();
  fs::remove(state_path());
}

}  // namespace oramfs::cli
