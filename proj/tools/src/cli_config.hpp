#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "oramfs/session.hpp"
#include "oramfs/types.hpp"
#include "oramfs/ufs.hpp"

namespace oramfs::cli {

// Everything `init` fixes for a store. Stored as flat `key = value` text;
// never holds key material (the salt is public).
struct CliConfig {
  OramConfig oram;
  UfsOptions ufs;
  std::size_t pad_size = kDefaultPadSize;
  std::string kdf_salt;  // hex
  std::uint32_t kdf_iterations = 200000;
  std::string key_file;  // optional; otherwise ORAMFS_PASSPHRASE

  // Unknown keys and malformed values throw Error(invalid_config).
  static CliConfig parse(std::istream& in);
  static CliConfig load(const std::filesystem::path& path);
  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;

  void validate() const;
};

std::string to_hex(std::span<const std::uint8_t> bytes);
Bytes from_hex(std::string_view hex);

}  // namespace oramfs::cli
