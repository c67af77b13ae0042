#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>

#include "oramfs/backend.hpp"
#include "oramfs/crypto.hpp"
#include "oramfs/ufs.hpp"

namespace oramfs {

// Checkpoint body layout before sealing (all integers big-endian):
//   u32 magic 0x4F52414D ("ORAM"), u16 version,
//   then seven sections, each a u32 byte length followed by its contents:
//   config, position map, stash, file table, pack table, free-space table,
//   counters. The body is zero-padded to pad_size and sealed, so every
//   checkpoint has length pad_size + 16 regardless of state.
inline constexpr std::uint32_t kCheckpointMagic = 0x4F52414D;
inline constexpr std::uint16_t kCheckpointVersion = 1;
inline constexpr std::size_t kDefaultPadSize = std::size_t{4} << 20;

// Plain encoding without padding or sealing.
Bytes encode_checkpoint(const FileSystem& fs);

// Pads and seals. Throws checkpoint_overflow if the body exceeds pad_size.
Bytes seal_checkpoint(const FileSystem& fs, const SecretKey& key, std::size_t pad_size = kDefaultPadSize);

// Rebuilds the store on top of `backend`, which must hold the matching tree.
// Wrong keys and damaged input raise corrupt_checkpoint; a well-formed body
// from another format version raises unsupported_version.
std::unique_ptr<FileSystem> open_checkpoint(std::span<const std::uint8_t> sealed, const SecretKey& key,
                                            Backend& backend);

// Writes the sealed checkpoint as the backend's "checkpoint" object. The
// caller may then drop its local state.
void logout(const FileSystem& fs, const SecretKey& key, std::size_t pad_size = kDefaultPadSize);

// Downloads the checkpoint from the backend and restores the store. Throws
// not_found when no checkpoint was ever written.
std::unique_ptr<FileSystem> login(Backend& backend, const SecretKey& key);

}  // namespace oramfs
