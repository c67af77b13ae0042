#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

#include "oramfs/types.hpp"

namespace oramfs {

// Symmetric AES-128 key. Immutable after construction and never handed to a
// storage backend.
class SecretKey {
 public:
  static constexpr std::size_t kSize = 16;

  explicit SecretKey(std::span<const std::uint8_t, kSize> bytes);

  static SecretKey random();
  // PBKDF2-HMAC-SHA256 over the passphrase with a caller-stored salt.
  static SecretKey from_passphrase(std::string_view passphrase, std::span<const std::uint8_t> salt,
                                   std::uint32_t iterations = 200000);

  std::span<const std::uint8_t, kSize> bytes() const { return bytes_; }

  friend bool operator==(const SecretKey&, const SecretKey&) = default;

 private:
  std::array<std::uint8_t, kSize> bytes_;
};

// Envelope wire format: bytes [0, 16) nonce, bytes [16, ...) AES-128-CTR
// ciphertext of the same length as the plaintext. There is no authentication
// tag: decrypting with the wrong key or tampered input yields garbage rather
// than an error, so callers validate structure downstream.
inline constexpr std::size_t kNonceSize = 16;
inline constexpr std::size_t kEnvelopeOverhead = kNonceSize;

inline constexpr std::size_t sealed_size(std::size_t plaintext_size) {
  return kEnvelopeOverhead + plaintext_size;
}

// Encrypts under a fresh random nonce.
Bytes seal(std::span<const std::uint8_t> plaintext, const SecretKey& key);

// Throws Error(malformed_envelope) when the input is shorter than the nonce.
Bytes open(std::span<const std::uint8_t> envelope, const SecretKey& key);

// In-place variants used on the hot path; `out` must be sized by the caller.
void seal_into(std::span<const std::uint8_t> plaintext, const SecretKey& key,
               std::span<std::uint8_t> out);
void open_into(std::span<const std::uint8_t> envelope, const SecretKey& key,
               std::span<std::uint8_t> out);

}  // namespace oramfs
