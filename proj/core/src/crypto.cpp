#include "oramfs/crypto.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <memory>
#include <string>

#include "oramfs/error.hpp"
#include "oramfs/random.hpp"

namespace oramfs {
namespace {

struct CtxDeleter {
  void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};

// CTR mode is its own inverse, so one routine serves both directions.
void aes128_ctr(const SecretKey& key, const std::uint8_t* iv, std::span<const std::uint8_t> in,
                std::uint8_t* out) {
  std::unique_ptr<EVP_CIPHER_CTX, CtxDeleter> ctx(EVP_CIPHER_CTX_new());
  if (!ctx || EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_ctr(), nullptr, key.bytes().data(), iv) != 1) {
    throw Error(Errc::storage_error, "cipher initialisation failed");
  }
  constexpr std::size_t kChunk = 1u << 30;
  for (std::size_t off = 0; off < in.size(); off += kChunk) {
    int n = static_cast<int>(std::min(kChunk, in.size() - off));
    int written = 0;
    if (EVP_EncryptUpdate(ctx.get(), out + off, &written, in.data() + off, n) != 1 || written != n) {
      throw Error(Errc::storage_error, "cipher update failed");
    }
  }
}

}  // namespace

SecretKey::SecretKey(std::span<const std::uint8_t, kSize> bytes) {
  std::copy(bytes.begin(), bytes.end(), bytes_.begin());
}

SecretKey SecretKey::random() {
  std::array<std::uint8_t, kSize> b{};
  secure_random_bytes(b);
  return SecretKey(b);
}

SecretKey SecretKey::from_passphrase(std::string_view passphrase, std::span<const std::uint8_t> salt,
                                     std::uint32_t iterations) {
  std::array<std::uint8_t, kSize> b{};
  if (PKCS5_PBKDF2_HMAC(passphrase.data(), static_cast<int>(passphrase.size()), salt.data(),
                        static_cast<int>(salt.size()), static_cast<int>(iterations), EVP_sha256(),
                        static_cast<int>(b.size()), b.data()) != 1) {
    throw Error(Errc::invalid_config, "key derivation failed");
  }
  return SecretKey(b);
}

void seal_into(std::span<const std::uint8_t> plaintext, const SecretKey& key,
               std::span<std::uint8_t> out) {
  if (out.size() != sealed_size(plaintext.size())) {
    throw Error(Errc::malformed_envelope, "output buffer has wrong size");
  }
  secure_random_bytes(out.first(kNonceSize));
  aes128_ctr(key, out.data(), plaintext, out.data() + kNonceSize);
}

void open_into(std::span<const std::uint8_t> envelope, const SecretKey& key,
               std::span<std::uint8_t> out) {
  if (envelope.size() < kNonceSize) {
    throw Error(Errc::malformed_envelope,
                "envelope of " + std::to_string(envelope.size()) + " bytes is shorter than its nonce");
  }
  if (out.size() != envelope.size() - kNonceSize) {
    throw Error(Errc::malformed_envelope, "output buffer has wrong size");
  }
  aes128_ctr(key, envelope.data(), envelope.subspan(kNonceSize), out.data());
}

Bytes seal(std::span<const std::uint8_t> plaintext, const SecretKey& key) {
  Bytes out(sealed_size(plaintext.size()));
  seal_into(plaintext, key, out);
  return out;
}

Bytes open(std::span<const std::uint8_t> envelope, const SecretKey& key) {
  if (envelope.size() < kNonceSize) {
    throw Error(Errc::malformed_envelope,
                "envelope of " + std::to_string(envelope.size()) + " bytes is shorter than its nonce");
  }
  Bytes out(envelope.size() - kNonceSize);
  open_into(envelope, key, out);
  return out;
}

}  // namespace oramfs
