#include "oramfs/error.hpp"

namespace oramfs {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_config: return "invalid-config";
    case Errc::invalid_leaf: return "invalid-leaf";
    case Errc::not_a_leaf: return "not-a-leaf";
    case Errc::not_found: return "not-found";
    case Errc::stash_overflow: return "stash-overflow";
    case Errc::grouping_violated: return "grouping-violated";
    case Errc::malformed_envelope: return "malformed-envelope";
    case Errc::storage_error: return "storage-error";
    case Errc::missing_object: return "missing-object";
    case Errc::invalid_name: return "invalid-name";
    case Errc::cannot_shrink_root: return "cannot-shrink-root";
    case Errc::checkpoint_overflow: return "checkpoint-overflow";
    case Errc::corrupt_checkpoint: return "corrupt-checkpoint";
    case Errc::unsupported_version: return "unsupported-version";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace oramfs
