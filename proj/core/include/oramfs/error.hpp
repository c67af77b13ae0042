#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace oramfs {

enum class Errc {
  invalid_config,
  invalid_leaf,
  not_a_leaf,
  not_found,
  stash_overflow,
  grouping_violated,
  malformed_envelope,
  storage_error,
  missing_object,
  invalid_name,
  cannot_shrink_root,
  checkpoint_overflow,
  corrupt_checkpoint,
  unsupported_version,
};

std::string_view to_string(Errc code) noexcept;

// All library failures are reported as oramfs::Error carrying a stable code.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace oramfs
