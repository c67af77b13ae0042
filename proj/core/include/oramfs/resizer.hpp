#pragma once

#include <cstdint>

#include "oramfs/path_oram.hpp"

namespace oramfs {

// Utilization band for automatic resizing. Growth fires above grow_threshold
// and stops at or below target; shrinking fires below shrink_threshold and
// stops at or above target.
struct ResizePolicy {
  double shrink_threshold = 0.45;
  double target = 0.50;
  double grow_threshold = 0.55;

  // Requires 0 < shrink < target < grow < 1.
  void validate() const;
};

struct ResizeReport {
  std::uint64_t buckets_added = 0;
  std::uint64_t buckets_removed = 0;
  std::uint64_t remapped = 0;          // position-map entries moved to a new leaf
  double utilization_after = 0.0;

  bool triggered() const { return buckets_added != 0 || buckets_removed != 0; }
};

// Grows and shrinks a PathOram one bucket at a time at the leaf end of the
// heap, repairing the position map so every mapped leaf stays childless.
class Resizer {
 public:
  explicit Resizer(ResizePolicy policy = {});

  const ResizePolicy& policy() const { return policy_; }

  ResizeReport maybe_resize(PathOram& oram) const;

  // Appends bucket N. When its parent loses leaf status, every block mapped
  // to the parent moves to the new child. Returns the number remapped.
  static std::uint64_t grow_one(PathOram& oram);

  // Removes bucket N-1, pulling its blocks into the stash and truncating
  // paths that ended there. Throws cannot_shrink_root when N == 1.
  static std::uint64_t shrink_one(PathOram& oram);

 private:
  ResizePolicy policy_;
};

}  // namespace oramfs
