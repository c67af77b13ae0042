#include "oramfs/resizer.hpp"

#include "oramfs/error.hpp"

namespace oramfs {

void ResizePolicy::validate() const {
  if (!(0.0 < shrink_threshold && shrink_threshold < target && target < grow_threshold && grow_threshold < 1.0)) {
    throw Error(Errc::invalid_config, "resize policy needs 0 < shrink < target < grow < 1");
  }
}

Resizer::Resizer(ResizePolicy policy) : policy_(policy) { policy_.validate(); }

std::uint64_t Resizer::grow_one(PathOram& oram) {
  const BucketIndex added = oram.bucket_count_;
  const BucketIndex parent = parent_of(added);
  const bool parent_was_leaf = added != 0 && 2 * parent + 1 == added;

  // The new bucket must exist before the position map can point at it.
  oram.store_bucket(added, {});
  oram.bucket_count_++;

  std::uint64_t remapped = 0;
  if (parent_was_leaf) {
    // Only the left child exists yet, so it inherits the parent's blocks.
    // Blocks resident on the old path stay valid: it is a prefix of the new one.
    for (auto& [id, leaf] : oram.positions_) {
      if (leaf == parent) {
        leaf = added;
        ++remapped;
      }
    }
  }
  return remapped;
}

std::uint64_t Resizer::shrink_one(PathOram& oram) {
  if (oram.bucket_count_ <= 1) throw Error(Errc::cannot_shrink_root, "tree is down to its root");
  const BucketIndex removed = oram.bucket_count_ - 1;
  const BucketIndex parent = parent_of(removed);

  oram.load_bucket(removed);
  oram.backend_->delete_bucket({removed});
  oram.bucket_count_--;

  // Truncate paths that ended at the removed bucket. If it was a right
  // child the parent keeps its left child, which is a leaf and shares the
  // surviving prefix; otherwise the parent becomes a leaf itself.
  const BucketIndex replacement = is_leaf(parent, oram.bucket_count_) ? parent : removed - 1;
  std::uint64_t remapped = 0;
  for (auto& [id, leaf] : oram.positions_) {
    if (leaf == removed) {
      leaf = replacement;
      ++remapped;
    }
  }
  oram.relieve_stash_pressure();
  return remapped;
}

ResizeReport Resizer::maybe_resize(PathOram& oram) const {
  ResizeReport report;
  if (oram.utilization() > policy_.grow_threshold) {
    while (oram.utilization() > policy_.target) {
      report.remapped += grow_one(oram);
      report.buckets_added++;
    }
  } else if (oram.utilization() < policy_.shrink_threshold) {
    while (oram.bucket_count() > 1 && oram.utilization() < policy_.target) {
      report.remapped += shrink_one(oram);
      report.buckets_removed++;
    }
  }
  report.utilization_after = oram.utilization();
  return report;
}

}  // namespace oramfs
