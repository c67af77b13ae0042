#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "oramfs/random.hpp"
#include "oramfs/resizer.hpp"
#include "oramfs/types.hpp"
#include "oramfs/ufs.hpp"

namespace oramfs::bench {

// Piecewise-linear file-size CDF. Sampling inverts the CDF, interpolating
// uniformly inside the bin a uniform draw lands in; the first bin starts at
// 0 KB.
class SizeDistribution {
 public:
  struct Point {
    double size_kb;
    double cum_pct;
  };

  explicit SizeDistribution(std::vector<Point> points);

  // Approximates a published file-system size study: most files are at most
  // 64 KB, with a long tail into the megabytes. Identical to the table in
  // data/default_size_distribution.csv.
  static SizeDistribution default_distribution();

  // CSV with rows `size_kb,cum_pct`; a non-numeric first line is a header.
  static SizeDistribution from_csv(std::istream& in);
  static SizeDistribution load(const std::filesystem::path& path);

  // Sampled size in bytes, at least 1.
  std::uint64_t sample_bytes(Rng& rng) const;

  const std::vector<Point>& points() const { return points_; }

 private:
  std::vector<Point> points_;
};

struct BenchRow {
  std::string suite;
  std::string param;
  std::string value;
  std::uint64_t fg_paths = 0;
  std::uint64_t evict_paths = 0;
  std::uint64_t buckets_final = 0;
  std::uint64_t bytes = 0;       // backend bytes moved
  double wall_ms = 0.0;
  double mb_per_s = 0.0;         // user bytes per second, MB = 2^20 bytes
  std::uint64_t user_bytes = 0;  // not part of the CSV

  // Hardware-independent cost: (foreground + eviction paths) per user MB.
  double paths_per_mb() const;
  double bytes_moved_per_mb() const;
};

struct BucketSample {
  std::string op;
  std::uint64_t live_blocks;
  std::uint64_t buckets;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::vector<ResizeReport> resize_events;  // filled by resize_trace
  std::vector<BucketSample> timeline;       // filled by resize_trace

  static constexpr const char* kCsvHeader =
      "suite,param,value,fg_paths,evict_paths,buckets_final,bytes,wall_ms,mb_per_s";
  void write_csv(std::ostream& out) const;
  void append(const BenchReport& other);
};

// Shared settings. The ORAM's rng_seed is replaced by `seed` for every run so
// that path-count columns are reproducible.
struct BenchOptions {
  OramConfig oram;
  UfsOptions ufs;
  SizeDistribution distribution = SizeDistribution::default_distribution();
  std::uint64_t seed = 1;
};

// Writes then reads `n_files` files with sizes drawn from the distribution and
// verifies every byte; throws std::runtime_error on any mismatch. Emits a
// ".write" and a ".read" row.
BenchReport run_distribution_workload(std::size_t n_files, const BenchOptions& options);

BenchReport sweep_segment_size(std::span<const std::uint32_t> segment_bytes, std::size_t n_files,
                               const BenchOptions& options);

BenchReport sweep_group_size(std::span<const std::uint32_t> group_sizes, std::size_t n_files,
                             const BenchOptions& options);

// `n_files` equal-size files with packing off and then on; auto-resize is
// forced on. One row per mode: final bucket count and read-phase throughput.
BenchReport compare_packing(double file_size_kb, std::size_t n_files, const BenchOptions& options);

// Random adds and deletes with file sizes uniform in [min_kb, max_kb]. The
// first operation is an add and a delete only happens while at least two
// files exist. Logs live blocks and bucket count after every operation and
// every triggered resize.
BenchReport resize_trace(std::size_t n_ops, const BenchOptions& options, double min_kb = 1024.0,
                         double max_kb = 4096.0);

// Same workload three ways: plain files in a directory, encrypt-then-write,
// and the full ORAM store on a directory backend under `scratch`. Plain and
// encrypted runs report the best of `repeats`.
BenchReport baseline_compare(std::size_t n_files, const BenchOptions& options,
                             const std::filesystem::path& scratch, int repeats = 3);

}  // namespace oramfs::bench
