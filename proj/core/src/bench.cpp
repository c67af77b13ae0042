#include "oramfs/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "oramfs/backend.hpp"
#include "oramfs/crypto.hpp"
#include "oramfs/error.hpp"
#include "oramfs/path_oram.hpp"

namespace oramfs::bench {
namespace {

constexpr double kMiB = 1024.0 * 1024.0;

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double throughput(std::uint64_t user_bytes, double wall_ms) {
  if (user_bytes == 0 || wall_ms <= 0.0) return 0.0;
  return (static_cast<double>(user_bytes) / kMiB) / (wall_ms / 1000.0);
}

// File contents are a pure function of (seed, index) so verification never
// has to keep every file in memory.
Bytes file_contents(std::uint64_t seed, std::size_t index, std::uint64_t size) {
  Rng rng(seed * 0x9E3779B97F4A7C15ull + index + 1);
  Bytes out(size);
  std::size_t i = 0;
  for (; i + 8 <= size; i += 8) {
    std::uint64_t v = rng.next_u64();
    std::memcpy(out.data() + i, &v, 8);
  }
  if (i < size) {
    std::uint64_t v = rng.next_u64();
    std::memcpy(out.data() + i, &v, size - i);
  }
  return out;
}

std::vector<std::uint64_t> sample_sizes(std::size_t n, const BenchOptions& options) {
  Rng rng(options.seed);
  std::vector<std::uint64_t> sizes(n);
  for (auto& s : sizes) s = options.distribution.sample_bytes(rng);
  return sizes;
}

struct Phase {
  OramStats stats;
  double wall_ms = 0.0;
  std::uint64_t user_bytes = 0;
};

struct WorkloadResult {
  Phase write;
  Phase read;
  std::uint64_t buckets_final = 0;
};

std::string file_name(std::size_t i) { return "file_" + std::to_string(i); }

WorkloadResult run_files(std::span<const std::uint64_t> sizes, const BenchOptions& options, OramConfig config,
                         UfsOptions ufs) {
  config.rng_seed = options.seed;
  MemoryBackend backend;
  FileSystem fs(std::make_unique<PathOram>(config, backend, SecretKey::random()), ufs);

  WorkloadResult result;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    Bytes data = file_contents(options.seed, i, sizes[i]);
    auto start = Clock::now();
    fs.write_file(file_name(i), data);
    result.write.wall_ms += ms_since(start);
    result.write.user_bytes += sizes[i];
  }
  result.write.stats = fs.oram().stats();
  result.buckets_final = fs.oram().bucket_count();

  fs.oram().reset_stats();
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    auto start = Clock::now();
    Bytes got = fs.read_file(file_name(i));
    result.read.wall_ms += ms_since(start);
    result.read.user_bytes += got.size();
    if (got != file_contents(options.seed, i, sizes[i])) {
      throw std::runtime_error("read-back mismatch for " + file_name(i));
    }
  }
  result.read.stats = fs.oram().stats();
  return result;
}

BenchRow make_row(std::string suite, std::string param, std::string value, const Phase& phase,
                  std::uint64_t buckets) {
  BenchRow row;
  row.suite = std::move(suite);
  row.param = std::move(param);
  row.value = std::move(value);
  row.fg_paths = phase.stats.foreground_paths;
  row.evict_paths = phase.stats.eviction_paths;
  row.buckets_final = buckets;
  row.bytes = phase.stats.bytes_moved();
  row.wall_ms = phase.wall_ms;
  row.user_bytes = phase.user_bytes;
  row.mb_per_s = throughput(phase.user_bytes, phase.wall_ms);
  return row;
}

void add_phase_rows(BenchReport& report, const std::string& suite, const std::string& param,
                    const std::string& value, const WorkloadResult& r) {
  report.rows.push_back(make_row(suite + ".write", param, value, r.write, r.buckets_final));
  report.rows.push_back(make_row(suite + ".read", param, value, r.read, r.buckets_final));
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

}  // namespace

// ---- SizeDistribution --------------------------------------------------------

SizeDistribution::SizeDistribution(std::vector<Point> points) : points_(std::move(points)) {
  if (points_.empty()) throw Error(Errc::invalid_config, "size distribution has no points");
  double prev_size = 0.0;
  double prev_pct = 0.0;
  for (const Point& p : points_) {
    if (!(p.size_kb > prev_size)) throw Error(Errc::invalid_config, "sizes must be strictly increasing");
    if (!(p.cum_pct > prev_pct)) throw Error(Errc::invalid_config, "cumulative percentages must be strictly increasing");
    prev_size = p.size_kb;
    prev_pct = p.cum_pct;
  }
  if (std::abs(points_.back().cum_pct - 100.0) > 1e-9) {
    throw Error(Errc::invalid_config, "cumulative percentage must end at 100");
  }
}

SizeDistribution SizeDistribution::default_distribution() {
  return SizeDistribution({{1, 22},    {2, 31},    {4, 42},     {8, 53},      {16, 63},
                           {32, 72},   {64, 80},   {128, 86},   {256, 91},    {512, 95},
                           {1024, 97.5}, {4096, 99.5}, {16384, 100}});
}

SizeDistribution SizeDistribution::from_csv(std::istream& in) {
  std::vector<Point> points;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string size_field;
    std::string pct_field;
    if (!std::getline(row, size_field, ',') || !std::getline(row, pct_field)) {
      throw Error(Errc::invalid_config, "distribution row needs two fields: " + line);
    }
    try {
      double size = std::stod(size_field);
      double pct = std::stod(pct_field);
      points.push_back({size, pct});
    } catch (const std::logic_error&) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw Error(Errc::invalid_config, "non-numeric distribution row: " + line);
    }
    first = false;
  }
  return SizeDistribution(std::move(points));
}

SizeDistribution SizeDistribution::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::invalid_config, "cannot open distribution file " + path.string());
  return from_csv(in);
}

std::uint64_t SizeDistribution::sample_bytes(Rng& rng) const {
  // 53-bit uniform in [0, 100).
  const double u = static_cast<double>(rng.next_u64() >> 11) * (1.0 / 9007199254740992.0) * 100.0;
  double lo_size = 0.0;
  double lo_pct = 0.0;
  for (const Point& p : points_) {
    if (u < p.cum_pct) {
      const double frac = (u - lo_pct) / (p.cum_pct - lo_pct);
      const double kb = lo_size + frac * (p.size_kb - lo_size);
      return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(kb * 1024.0)));
    }
    lo_size = p.size_kb;
    lo_pct = p.cum_pct;
  }
  return static_cast<std::uint64_t>(std::llround(points_.back().size_kb * 1024.0));
}

// ---- report ------------------------------------------------------------------

double BenchRow::paths_per_mb() const {
  if (user_bytes == 0) return 0.0;
  return static_cast<double>(fg_paths + evict_paths) / (static_cast<double>(user_bytes) / kMiB);
}

double BenchRow::bytes_moved_per_mb() const {
  if (user_bytes == 0) return 0.0;
  return static_cast<double>(bytes) / (static_cast<double>(user_bytes) / kMiB);
}

void BenchReport::write_csv(std::ostream& out) const {
  out << kCsvHeader << '\n';
  for (const BenchRow& r : rows) {
    out << r.suite << ',' << r.param << ',' << r.value << ',' << r.fg_paths << ',' << r.evict_paths << ','
        << r.buckets_final << ',' << r.bytes << ',' << format_double(r.wall_ms) << ','
        << format_double(r.mb_per_s) << '\n';
  }
}

void BenchReport::append(const BenchReport& other) {
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
  resize_events.insert(resize_events.end(), other.resize_events.begin(), other.resize_events.end());
  timeline.insert(timeline.end(), other.timeline.begin(), other.timeline.end());
}

// ---- suites ------------------------------------------------------------------

BenchReport run_distribution_workload(std::size_t n_files, const BenchOptions& options) {
  BenchReport report;
  if (n_files == 0) return report;
  const auto sizes = sample_sizes(n_files, options);
  add_phase_rows(report, "distribution", "n_files", std::to_string(n_files),
                 run_files(sizes, options, options.oram, options.ufs));
  return report;
}

BenchReport sweep_segment_size(std::span<const std::uint32_t> segment_bytes, std::size_t n_files,
                               const BenchOptions& options) {
  BenchReport report;
  const auto sizes = sample_sizes(n_files, options);
  for (std::uint32_t seg : segment_bytes) {
    OramConfig config = options.oram;
    config.segment_size = seg;
    add_phase_rows(report, "segment_size", "segment_bytes", std::to_string(seg),
                   run_files(sizes, options, config, options.ufs));
  }
  return report;
}

BenchReport sweep_group_size(std::span<const std::uint32_t> group_sizes, std::size_t n_files,
                             const BenchOptions& options) {
  BenchReport report;
  const auto sizes = sample_sizes(n_files, options);
  for (std::uint32_t n : group_sizes) {
    OramConfig config = options.oram;
    config.group_size = n;
    add_phase_rows(report, "group_size", "group_size", std::to_string(n),
                   run_files(sizes, options, config, options.ufs));
  }
  return report;
}

BenchReport compare_packing(double file_size_kb, std::size_t n_files, const BenchOptions& options) {
  BenchReport report;
  const std::vector<std::uint64_t> sizes(n_files, static_cast<std::uint64_t>(std::llround(file_size_kb * 1024.0)));
  for (bool packing : {false, true}) {
    UfsOptions ufs = options.ufs;
    ufs.packing = packing;
    ufs.auto_resize = true;
    WorkloadResult r = run_files(sizes, options, options.oram, ufs);
    BenchRow row = make_row("packing", "packing@" + format_double(file_size_kb) + "KB", packing ? "on" : "off",
                            r.read, r.buckets_final);
    report.rows.push_back(row);
  }
  return report;
}

BenchReport resize_trace(std::size_t n_ops, const BenchOptions& options, double min_kb, double max_kb) {
  if (!(min_kb > 0.0 && max_kb >= min_kb)) throw std::invalid_argument("bad resize trace size range");
  BenchReport report;
  OramConfig config = options.oram;
  config.rng_seed = options.seed;
  UfsOptions ufs = options.ufs;
  ufs.auto_resize = true;

  MemoryBackend backend;
  FileSystem fs(std::make_unique<PathOram>(config, backend, SecretKey::random()), ufs);
  fs.set_resize_observer([&](const ResizeReport& r) { report.resize_events.push_back(r); });

  Rng rng(options.seed ^ 0x5DEECE66Dull);
  const auto lo = static_cast<std::uint64_t>(min_kb * 1024.0);
  const auto hi = static_cast<std::uint64_t>(max_kb * 1024.0);
  std::vector<std::string> live;
  std::size_t next_name = 0;

  for (std::size_t op = 0; op < n_ops; ++op) {
    const bool remove = live.size() >= 2 && rng.uniform(2) == 1;
    fs.oram().reset_stats();
    auto start = Clock::now();
    std::string kind;
    std::uint64_t user = 0;
    if (remove) {
      const std::size_t victim = rng.uniform(live.size());
      fs.delete_file(live[victim]);
      live.erase(live.begin() + static_cast<std::ptrdiff_t>(victim));
      kind = "delete";
    } else {
      const std::uint64_t size = lo + rng.uniform(hi - lo + 1);
      const std::string name = file_name(next_name);
      fs.write_file(name, file_contents(options.seed, next_name, size));
      ++next_name;
      live.push_back(name);
      kind = "add";
      user = size;
    }
    Phase phase{fs.oram().stats(), ms_since(start), user};
    report.rows.push_back(make_row("resize_trace", kind, std::to_string(fs.oram().live_blocks()), phase,
                                   fs.oram().bucket_count()));
    report.timeline.push_back({kind, fs.oram().live_blocks(), fs.oram().bucket_count()});
  }
  return report;
}

BenchReport baseline_compare(std::size_t n_files, const BenchOptions& options,
                             const std::filesystem::path& scratch, int repeats) {
  namespace fs = std::filesystem;
  BenchReport report;
  const auto sizes = sample_sizes(n_files, options);
  std::vector<Bytes> contents;
  contents.reserve(n_files);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < n_files; ++i) {
    contents.push_back(file_contents(options.seed, i, sizes[i]));
    total += sizes[i];
  }

  auto write_raw = [](const fs::path& p, std::span<const std::uint8_t> b) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
    if (!out) throw Error(Errc::storage_error, "cannot write " + p.string());
  };
  auto read_raw = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  };
  auto best_of = [&](const fs::path& dir, auto&& body) {
    double best = 0.0;
    for (int rep = 0; rep < std::max(1, repeats); ++rep) {
      fs::remove_all(dir);
      fs::create_directories(dir);
      auto start = Clock::now();
      body(dir);
      double ms = ms_since(start);
      if (rep == 0 || ms < best) best = ms;
    }
    fs::remove_all(dir);
    return best;
  };
  auto row = [&](const std::string& mode, double ms, OramStats stats, std::uint64_t buckets) {
    Phase phase{stats, ms, 2 * total};
    report.rows.push_back(make_row("baseline", "mode", mode, phase, buckets));
  };

  const double plain_ms = best_of(scratch / "plain", [&](const fs::path& dir) {
    for (std::size_t i = 0; i < n_files; ++i) write_raw(dir / file_name(i), contents[i]);
    for (std::size_t i = 0; i < n_files; ++i) {
      if (read_raw(dir / file_name(i)) != contents[i]) throw std::runtime_error("plain read-back mismatch");
    }
  });
  row("plain", plain_ms, {}, 0);

  const SecretKey key = SecretKey::random();
  const double enc_ms = best_of(scratch / "encrypted", [&](const fs::path& dir) {
    for (std::size_t i = 0; i < n_files; ++i) write_raw(dir / file_name(i), seal(contents[i], key));
    for (std::size_t i = 0; i < n_files; ++i) {
      if (open(read_raw(dir / file_name(i)), key) != contents[i]) {
        throw std::runtime_error("encrypted read-back mismatch");
      }
    }
  });
  row("encrypted", enc_ms, {}, 0);

  const fs::path oram_dir = scratch / "oram";
  fs::remove_all(oram_dir);
  OramStats oram_stats;
  std::uint64_t buckets = 0;
  double oram_ms = 0.0;
  {
    OramConfig config = options.oram;
    config.rng_seed = options.seed;
    DirectoryBackend backend(oram_dir);
    auto start = Clock::now();
    FileSystem store(std::make_unique<PathOram>(config, backend, key), options.ufs);
    for (std::size_t i = 0; i < n_files; ++i) store.write_file(file_name(i), contents[i]);
    for (std::size_t i = 0; i < n_files; ++i) {
      if (store.read_file(file_name(i)) != contents[i]) throw std::runtime_error("ORAM read-back mismatch");
    }
    oram_ms = ms_since(start);
    oram_stats = store.oram().stats();
    buckets = store.oram().bucket_count();
  }
  fs::remove_all(oram_dir);
  row("oram", oram_ms, oram_stats, buckets);
  return report;
}

}  // namespace oramfs::bench
