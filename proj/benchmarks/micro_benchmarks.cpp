#include <benchmark/benchmark.h>

#include "oramfs/crypto.hpp"
#include "oramfs/path_oram.hpp"
#include "oramfs/ufs.hpp"

namespace {

using namespace oramfs;

OramConfig bench_config(std::uint32_t segment) {
  OramConfig c;
  c.segment_size = segment;
  c.rng_seed = 1;
  return c;
}

// One read per iteration on a tree of state.range(0) buckets, half full.
void BM_AccessByTreeSize(benchmark::State& state) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  MemoryBackend backend;
  PathOram oram(bench_config(4096), backend, SecretKey::random(), n);
  const BlockId live = n * 3 / 2;
  const Bytes payload(4096, 7);
  for (BlockId id = 0; id < live; ++id) oram.write(id, payload);
  BlockId next = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(oram.read(next));
    next = (next + 1) % live;
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * 4096);
  state.counters["paths"] = static_cast<double>(oram.stats().foreground_paths + oram.stats().eviction_paths);
}
BENCHMARK(BM_AccessByTreeSize)->RangeMultiplier(4)->Range(16, 4096);

void BM_SealBucket(benchmark::State& state) {
  const auto segment = static_cast<std::size_t>(state.range(0));
  const Bytes bucket(3 * (kBlockHeaderSize + segment), 0);
  const auto key = SecretKey::random();
  for (auto _ : state) benchmark::DoNotOptimize(seal(bucket, key));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * bucket.size()));
}
BENCHMARK(BM_SealBucket)->Arg(4096)->Arg(65536)->Arg(1 << 20);

// Reads a 24-segment file; fewer, larger groups mean fewer paths.
void BM_ReadFileByGroupSize(benchmark::State& state) {
  OramConfig config = bench_config(4096);
  config.group_size = static_cast<std::uint32_t>(state.range(0));
  MemoryBackend backend;
  FileSystem fs(std::make_unique<PathOram>(config, backend, SecretKey::random()), UfsOptions{});
  const Bytes data(24 * 4096, 1);
  fs.write_file("f", data);
  fs.oram().reset_stats();
  for (auto _ : state) benchmark::DoNotOptimize(fs.read_file("f"));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * data.size()));
  state.counters["paths_per_read"] =
      static_cast<double>(fs.oram().stats().foreground_paths) / static_cast<double>(state.iterations());
}
BENCHMARK(BM_ReadFileByGroupSize)->Arg(1)->Arg(2)->Arg(3)->Arg(6)->Arg(12);

}  // namespace

BENCHMARK_MAIN();
