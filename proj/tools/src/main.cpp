#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cli_config.hpp"
#include "oramfs/bench.hpp"
#include "oramfs/error.hpp"
#include "store.hpp"

namespace fs = std::filesystem;
using namespace oramfs;

namespace {

// Stable exit codes.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNotReady = 2;
constexpr int kExitNotFound = 3;
constexpr int kExitStorage = 4;

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::not_found:
      return kExitNotFound;
    case Errc::stash_overflow:
    case Errc::storage_error:
    case Errc::missing_object:
    case Errc::malformed_envelope:
      return kExitStorage;
    default:
      return kExitUsage;
  }
}

Bytes slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::not_found, "local file " + p.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void spill(const std::string& dest, const Bytes& data) {
  if (dest == "-") {
    std::fwrite(data.data(), 1, data.size(), stdout);
    return;
  }
  std::ofstream out(dest, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(Errc::storage_error, "cannot write " + dest);
}

struct Globals {
  std::string root = "oramfs-store";
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string key_file;

  fs::path config_path() const {
    return config.empty() ? cli::Store::default_config_path(root) : fs::path(config);
  }
};

struct InitArgs {
  std::uint32_t z = 3;
  std::uint32_t segment_size = 65536;
  std::uint32_t group_size = 3;
  std::uint32_t stash_max = 100;
  std::size_t pad_size = kDefaultPadSize;
  std::uint32_t kdf_iterations = 200000;
  bool no_packing = false;
  bool no_auto_resize = false;
};

struct BenchArgs {
  std::string suite;
  std::size_t files = 200;
  std::string out;
  std::string distribution;
  std::string scratch;
};

int run_bench(const Globals& g, const BenchArgs& a) {
  cli::CliConfig cfg;
  if (fs::exists(g.config_path())) cfg = cli::CliConfig::load(g.config_path());
  bench::BenchOptions opts;
  opts.oram = cfg.oram;
  opts.ufs = cfg.ufs;
  opts.seed = g.seed.value_or(cfg.oram.rng_seed.value_or(1));
  if (!a.distribution.empty()) opts.distribution = bench::SizeDistribution::load(a.distribution);

  bench::BenchReport report;
  const bool all = a.suite == "all";
  if (all || a.suite == "distribution") report.append(bench::run_distribution_workload(a.files, opts));
  if (all || a.suite == "segment") {
    const std::uint32_t segs[] = {4096, 16384, 65536, 262144, 1048576};
    report.append(bench::sweep_segment_size(segs, a.files, opts));
  }
  if (all || a.suite == "group") {
    const std::uint32_t groups[] = {1, 2, 3, 4, 6, 8};
    report.append(bench::sweep_group_size(groups, a.files, opts));
  }
  if (all || a.suite == "packing") {
    for (double kb : {16.0, 32.0, 70.0}) report.append(bench::compare_packing(kb, a.files, opts));
  }
  if (all || a.suite == "resize") report.append(bench::resize_trace(32, opts));
  if (all || a.suite == "baseline") {
    const fs::path scratch = a.scratch.empty() ? fs::temp_directory_path() / "oramfs-baseline" : fs::path(a.scratch);
    report.append(bench::baseline_compare(a.files, opts, scratch));
  }

  if (a.out.empty() || a.out == "-") {
    report.write_csv(std::cout);
  } else {
    std::ofstream out(a.out, std::ios::trunc);
    report.write_csv(out);
    if (!out) throw Error(Errc::storage_error, "cannot write " + a.out);
    std::cerr << "wrote " << report.rows.size() << " rows to " << a.out << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"oramfs: an oblivious file store over an untrusted folder"};
  app.require_subcommand(1);

  Globals g;
  app.add_option("--root", g.root, "Store directory")->capture_default_str();
  app.add_option("--config", g.config, "Config file (default <root>/oramfs.conf)");
  app.add_option("--seed", g.seed, "Seed for leaf selection (init) or workloads (bench); testing only");
  app.add_option("--key-file", g.key_file, "File with a 32-hex-digit key instead of ORAMFS_PASSPHRASE");

  InitArgs ia;
  auto* init = app.add_subcommand("init", "Create a new empty store");
  init->add_option("--z", ia.z, "Blocks per bucket")->capture_default_str();
  init->add_option("--segment-size", ia.segment_size, "Segment size in bytes")->capture_default_str();
  init->add_option("--group-size", ia.group_size, "Segments fetched per path")->capture_default_str();
  init->add_option("--stash-max", ia.stash_max, "Stash size that triggers background eviction")->capture_default_str();
  init->add_option("--pad-size", ia.pad_size, "Checkpoint size in bytes")->capture_default_str();
  init->add_option("--kdf-iterations", ia.kdf_iterations, "PBKDF2 iterations")->capture_default_str();
  init->add_flag("--no-packing", ia.no_packing, "Store file tails in their own blocks");
  init->add_flag("--no-auto-resize", ia.no_auto_resize, "Keep the tree size fixed");

  std::string name, path;
  auto* put = app.add_subcommand("put", "Store a local file under NAME");
  put->add_option("name", name)->required();
  put->add_option("path", path, "Local file to read")->required();
  auto* get = app.add_subcommand("get", "Write file NAME to PATH ('-' for stdout)");
  get->add_option("name", name)->required();
  get->add_option("path", path)->required();
  auto* rm = app.add_subcommand("rm", "Delete file NAME");
  rm->add_option("name", name)->required();
  auto* ls = app.add_subcommand("ls", "List stored files");
  auto* stats = app.add_subcommand("stats", "Show tree and access counters");
  auto* login = app.add_subcommand("login", "Restore client state from the checkpoint in the sync folder");
  auto* logout = app.add_subcommand("logout", "Write the checkpoint and drop local client state");

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark suite and print CSV");
  bench_cmd->add_option("suite", ba.suite)
      ->required()
      ->check(CLI::IsMember({"distribution", "segment", "group", "packing", "resize", "baseline", "all"}));
  bench_cmd->add_option("--files", ba.files, "Files per run")->capture_default_str();
  bench_cmd->add_option("--out", ba.out, "CSV output path (default stdout)");
  bench_cmd->add_option("--distribution", ba.distribution, "size_kb,cum_pct CSV");
  bench_cmd->add_option("--scratch", ba.scratch, "Directory for the baseline suite");

  CLI11_PARSE(app, argc, argv);

  const std::optional<fs::path> key_file =
      g.key_file.empty() ? std::nullopt : std::optional<fs::path>(fs::path(g.key_file));

  try {
    if (*init) {
      cli::CliConfig cfg;
      cfg.oram.z = ia.z;
      cfg.oram.segment_size = ia.segment_size;
      cfg.oram.group_size = ia.group_size;
      cfg.oram.stash_max = ia.stash_max;
      cfg.oram.rng_seed = g.seed;
      cfg.ufs.packing = !ia.no_packing;
      cfg.ufs.auto_resize = !ia.no_auto_resize;
      cfg.pad_size = ia.pad_size;
      cfg.kdf_iterations = ia.kdf_iterations;
      cli::Store::init(g.root, g.config_path(), cfg, key_file);
      std::cout << "initialized " << g.root << '\n';
      return kExitOk;
    }
    if (*bench_cmd) return run_bench(g, ba);

    cli::Store store(g.root, g.config_path(), key_file);
    if (*put) {
      store.fs().write_file(name, slurp(path));
      store.save();
    } else if (*get) {
      spill(path, store.fs().read_file(name));
      store.save();
    } else if (*rm) {
      store.fs().delete_file(name);
      store.save();
    } else if (*ls) {
      for (const auto& n : store.fs().list()) {
        std::cout << n << '\t' << store.fs().tables().files.at(n).total_bytes << '\n';
      }
    } else if (*stats) {
      const FileSystem& f = store.fs();
      const auto c = store.counters();
      std::cout << "N: " << f.oram().bucket_count() << '\n'
                << "z: " << f.oram().config().z << '\n'
                << "segment_size: " << f.oram().config().segment_size << '\n'
                << "group_size: " << f.oram().config().group_size << '\n'
                << "utilization: " << f.oram().utilization() << '\n'
                << "stash_blocks: " << f.oram().stash_size() << '\n'
                << "live_blocks: " << f.oram().live_blocks() << '\n'
                << "files: " << f.tables().files.size() << '\n'
                << "foreground_paths: " << c.foreground_paths << '\n'
                << "eviction_paths: " << c.eviction_paths << '\n';
    } else if (*login) {
      store.login();
      std::cout << "logged in\n";
    } else if (*logout) {
      store.logout();
      std::cout << "logged out\n";
    }
    return kExitOk;
  } catch (const cli::NotReady& e) {
    std::cerr << "oramfs: " << e.what() << '\n';
    return kExitNotReady;
  } catch (const Error& e) {
    std::cerr << "oramfs: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "oramfs: " << e.what() << '\n';
    return kExitUsage;
  }
}
