#include "cli_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "oramfs/error.hpp"

namespace oramfs::cli {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_int(const std::string& key, const std::string& value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw Error(Errc::invalid_config, key + ": not an integer: " + value);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    double d = std::stod(value, &used);
    if (used == value.size()) return d;
  } catch (const std::logic_error&) {
  }
  throw Error(Errc::invalid_config, key + ": not a number: " + value);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw Error(Errc::invalid_config, key + ": not a boolean: " + value);
}

}  // namespace

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw Error(Errc::invalid_config, "odd-length hex string");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto [ptr, ec] = std::from_chars(hex.data() + 2 * i, hex.data() + 2 * i + 2, out[i], 16);
    if (ec != std::errc{} || ptr != hex.data() + 2 * i + 2) throw Error(Errc::invalid_config, "bad hex string");
  }
  return out;
}

CliConfig CliConfig::parse(std::istream& in) {
  CliConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::invalid_config, "line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));

    if (key == "z") c.oram.z = parse_int<std::uint32_t>(key, value);
    else if (key == "segment_size") c.oram.segment_size = parse_int<std::uint32_t>(key, value);
    else if (key == "stash_max") c.oram.stash_max = parse_int<std::uint32_t>(key, value);
    else if (key == "group_size") c.oram.group_size = parse_int<std::uint32_t>(key, value);
    else if (key == "seed") c.oram.rng_seed = parse_int<std::uint64_t>(key, value);
    else if (key == "packing") c.ufs.packing = parse_bool(key, value);
    else if (key == "auto_resize") c.ufs.auto_resize = parse_bool(key, value);
    else if (key == "shrink_threshold") c.ufs.resize.shrink_threshold = parse_double(key, value);
    else if (key == "target_utilization") c.ufs.resize.target = parse_double(key, value);
    else if (key == "grow_threshold") c.ufs.resize.grow_threshold = parse_double(key, value);
    else if (key == "pad_size") c.pad_size = parse_int<std::size_t>(key, value);
    else if (key == "kdf_salt") c.kdf_salt = value;
    else if (key == "kdf_iterations") c.kdf_iterations = parse_int<std::uint32_t>(key, value);
    else if (key == "key_file") c.key_file = value;
    else throw Error(Errc::invalid_config, "unknown config key '" + key + "'");
  }
  c.validate();
  return c;
}

CliConfig CliConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::invalid_config, "cannot read " + path.string());
  return parse(in);
}

void CliConfig::write(std::ostream& out) const {
  out << "# oramfs store configuration\n";
  out << "z = " << oram.z << '\n';
  out << "segment_size = " << oram.segment_size << '\n';
  out << "stash_max = " << oram.stash_max << '\n';
  out << "group_size = " << oram.group_size << '\n';
  if (oram.rng_seed) out << "seed = " << *oram.rng_seed << '\n';
  out << "packing = " << (ufs.packing ? "true" : "false") << '\n';
  out << "auto_resize = " << (ufs.auto_resize ? "true" : "false") << '\n';
  out << "shrink_threshold = " << ufs.resize.shrink_threshold << '\n';
  out << "target_utilization = " << ufs.resize.target << '\n';
  out << "grow_threshold = " << ufs.resize.grow_threshold << '\n';
  out << "pad_size = " << pad_size << '\n';
  out << "kdf_iterations = " << kdf_iterations << '\n';
  if (!kdf_salt.empty()) out << "kdf_salt = " << kdf_salt << '\n';
  if (!key_file.empty()) out << "key_file = " << key_file << '\n';
}

void CliConfig::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  write(out);
  if (!out) throw Error(Errc::storage_error, "cannot write " + path.string());
}

void CliConfig::validate() const {
  oram.validate();
  ufs.resize.validate();
  if (pad_size == 0) throw Error(Errc::invalid_config, "pad_size must be positive");
  if (kdf_iterations == 0) throw Error(Errc::invalid_config, "kdf_iterations must be positive");
  if (!kdf_salt.empty()) from_hex(kdf_salt);
}

}  // namespace oramfs::cli
