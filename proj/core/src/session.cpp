#include "oramfs/session.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "oramfs/detail/byte_io.hpp"
#include "oramfs/error.hpp"

namespace oramfs {
namespace {

using detail::ByteReader;
using detail::ByteWriter;

// Writes a u32 length placeholder, runs `body`, then patches the length.
template <typename Fn>
void section(ByteWriter& w, Fn&& body) {
  const std::size_t at = w.size();
  w.u32(0);
  body();
  w.patch_u32(at, static_cast<std::uint32_t>(w.size() - at - 4));
}

struct Corrupt {
  std::string why;
};

ByteReader open_section(ByteReader& r) {
  const std::uint32_t len = r.u32();
  return ByteReader(r.bytes(len));
}

void expect_consumed(const ByteReader& r, const char* what) {
  if (r.remaining() != 0) throw Corrupt{std::string(what) + " section has trailing bytes"};
}

void write_config(ByteWriter& w, const FileSystem& fs) {
  const OramConfig& c = fs.oram().config();
  const UfsOptions& o = fs.options();
  w.u32(c.z);
  w.u32(c.segment_size);
  w.u32(c.stash_max);
  w.u32(c.group_size);
  w.u8(c.rng_seed ? 1 : 0);
  w.u64(c.rng_seed.value_or(0));
  w.u64(fs.oram().bucket_count());
  w.u8(o.packing ? 1 : 0);
  w.u8(o.auto_resize ? 1 : 0);
  w.u64(std::bit_cast<std::uint64_t>(o.resize.shrink_threshold));
  w.u64(std::bit_cast<std::uint64_t>(o.resize.target));
  w.u64(std::bit_cast<std::uint64_t>(o.resize.grow_threshold));
}

bool read_flag(ByteReader& r) {
  const auto v = r.u8();
  if (v > 1) throw Corrupt{"flag byte out of range"};
  return v == 1;
}

}  // namespace

Bytes encode_checkpoint(const FileSystem& fs) {
  Bytes out;
  ByteWriter w(out);
  const PathOram& oram = fs.oram();
  const UfsTables& t = fs.tables();

  w.u32(kCheckpointMagic);
  w.u16(kCheckpointVersion);
  section(w, [&] { write_config(w, fs); });
  section(w, [&] {
    w.u64(oram.positions().size());
    for (const auto& [id, leaf] : oram.positions()) {
      w.u64(id);
      w.u64(leaf);
    }
  });
  section(w, [&] {
    w.u64(oram.stash().size());
    for (const auto& [id, payload] : oram.stash()) {
      w.u64(id);
      w.bytes(payload);
    }
  });
  section(w, [&] {
    w.u64(t.files.size());
    for (const auto& [name, record] : t.files) {
      w.str(name);
      w.u64(record.total_bytes);
      w.u64(record.segment_ids.size());
      for (SegmentId s : record.segment_ids) w.u64(s);
    }
  });
  section(w, [&] {
    w.u64(t.packs.size());
    for (const auto& [segment, loc] : t.packs) {
      w.u64(segment);
      w.u64(loc.host);
      w.u32(loc.start);
      w.u32(loc.end);
    }
  });
  section(w, [&] {
    w.u64(t.free_space.size());
    for (const FreeSpaceEntry& e : t.free_space) {
      w.u64(e.host);
      w.u32(e.free_bytes);
    }
  });
  section(w, [&] { w.u64(t.next_id); });
  return out;
}

Bytes seal_checkpoint(const FileSystem& fs, const SecretKey& key, std::size_t pad_size) {
  Bytes body = encode_checkpoint(fs);
  if (body.size() > pad_size) {
    throw Error(Errc::checkpoint_overflow, "state needs " + std::to_string(body.size()) +
                                               " bytes but pad size is " + std::to_string(pad_size));
  }
  body.resize(pad_size, 0);
  return seal(body, key);
}

std::unique_ptr<FileSystem> open_checkpoint(std::span<const std::uint8_t> sealed, const SecretKey& key,
                                            Backend& backend) {
  if (sealed.size() < kNonceSize) throw Error(Errc::corrupt_checkpoint, "checkpoint shorter than its nonce");
  const Bytes body = open(sealed, key);
  try {
    ByteReader r(body);
    if (r.u32() != kCheckpointMagic) throw Corrupt{"bad magic"};
    const std::uint16_t version = r.u16();
    if (version != kCheckpointVersion) {
      throw Error(Errc::unsupported_version, "checkpoint version " + std::to_string(version));
    }

    OramConfig config;
    UfsOptions options;
    PathOram::ClientState state;
    {
      ByteReader s = open_section(r);
      config.z = s.u32();
      config.segment_size = s.u32();
      config.stash_max = s.u32();
      config.group_size = s.u32();
      const bool seeded = read_flag(s);
      const std::uint64_t seed = s.u64();
      if (seeded) config.rng_seed = seed;
      state.bucket_count = s.u64();
      options.packing = read_flag(s);
      options.auto_resize = read_flag(s);
      options.resize.shrink_threshold = std::bit_cast<double>(s.u64());
      options.resize.target = std::bit_cast<double>(s.u64());
      options.resize.grow_threshold = std::bit_cast<double>(s.u64());
      expect_consumed(s, "config");
      try {
        config.validate();
        options.resize.validate();
      } catch (const Error& e) {
        throw Corrupt{e.what()};
      }
      if (state.bucket_count == 0) throw Corrupt{"empty tree"};
    }
    {
      ByteReader s = open_section(r);
      const std::uint64_t n = s.u64();
      for (std::uint64_t i = 0; i < n; ++i) {
        const BlockId id = s.u64();
        const BucketIndex leaf = s.u64();
        if (!is_leaf(leaf, state.bucket_count)) throw Corrupt{"position map points at a non-leaf"};
        state.positions.emplace(id, leaf);
      }
      expect_consumed(s, "position map");
    }
    {
      ByteReader s = open_section(r);
      const std::uint64_t n = s.u64();
      for (std::uint64_t i = 0; i < n; ++i) {
        const BlockId id = s.u64();
        auto payload = s.bytes(config.segment_size);
        if (!state.positions.contains(id)) throw Corrupt{"stash block without a position"};
        state.stash.emplace(id, Bytes(payload.begin(), payload.end()));
      }
      expect_consumed(s, "stash");
    }
    UfsTables tables;
    {
      ByteReader s = open_section(r);
      const std::uint64_t n = s.u64();
      for (std::uint64_t i = 0; i < n; ++i) {
        std::string name = s.str();
        FileRecord record;
        record.total_bytes = s.u64();
        const std::uint64_t count = s.u64();
        const std::uint64_t expected = (record.total_bytes + config.segment_size - 1) / config.segment_size;
        if (count != expected) throw Corrupt{"segment count does not match file size"};
        for (std::uint64_t k = 0; k < count; ++k) record.segment_ids.push_back(s.u64());
        tables.files.emplace(std::move(name), std::move(record));
      }
      expect_consumed(s, "file table");
    }
    {
      ByteReader s = open_section(r);
      const std::uint64_t n = s.u64();
      for (std::uint64_t i = 0; i < n; ++i) {
        const SegmentId segment = s.u64();
        PackLocation loc;
        loc.host = s.u64();
        loc.start = s.u32();
        loc.end = s.u32();
        if (!(loc.start < loc.end && loc.end <= config.segment_size)) throw Corrupt{"pack range out of bounds"};
        tables.packs.emplace(segment, loc);
      }
      expect_consumed(s, "pack table");
    }
    {
      ByteReader s = open_section(r);
      const std::uint64_t n = s.u64();
      for (std::uint64_t i = 0; i < n; ++i) {
        FreeSpaceEntry e;
        e.host = s.u64();
        e.free_bytes = s.u32();
        if (e.free_bytes >= config.segment_size) throw Corrupt{"free-space entry out of range"};
        tables.free_space.push_back(e);
      }
      expect_consumed(s, "free-space table");
    }
    {
      ByteReader s = open_section(r);
      tables.next_id = s.u64();
      expect_consumed(s, "counters");
    }
    const auto rest = r.bytes(r.remaining());
    if (std::any_of(rest.begin(), rest.end(), [](std::uint8_t b) { return b != 0; })) {
      throw Corrupt{"non-zero padding"};
    }

    auto oram = PathOram::restore(config, backend, key, std::move(state));
    return std::make_unique<FileSystem>(std::move(oram), options, std::move(tables));
  } catch (const Corrupt& c) {
    throw Error(Errc::corrupt_checkpoint, c.why);
  } catch (const detail::ShortRead&) {
    throw Error(Errc::corrupt_checkpoint, "truncated section");
  }
}

void logout(const FileSystem& fs, const SecretKey& key, std::size_t pad_size) {
  const Bytes sealed = seal_checkpoint(fs, key, pad_size);
  fs.oram().backend().put_named(kCheckpointObject, sealed);
}

std::unique_ptr<FileSystem> login(Backend& backend, const SecretKey& key) {
  Bytes sealed;
  try {
    sealed = backend.get_named(kCheckpointObject);
  } catch (const Error& e) {
    if (e.code() == Errc::missing_object) throw Error(Errc::not_found, "no checkpoint on the backend");
    throw;
  }
  return open_checkpoint(sealed, key, backend);
}

}  // namespace oramfs
