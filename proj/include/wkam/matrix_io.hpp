#pragma once

// Binary matrix cache.
//
//   bytes 0..3    "WKAM"
//   bytes 4..7    format version (u32, little-endian)
//   bytes 8..15   n_states (u64)
//   bytes 16..23  tau (f64)
//   then n_states^2 row-major f64 entries, +inf stored as IEEE infinity.
//
// A JSON sidecar `<file>.json` carries the provenance record, the object kind
// ("cost" or "h") and an FNV-1a checksum of the binary file. Writers take an
// exclusive flock on `<file>.lock`, write to a temporary file and rename it
// into place, so the last writer wins and readers never see partial files.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include "json.hpp"
#include "wkam/errors.hpp"
#include "wkam/minplus.hpp"

namespace wkam {

static_assert(std::endian::native == std::endian::little, "cache format assumes a little-endian host");

inline constexpr std::uint32_t kCacheVersion = 1;

namespace detail {

inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T take(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw std::runtime_error("truncated matrix file");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

class FileLock {
 public:
  explicit FileLock(const std::filesystem::path& p, int op) {
    fd_ = ::open(p.c_str(), O_RDWR | O_CREAT, 0644);
    if (fd_ >= 0) ::flock(fd_, op);
  }
  ~FileLock() {
    if (fd_ >= 0) {
      ::flock(fd_, LOCK_UN);
      ::close(fd_);
    }
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

inline std::string read_all(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_atomic(const std::filesystem::path& p, const std::string& bytes) {
  auto tmp = p;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, p);
}

}  // namespace detail

inline std::string encode_matrix(const CostMatrix& m) {
  std::string out;
  out.reserve(24 + m.entries.size() * 8);
  out.append("WKAM", 4);
  detail::put<std::uint32_t>(out, kCacheVersion);
  detail::put<std::uint64_t>(out, m.n);
  detail::put<double>(out, m.tau);
  out.append(reinterpret_cast<const char*>(m.entries.data()), m.entries.size() * sizeof(double));
  return out;
}

/// Decodes entries and tau; grid and provenance are left to the caller.
inline CostMatrix decode_matrix(const std::string& bytes) {
  if (bytes.size() < 24 || bytes.compare(0, 4, "WKAM") != 0) throw std::runtime_error("not a WKAM matrix file");
  std::size_t pos = 4;
  const auto version = detail::take<std::uint32_t>(bytes, pos);
  if (version != kCacheVersion) throw std::runtime_error("unsupported matrix file version " + std::to_string(version));
  CostMatrix m;
  m.n = detail::take<std::uint64_t>(bytes, pos);
  m.tau = detail::take<double>(bytes, pos);
  if (bytes.size() != pos + m.n * m.n * sizeof(double)) throw std::runtime_error("matrix file size mismatch");
  m.entries.resize(m.n * m.n);
  std::memcpy(m.entries.data(), bytes.data() + pos, m.entries.size() * sizeof(double));
  return m;
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& p) {
  auto s = p;
  s += ".json";
  return s;
}

/// Writes the matrix and its sidecar under an exclusive lock.
inline void write_matrix(const std::filesystem::path& p, const CostMatrix& m) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  const std::string bytes = encode_matrix(m);
  nlohmann::json side = {{"kind", m.provenance.value("kind", "cost")},
                         {"version", kCacheVersion},
                         {"n_states", m.n},
                         {"tau", m.tau},
                         {"checksum", detail::hex64(detail::fnv1a(bytes))},
                         {"provenance", m.provenance}};
  auto lock_path = p;
  lock_path += ".lock";
  detail::FileLock lock(lock_path, LOCK_EX);
  detail::write_atomic(p, bytes);
  detail::write_atomic(sidecar_path(p), side.dump(2) + "\n");
}

/// Reads a matrix whose sidecar provenance equals `expected` and whose checksum
/// verifies; returns nothing on a miss or on any mismatch.
inline std::optional<CostMatrix> read_matrix(const std::filesystem::path& p, const nlohmann::json& expected) {
  if (!std::filesystem::exists(p) || !std::filesystem::exists(sidecar_path(p))) return std::nullopt;
  auto lock_path = p;
  lock_path += ".lock";
  try {
    detail::FileLock lock(lock_path, LOCK_SH);
    const auto side = nlohmann::json::parse(detail::read_all(sidecar_path(p)));
    if (side.value("provenance", nlohmann::json()) != expected) return std::nullopt;
    const std::string bytes = detail::read_all(p);
    if (side.value("checksum", std::string()) != detail::hex64(detail::fnv1a(bytes))) {
      warn("cache checksum mismatch for " + p.string() + "; recomputing");
      return std::nullopt;
    }
    CostMatrix m = decode_matrix(bytes);
    m.provenance = expected;
    return m;
  } catch (const std::exception& e) {
    warn(std::string("unreadable cache entry ") + p.string() + ": " + e.what());
    return std::nullopt;
  }
}

/// Stable file stem for a provenance record.
inline std::string cache_key(const nlohmann::json& provenance) {
  return provenance.value("kind", "m") + "-" + detail::hex64(detail::fnv1a(provenance.dump()));
}

}  // namespace wkam
