// Copyright 2026 The kgalign Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <type_traits>
#include <vector>

namespace kgalign {

inline constexpr std::string_view kVersion = "1.0.0";

// All recoverable failures (bad input files, contract violations) surface as
// this exception. The CLI turns it into a single-line error on stderr.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void append_all(std::ostringstream&) {}

template <typename T, typename... Rest>
void append_all(std::ostringstream& oss, T&& head, Rest&&... rest) {
  oss << std::forward<T>(head);
  append_all(oss, std::forward<Rest>(rest)...);
}

}  // namespace detail

template <typename... Args>
std::string str_cat(Args&&... args) {
  std::ostringstream oss;
  oss.precision(17);
  detail::append_all(oss, std::forward<Args>(args)...);
  return oss.str();
}

template <typename... Args>
[[noreturn]] void fail(Args&&... args) {
  throw Error(str_cat(std::forward<Args>(args)...));
}

#define KGALIGN_CHECK(cond, ...)            \
  do {                                      \
    if (!(cond)) ::kgalign::fail(__VA_ARGS__); \
  } while (0)

// ---------------------------------------------------------------------------
// Random numbers. The standard distributions are implementation-defined, so
// every draw goes through these helpers to keep seeded runs identical across
// standard libraries.

using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Unbiased integer in [0, n).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  if (n == 0) fail("uniform_index: empty range");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = uniform_index(rng, i);
    std::swap(v[i - 1], v[j]);
  }
}

// Derives an independent stream from a base seed and a tag.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// Threading. KGALIGN_THREADS caps kernel parallelism; every parallel loop
// partitions rows into disjoint contiguous blocks so results never depend on
// the thread count.

inline std::size_t max_threads() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("KGALIGN_THREADS")) {
    long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<std::size_t>(n, static_cast<std::size_t>(cap));
  }
  return n;
}

// Runs fn(begin, end) over [0, n). Falls back to a single call when the work
// is too small to amortize thread start-up.
inline void parallel_rows(std::size_t n, std::size_t work_per_row,
                          const std::function<void(std::size_t, std::size_t)>& fn) {
  std::size_t threads = max_threads();
  if (threads <= 1 || n * work_per_row < (1u << 18) || n < 2) {
    fn(0, n);
    return;
  }
  threads = std::min(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::size_t block = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    std::size_t b = t * block, e = std::min(n, b + block);
    if (b >= e) break;
    pool.emplace_back(fn, b, e);
  }
  for (auto& th : pool) th.join();
}

// ---------------------------------------------------------------------------
// Little-endian binary serialization used by the task, feature and
// checkpoint caches.

class BinaryWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) { put_le(v); }
  void u64(std::uint64_t v) { put_le(v); }
  void i64(std::int64_t v) { put_le(static_cast<std::uint64_t>(v)); }
  void f64(double v) { put_le(std::bit_cast<std::uint64_t>(v)); }
  void bytes(std::string_view s) { buf_.append(s.data(), s.size()); }
  void str(std::string_view s) {
    u64(s.size());
    bytes(s);
  }
  template <typename T>
  void array(const std::vector<T>& v) {
    u64(v.size());
    for (const T& x : v) scalar(x);
  }

  const std::string& data() const { return buf_; }

  // Writes to a temporary sibling and renames, so readers never observe a
  // partially written file.
  void save(const std::filesystem::path& path) const {
    auto tmp = path;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) fail("cannot open ", tmp.string(), " for writing");
      out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
      if (!out) fail("write failed: ", tmp.string());
    }
    std::filesystem::rename(tmp, path);
  }

 private:
  template <typename T>
  void scalar(const T& x) {
    if constexpr (std::is_same_v<T, double>) {
      f64(x);
    } else if constexpr (std::is_same_v<T, std::int64_t>) {
      i64(x);
    } else if constexpr (std::is_same_v<T, std::uint32_t>) {
      u32(x);
    } else {
      static_assert(std::is_same_v<T, std::uint64_t>, "unsupported array type");
      u64(x);
    }
  }

  template <typename U>
  void put_le(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i)
      buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }

  std::string buf_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::string data, std::string source = "<memory>")
      : data_(std::move(data)), source_(std::move(source)) {}

  static BinaryReader from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open ", path.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return BinaryReader(std::move(data), path.string());
  }

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }
  std::uint32_t u32() { return get_le<std::uint32_t>(); }
  std::uint64_t u64() { return get_le<std::uint64_t>(); }
  std::int64_t i64() { return static_cast<std::int64_t>(get_le<std::uint64_t>()); }
  double f64() { return std::bit_cast<double>(get_le<std::uint64_t>()); }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::string str() { return bytes(checked_count(1)); }

  template <typename T>
  std::vector<T> array() {
    std::size_t n = checked_count(sizeof(T));
    std::vector<T> v;
    v.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      if constexpr (std::is_same_v<T, double>) {
        v.push_back(f64());
      } else if constexpr (std::is_same_v<T, std::int64_t>) {
        v.push_back(i64());
      } else if constexpr (std::is_same_v<T, std::uint32_t>) {
        v.push_back(u32());
      } else {
        static_assert(std::is_same_v<T, std::uint64_t>, "unsupported array type");
        v.push_back(u64());
      }
    }
    return v;
  }

  void expect_magic(std::string_view magic, std::uint32_t version) {
    if (bytes(magic.size()) != magic) fail(source_, ": not a ", magic, " file");
    std::uint32_t v = u32();
    if (v != version) fail(source_, ": unsupported ", magic, " version ", v, " (expected ", version, ")");
  }

  bool at_end() const { return pos_ == data_.size(); }
  const std::string& source() const { return source_; }

 private:
  std::size_t checked_count(std::size_t elem_size) {
    std::uint64_t n = u64();
    if (n > (data_.size() - pos_) / elem_size) fail(source_, ": truncated or corrupt array length");
    return static_cast<std::size_t>(n);
  }

  void need(std::size_t n) {
    if (data_.size() - pos_ < n) fail(source_, ": unexpected end of file");
  }

  template <typename U>
  U get_le() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i)
      v |= static_cast<U>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += sizeof(U);
    return v;
  }

  std::string data_;
  std::string source_;
  std::size_t pos_ = 0;
};

// FNV-1a, used for input digests in run manifests.
inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = kDigits[v & 0xf];
  return s;
}

// ---------------------------------------------------------------------------
// Text helpers for the tab-separated input formats.

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t p = line.find(sep, start);
    if (p == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, p - start));
    start = p + 1;
  }
}

inline std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

inline bool parse_int(std::string_view s, std::int64_t& out) {
  if (s.empty()) return false;
  std::size_t i = 0;
  bool neg = false;
  if (s[0] == '-') {
    neg = true;
    i = 1;
    if (s.size() == 1) return false;
  }
  std::int64_t v = 0;
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    if (v > (std::numeric_limits<std::int64_t>::max() - 9) / 10) return false;
    v = v * 10 + (s[i] - '0');
  }
  out = neg ? -v : v;
  return true;
}

inline bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  std::string tmp(s);
  char* end = nullptr;
  out = std::strtod(tmp.c_str(), &end);
  return end == tmp.c_str() + tmp.size() && std::isfinite(out);
}

// Shortest round-trip decimal representation of a double.
inline std::string format_double(double v) {
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open ", path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail("cannot open ", tmp.string(), " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) fail("write failed: ", tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace kgalign
