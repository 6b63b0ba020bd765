#pragma once

// Little-endian binary streams used by parameter snapshots and checkpoints.
// Layouts built on top of these are documented in docs/formats.md.

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "forkrl/errors.hpp"

namespace forkrl {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void u8(std::uint8_t v) { raw(&v, sizeof v); }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void boolean(bool v) { u8(v ? 1 : 0); }

  void str(std::string_view s) {
    u64(s.size());
    raw(s.data(), s.size());
  }
  void f64s(const double* data, std::size_t n) {
    u64(n);
    raw(data, n * sizeof(double));
  }
  void f64s(const std::vector<double>& v) { f64s(v.data(), v.size()); }
  void magic(std::string_view tag) { raw(tag.data(), tag.size()); }

 private:
  void raw(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!out_) throw FormatError("binary write failed");
  }
  std::ostream& out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::istream& in) : in_(in) {}

  std::uint8_t u8() { return pod<std::uint8_t>(); }
  std::uint32_t u32() { return pod<std::uint32_t>(); }
  std::uint64_t u64() { return pod<std::uint64_t>(); }
  double f64() { return pod<double>(); }
  bool boolean() {
    auto v = u8();
    if (v > 1) throw FormatError("invalid boolean byte");
    return v == 1;
  }

  std::string str() {
    auto n = u64();
    check_length(n);
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
  }
  std::vector<double> f64s() {
    auto n = u64();
    check_length(n * sizeof(double));
    std::vector<double> v(n);
    raw(v.data(), n * sizeof(double));
    return v;
  }
  void expect_magic(std::string_view tag) {
    std::string got(tag.size(), '\0');
    raw(got.data(), got.size());
    if (got != tag) throw FormatError("bad magic: expected '" + std::string(tag) + "'");
  }

 private:
  template <typename T>
  T pod() {
    T v{};
    raw(&v, sizeof v);
    return v;
  }
  void raw(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (in_.gcount() != static_cast<std::streamsize>(n)) throw FormatError("unexpected end of data");
  }
  static void check_length(std::uint64_t bytes) {
    // Guards against allocating from a corrupted length prefix.
    if (bytes > (std::uint64_t{1} << 40)) throw FormatError("implausible length prefix");
  }
  std::istream& in_;
};

}  // namespace forkrl
