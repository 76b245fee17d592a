#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "csen/error.hpp"

namespace csen::binio {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
      std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    std::memcpy(&v, bytes, sizeof(T));
  }
  return v;
}

inline void put_u32(std::ostream& out, std::uint32_t v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void put_f64(std::ostream& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

inline void put_string(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

// Reader that reports the byte offset of any truncation.
class Reader {
 public:
  Reader(std::istream& in, ErrorKind kind, std::string source)
      : in_(in), kind_(kind), source_(std::move(source)) {}

  void bytes(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      fail(kind_, source_ + ": truncated at offset " +
                      std::to_string(offset_ + in_.gcount()));
    }
    offset_ += n;
  }

  std::uint32_t u32() {
    std::uint32_t v;
    bytes(reinterpret_cast<char*>(&v), sizeof v);
    return to_little(v);
  }

  std::uint64_t u64() {
    std::uint64_t v;
    bytes(reinterpret_cast<char*>(&v), sizeof v);
    return to_little(v);
  }

  double f64() { return std::bit_cast<double>(u64()); }

  std::string string(std::size_t max_len = 1u << 20) {
    const auto len = u32();
    if (len > max_len) {
      fail(kind_, source_ + ": string length " + std::to_string(len) +
                      " too large at offset " + std::to_string(offset_ - 4));
    }
    std::string s(len, '\0');
    bytes(s.data(), len);
    return s;
  }

  std::size_t offset() const { return offset_; }
  const std::string& source() const { return source_; }

  [[noreturn]] void error(const std::string& what) const {
    fail(kind_, source_ + ": " + what + " at offset " + std::to_string(offset_));
  }

 private:
  std::istream& in_;
  ErrorKind kind_;
  std::string source_;
  std::size_t offset_ = 0;
};

}  // namespace csen::binio
