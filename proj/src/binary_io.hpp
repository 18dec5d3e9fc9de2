#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "btrf/errors.hpp"

namespace btrf::detail {

// Little-endian fixed-width encoding independent of host byte order.

inline void put_u8(std::ostream& out, std::uint8_t v) { out.put(static_cast<char>(v)); }

inline void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

inline void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }
inline void put_f32(std::ostream& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

class Reader {
 public:
  Reader(std::istream& in, std::string name) : in_(in), name_(std::move(name)) {}

  std::uint8_t u8() {
    char c;
    if (!in_.get(c)) truncated();
    return static_cast<std::uint8_t>(c);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(u8()) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  float f32() { return std::bit_cast<float>(u32()); }

  void expect_magic(const char (&magic)[5]) {
    for (int i = 0; i < 4; ++i)
      if (u8() != static_cast<std::uint8_t>(magic[i]))
        throw DataError(name_ + ": bad magic, expected " + std::string(magic, 4));
  }

  void expect_end() {
    if (in_.peek() != std::char_traits<char>::eof()) fail("trailing bytes after the last record");
  }

  [[noreturn]] void fail(const std::string& what) const { throw DataError(name_ + ": " + what); }

 private:
  [[noreturn]] void truncated() const { throw DataError(name_ + ": truncated file"); }

  std::istream& in_;
  std::string name_;
};

}  // namespace btrf::detail
