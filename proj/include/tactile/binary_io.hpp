#pragma once

// Little-endian primitives shared by the model and dataset formats.

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "tactile/errors.hpp"

namespace tactile::io {

template <typename U>
void put_uint(std::ostream& out, U v) {
  char b[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, sizeof(U));
}

template <typename U>
U get_uint(std::istream& in) {
  unsigned char b[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(b), sizeof(U))) throw ValidationError("unexpected end of file");
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(b[i]) << (8 * i);
  return v;
}

inline void put_u8(std::ostream& out, std::uint8_t v) { put_uint<std::uint8_t>(out, v); }
inline void put_u32(std::ostream& out, std::uint32_t v) { put_uint(out, v); }
inline void put_u64(std::ostream& out, std::uint64_t v) { put_uint(out, v); }
inline void put_f32(std::ostream& out, float v) { put_uint(out, std::bit_cast<std::uint32_t>(v)); }
inline void put_f64(std::ostream& out, double v) { put_uint(out, std::bit_cast<std::uint64_t>(v)); }

inline std::uint8_t get_u8(std::istream& in) { return get_uint<std::uint8_t>(in); }
inline std::uint32_t get_u32(std::istream& in) { return get_uint<std::uint32_t>(in); }
inline std::uint64_t get_u64(std::istream& in) { return get_uint<std::uint64_t>(in); }
inline float get_f32(std::istream& in) { return std::bit_cast<float>(get_u32(in)); }
inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

inline void put_magic(std::ostream& out, const char (&magic)[5]) { out.write(magic, 4); }

inline void expect_magic(std::istream& in, const char (&magic)[5], const char* what) {
  char b[4];
  if (!in.read(b, 4) || std::string(b, 4) != std::string(magic, 4))
    throw ValidationError(std::string("not a ") + what + " file (bad magic)");
}

/// Bounds a count read from a file before it is used for an allocation.
inline std::uint32_t checked_count(std::uint32_t n, std::uint32_t limit, const char* what) {
  if (n > limit) throw ValidationError(std::string("implausible ") + what + " count " + std::to_string(n));
  return n;
}

}  // namespace tactile::io
