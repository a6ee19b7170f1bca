#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <utility>

#include "temviro/error.hpp"

// Little-endian primitives shared by the TVFM and TVCK containers.
namespace temviro::byte_io {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

template <typename T>
void put(std::ostream& out, T v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

inline void put_f64(std::ostream& out, double v) { put(out, std::bit_cast<std::uint64_t>(v)); }

// Throws `code` with `what` when the stream runs dry.
template <typename T>
T get(std::istream& in, ErrorCode code, const std::string& what) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) fail(code, what + ": unexpected end of data");
  return to_little(v);
}

inline double get_f64(std::istream& in, ErrorCode code, const std::string& what) {
  return std::bit_cast<double>(get<std::uint64_t>(in, code, what));
}

}  // namespace temviro::byte_io
