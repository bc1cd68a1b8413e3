#pragma once

// Little-endian scalar encoding shared by the on-disk formats.

#include <array>
#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>

namespace mwcnn::binary {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename U>
void put(std::ostream& out, U value) {
  std::array<char, sizeof(U)> bytes;
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

inline void put_f64(std::ostream& out, double v) { put(out, std::bit_cast<std::uint64_t>(v)); }

inline void put_f64s(std::ostream& out, std::span<const double> values) {
  for (double v : values) put_f64(out, v);
}

template <typename U>
U get(std::istream& in) {
  std::array<unsigned char, sizeof(U)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) throw FormatError("truncated file");
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

inline double get_f64(std::istream& in) { return std::bit_cast<double>(get<std::uint64_t>(in)); }

template <typename Range>
void get_f64s(std::istream& in, Range&& values) {
  for (double& v : values) v = get_f64(in);
}

}  // namespace mwcnn::binary
