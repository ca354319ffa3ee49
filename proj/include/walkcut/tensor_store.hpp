#pragma once

// Fixed-layout binary tensor files ("SATN").
//
// Layout (all integers little-endian):
//   magic   4 bytes  'S' 'A' 'T' 'N'
//   version u32      1
//   dtype   u8       0 = float32, 1 = uint8, 2 = int32
//   ndim    u32      1..8
//   dims    ndim x u64, each >= 1
//   payload row-major elements, little-endian
//
// Big-endian hosts byte-swap the payload on load and store.

#include "walkcut/types.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace walkcut {

enum class DType : std::uint8_t { float32 = 0, uint8 = 1, int32 = 2 };

std::size_t dtype_size(DType t);
const char* to_string(DType t);

inline constexpr std::uint32_t kTensorVersion = 1;
inline constexpr std::size_t kMaxTensorDims = 8;
inline constexpr std::uint64_t kMaxTensorElements = std::uint64_t{1} << 48;

/// Size in bytes of the header for a tensor with `ndim` dimensions.
constexpr std::size_t tensor_header_size(std::size_t ndim) { return 13 + 8 * ndim; }

struct TensorFile {
  DType dtype = DType::float32;
  std::vector<std::uint64_t> shape;
  std::vector<std::byte> data;  ///< payload in host byte order

  std::uint64_t element_count() const;

  /// Throws FormatError when shape and payload disagree.
  void validate() const;

  static TensorFile from_floats(std::vector<std::uint64_t> shape, std::span<const float> values);
  static TensorFile from_uint8(std::vector<std::uint64_t> shape, std::span<const std::uint8_t> values);
  static TensorFile from_int32(std::vector<std::uint64_t> shape, std::span<const std::int32_t> values);

  std::vector<float> to_floats() const;
  std::vector<std::uint8_t> to_uint8() const;
  std::vector<std::int32_t> to_int32() const;

  bool operator==(const TensorFile&) const = default;
};

void write_tensor(const TensorFile& t, const std::filesystem::path& path);
TensorFile read_tensor(const std::filesystem::path& path);

/// Encode to / decode from the exact on-disk byte sequence.
std::vector<std::byte> encode_tensor(const TensorFile& t);
TensorFile decode_tensor(std::span<const std::byte> bytes);

/// Reverse the byte order of every payload element in place.
void byteswap_payload(TensorFile& t);

/// 2-D float32 tensor <-> dense matrix.
TensorFile matrix_to_tensor(const Matrix& m);
Matrix tensor_to_matrix(const TensorFile& t);

}  // namespace walkcut
