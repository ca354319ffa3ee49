#include "walkcut/tensor_store.hpp"

#include "walkcut/error.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace walkcut {

const char* to_string(FormatErrc e) {
  switch (e) {
    case FormatErrc::io: return "i/o error";
    case FormatErrc::bad_magic: return "bad magic";
    case FormatErrc::unsupported_version: return "unsupported version";
    case FormatErrc::unsupported_dtype: return "unsupported dtype";
    case FormatErrc::truncated: return "truncated payload";
    case FormatErrc::trailing_data: return "trailing data";
    case FormatErrc::invalid_shape: return "invalid shape";
    case FormatErrc::shape_overflow: return "shape overflow";
  }
  return "unknown";
}

std::size_t dtype_size(DType t) {
  switch (t) {
    case DType::float32: return 4;
    case DType::uint8: return 1;
    case DType::int32: return 4;
  }
  throw FormatError(FormatErrc::unsupported_dtype, "code " + std::to_string(static_cast<int>(t)));
}

const char* to_string(DType t) {
  switch (t) {
    case DType::float32: return "float32";
    case DType::uint8: return "uint8";
    case DType::int32: return "int32";
  }
  return "unknown";
}

namespace {

constexpr std::array<std::byte, 4> kMagic{std::byte{'S'}, std::byte{'A'}, std::byte{'T'}, std::byte{'N'}};

bool valid_dtype(std::uint8_t code) { return code <= 2; }

// Element count with overflow detection; throws on invalid dims.
std::uint64_t checked_count(const std::vector<std::uint64_t>& shape) {
  if (shape.empty() || shape.size() > kMaxTensorDims) {
    throw FormatError(FormatErrc::invalid_shape, "ndim " + std::to_string(shape.size()) + " outside [1, 8]");
  }
  std::uint64_t n = 1;
  for (auto d : shape) {
    if (d == 0) throw FormatError(FormatErrc::invalid_shape, "zero-sized dimension");
    if (d > kMaxTensorElements || n > kMaxTensorElements / d) {
      throw FormatError(FormatErrc::shape_overflow, "more than 2^48 elements");
    }
    n *= d;
  }
  return n;
}

template <typename T>
void put_le(std::vector<std::byte>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::byte>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(std::span<const std::byte> in, std::size_t offset) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<std::uint64_t>(std::to_integer<std::uint8_t>(in[offset + i])) << (8 * i);
  }
  return static_cast<T>(v);
}

void swap_elements(std::vector<std::byte>& data, std::size_t width) {
  if (width <= 1) return;
  for (std::size_t i = 0; i + width <= data.size(); i += width) {
    std::reverse(data.begin() + static_cast<std::ptrdiff_t>(i),
                 data.begin() + static_cast<std::ptrdiff_t>(i + width));
  }
}

template <typename T>
TensorFile from_values(DType dtype, std::vector<std::uint64_t> shape, std::span<const T> values) {
  TensorFile t;
  t.dtype = dtype;
  t.shape = std::move(shape);
  t.data.resize(values.size_bytes());
  if (!values.empty()) std::memcpy(t.data.data(), values.data(), values.size_bytes());
  t.validate();
  return t;
}

template <typename T>
std::vector<T> to_values(const TensorFile& t, DType expected) {
  if (t.dtype != expected) {
    throw InvalidArgument(std::string("tensor has dtype ") + to_string(t.dtype) + ", expected " + to_string(expected));
  }
  std::vector<T> out(t.data.size() / sizeof(T));
  if (!out.empty()) std::memcpy(out.data(), t.data.data(), out.size() * sizeof(T));
  return out;
}

}  // namespace

std::uint64_t TensorFile::element_count() const { return checked_count(shape); }

void TensorFile::validate() const {
  if (!valid_dtype(static_cast<std::uint8_t>(dtype))) {
    throw FormatError(FormatErrc::unsupported_dtype, "code " + std::to_string(static_cast<int>(dtype)));
  }
  const std::uint64_t n = element_count();
  if (n * dtype_size(dtype) != data.size()) {
    throw FormatError(FormatErrc::invalid_shape, "shape implies " + std::to_string(n * dtype_size(dtype)) +
                                                     " payload bytes, have " + std::to_string(data.size()));
  }
}

TensorFile TensorFile::from_floats(std::vector<std::uint64_t> shape, std::span<const float> values) {
  return from_values(DType::float32, std::move(shape), values);
}
TensorFile TensorFile::from_uint8(std::vector<std::uint64_t> shape, std::span<const std::uint8_t> values) {
  return from_values(DType::uint8, std::move(shape), values);
}
TensorFile TensorFile::from_int32(std::vector<std::uint64_t> shape, std::span<const std::int32_t> values) {
  return from_values(DType::int32, std::move(shape), values);
}

std::vector<float> TensorFile::to_floats() const { return to_values<float>(*this, DType::float32); }
std::vector<std::uint8_t> TensorFile::to_uint8() const { return to_values<std::uint8_t>(*this, DType::uint8); }
std::vector<std::int32_t> TensorFile::to_int32() const { return to_values<std::int32_t>(*this, DType::int32); }

void byteswap_payload(TensorFile& t) { swap_elements(t.data, dtype_size(t.dtype)); }

std::vector<std::byte> encode_tensor(const TensorFile& t) {
  t.validate();
  std::vector<std::byte> out;
  out.reserve(tensor_header_size(t.shape.size()) + t.data.size());
  for (auto b : kMagic) out.push_back(b);
  put_le<std::uint32_t>(out, kTensorVersion);
  out.push_back(static_cast<std::byte>(t.dtype));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.shape.size()));
  for (auto d : t.shape) put_le<std::uint64_t>(out, d);
  const std::size_t payload_at = out.size();
  out.insert(out.end(), t.data.begin(), t.data.end());
  if constexpr (std::endian::native == std::endian::big) {
    std::vector<std::byte> payload(out.begin() + static_cast<std::ptrdiff_t>(payload_at), out.end());
    swap_elements(payload, dtype_size(t.dtype));
    std::copy(payload.begin(), payload.end(), out.begin() + static_cast<std::ptrdiff_t>(payload_at));
  }
  return out;
}

TensorFile decode_tensor(std::span<const std::byte> bytes) {
  if (bytes.size() < 4 || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw FormatError(FormatErrc::bad_magic, "not a SATN tensor file");
  }
  if (bytes.size() < 13) throw FormatError(FormatErrc::truncated, "header shorter than 13 bytes");
  const auto version = get_le<std::uint32_t>(bytes, 4);
  if (version != kTensorVersion) {
    throw FormatError(FormatErrc::unsupported_version, "version " + std::to_string(version));
  }
  const auto dtype_code = std::to_integer<std::uint8_t>(bytes[8]);
  if (!valid_dtype(dtype_code)) {
    throw FormatError(FormatErrc::unsupported_dtype, "code " + std::to_string(dtype_code));
  }
  const auto ndim = get_le<std::uint32_t>(bytes, 9);
  if (ndim == 0 || ndim > kMaxTensorDims) {
    throw FormatError(FormatErrc::invalid_shape, "ndim " + std::to_string(ndim) + " outside [1, 8]");
  }
  const std::size_t header = tensor_header_size(ndim);
  if (bytes.size() < header) throw FormatError(FormatErrc::truncated, "header dims cut short");

  TensorFile t;
  t.dtype = static_cast<DType>(dtype_code);
  t.shape.resize(ndim);
  for (std::uint32_t i = 0; i < ndim; ++i) t.shape[i] = get_le<std::uint64_t>(bytes, 13 + 8 * i);
  const std::uint64_t payload = checked_count(t.shape) * dtype_size(t.dtype);
  const std::uint64_t available = bytes.size() - header;
  if (available < payload) {
    throw FormatError(FormatErrc::truncated,
                      "expected " + std::to_string(payload) + " payload bytes, found " + std::to_string(available));
  }
  if (available > payload) {
    throw FormatError(FormatErrc::trailing_data, std::to_string(available - payload) + " extra bytes");
  }
  t.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header), bytes.end());
  if constexpr (std::endian::native == std::endian::big) byteswap_payload(t);
  return t;
}

void write_tensor(const TensorFile& t, const std::filesystem::path& path) {
  const auto bytes = encode_tensor(t);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(FormatErrc::io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError(FormatErrc::io, "write failed for " + path.string());
}

TensorFile read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatErrc::io, "cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<std::byte> bytes(size);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
  if (!in) throw FormatError(FormatErrc::io, "read failed for " + path.string());
  return decode_tensor(bytes);
}

TensorFile matrix_to_tensor(const Matrix& m) {
  std::vector<float> values(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      values[static_cast<std::size_t>(i * m.cols() + j)] = static_cast<float>(m(i, j));
  return TensorFile::from_floats({static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())}, values);
}

Matrix tensor_to_matrix(const TensorFile& t) {
  if (t.shape.size() != 2) throw InvalidArgument("expected a 2-D tensor");
  const auto values = t.to_floats();
  const auto rows = static_cast<Eigen::Index>(t.shape[0]);
  const auto cols = static_cast<Eigen::Index>(t.shape[1]);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = values[static_cast<std::size_t>(i * cols + j)];
  return m;
}

}  // namespace walkcut
