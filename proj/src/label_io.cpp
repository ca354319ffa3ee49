#include "walkcut/label_io.hpp"

#include "walkcut/error.hpp"
#include "walkcut/tensor_store.hpp"

#include <png.h>

#include <array>
#include <cstdio>
#include <memory>
#include <string>

namespace walkcut {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw FormatError(FormatErrc::io, "cannot open " + path.string());
  return f;
}

[[noreturn]] void png_fail(png_structp png, png_const_charp msg) {
  auto* what = static_cast<std::string*>(png_get_error_ptr(png));
  if (what) *what = msg;
  png_longjmp(png, 1);
}

void png_warn(png_structp, png_const_charp) {}

// Decoded PNG: 8-bit or 16-bit samples, `channels` per pixel.
struct RawPng {
  int height = 0;
  int width = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint16_t> samples;
};

RawPng decode_png(const std::filesystem::path& path, bool expand_palette) {
  auto file = open_file(path, "rb");
  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_fail, png_warn);
  if (!png) throw FormatError(FormatErrc::io, "libpng init failed");
  png_infop info = png_create_info_struct(png);
  RawPng out;
  std::vector<png_bytep> rows;
  std::vector<png_byte> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(FormatErrc::truncated, path.string() + ": " + error);
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  const auto color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE && expand_palette) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color == PNG_COLOR_TYPE_PALETTE && !expand_palette) png_set_packing(png);
  png_set_swap(png);  // 16-bit samples in host order (little-endian hosts)
  png_read_update_info(png, info);
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  buffer.resize(stride * static_cast<std::size_t>(out.height));
  rows.resize(static_cast<std::size_t>(out.height));
  for (int y = 0; y < out.height; ++y) rows[static_cast<std::size_t>(y)] = buffer.data() + stride * static_cast<std::size_t>(y);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t n = static_cast<std::size_t>(out.height) * static_cast<std::size_t>(out.width) * static_cast<std::size_t>(out.channels);
  out.samples.resize(n);
  if (out.bit_depth == 16) {
    for (std::size_t i = 0; i < n; ++i) {
      out.samples[i] = static_cast<std::uint16_t>(buffer[2 * i] | (buffer[2 * i + 1] << 8));
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) out.samples[i] = buffer[i];
  }
  return out;
}

void encode_png(const std::filesystem::path& path, int height, int width, int color_type, int bit_depth,
                const std::vector<png_byte>& bytes) {
  auto file = open_file(path, "wb");
  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, png_fail, png_warn);
  if (!png) throw FormatError(FormatErrc::io, "libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw FormatError(FormatErrc::io, path.string() + ": " + error);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = bytes.size() / static_cast<std::size_t>(height);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(bytes.data() + stride * static_cast<std::size_t>(y)));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

void write_label_png(const LabelMap& labels, const std::filesystem::path& path) {
  if (labels.height < 1 || labels.width < 1) throw InvalidArgument("cannot write an empty label map");
  const bool wide = labels.max_label() > 255;
  std::vector<png_byte> bytes;
  bytes.reserve(labels.labels.size() * (wide ? 2 : 1));
  for (auto l : labels.labels) {
    if (wide) {
      bytes.push_back(static_cast<png_byte>(l >> 8));  // PNG is big-endian
      bytes.push_back(static_cast<png_byte>(l & 0xff));
    } else {
      bytes.push_back(static_cast<png_byte>(l));
    }
  }
  encode_png(path, labels.height, labels.width, PNG_COLOR_TYPE_GRAY, wide ? 16 : 8, bytes);
}

LabelMap read_label_png(const std::filesystem::path& path) {
  const RawPng raw = decode_png(path, false);
  if (raw.channels != 1) {
    throw FormatError(FormatErrc::invalid_shape, path.string() + ": label PNG must be grayscale or palette");
  }
  LabelMap m(raw.height, raw.width);
  for (std::size_t i = 0; i < m.labels.size(); ++i) m.labels[i] = raw.samples[i];
  return m;
}

LabelMap read_label_map(const std::filesystem::path& path) {
  if (path.extension() == ".png") return read_label_png(path);
  const TensorFile t = read_tensor(path);
  if (t.shape.size() != 2) throw FormatError(FormatErrc::invalid_shape, path.string() + ": label tensor must be 2-D");
  LabelMap m(static_cast<int>(t.shape[0]), static_cast<int>(t.shape[1]));
  if (t.dtype == DType::uint8) {
    const auto v = t.to_uint8();
    for (std::size_t i = 0; i < v.size(); ++i) m.labels[i] = v[i];
  } else if (t.dtype == DType::int32) {
    const auto v = t.to_int32();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] < 0 || v[i] > 65535) throw FormatError(FormatErrc::invalid_shape, path.string() + ": label out of range");
      m.labels[i] = static_cast<std::uint16_t>(v[i]);
    }
  } else {
    throw FormatError(FormatErrc::unsupported_dtype, path.string() + ": labels must be uint8 or int32");
  }
  return m;
}

void write_label_tensor(const LabelMap& labels, const std::filesystem::path& path) {
  std::vector<std::int32_t> v(labels.labels.begin(), labels.labels.end());
  write_tensor(TensorFile::from_int32({static_cast<std::uint64_t>(labels.height), static_cast<std::uint64_t>(labels.width)}, v),
               path);
}

RgbImage read_rgb_png(const std::filesystem::path& path) {
  const RawPng raw = decode_png(path, true);
  RgbImage img{raw.height, raw.width, {}};
  const std::size_t n = static_cast<std::size_t>(raw.height) * static_cast<std::size_t>(raw.width);
  img.pixels.resize(3 * n);
  const int shift = raw.bit_depth == 16 ? 8 : 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      // Gray and gray+alpha replicate the first sample.
      const int src = raw.channels >= 3 ? c : 0;
      img.pixels[3 * i + static_cast<std::size_t>(c)] =
          static_cast<std::uint8_t>(raw.samples[i * static_cast<std::size_t>(raw.channels) + static_cast<std::size_t>(src)] >> shift);
    }
  }
  return img;
}

void write_rgb_png(const RgbImage& image, const std::filesystem::path& path) {
  if (image.pixels.size() != 3 * static_cast<std::size_t>(image.height) * static_cast<std::size_t>(image.width) || image.height < 1) {
    throw InvalidArgument("RGB image size mismatch");
  }
  encode_png(path, image.height, image.width, PNG_COLOR_TYPE_RGB, 8, image.pixels);
}

std::array<std::uint8_t, 3> label_color(std::uint16_t label) {
  static constexpr std::array<std::array<std::uint8_t, 3>, 12> kPalette{{
      {230, 25, 75}, {60, 180, 75}, {255, 225, 25}, {0, 130, 200}, {245, 130, 48}, {145, 30, 180},
      {70, 240, 240}, {240, 50, 230}, {210, 245, 60}, {250, 190, 212}, {0, 128, 128}, {170, 110, 40},
  }};
  if (label < kPalette.size()) return kPalette[label];
  // Knuth multiplicative hash for the rest.
  const std::uint32_t h = static_cast<std::uint32_t>(label) * 2654435761u;
  return {static_cast<std::uint8_t>(h >> 24), static_cast<std::uint8_t>(h >> 16), static_cast<std::uint8_t>(h >> 8)};
}

RgbImage colorize(const LabelMap& labels, const RgbImage* base) {
  if (base && (base->height != labels.height || base->width != labels.width)) {
    throw InvalidArgument("overlay base image size does not match the label map");
  }
  RgbImage out{labels.height, labels.width, std::vector<std::uint8_t>(3 * labels.labels.size())};
  for (std::size_t i = 0; i < labels.labels.size(); ++i) {
    const auto c = label_color(labels.labels[i]);
    for (std::size_t k = 0; k < 3; ++k) {
      out.pixels[3 * i + k] = base ? static_cast<std::uint8_t>((c[k] + base->pixels[3 * i + k] + 1) / 2) : c[k];
    }
  }
  return out;
}

}  // namespace walkcut
