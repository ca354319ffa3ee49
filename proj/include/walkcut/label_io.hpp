#pragma once

// PNG and tensor I/O for label maps, plus colour overlays.

#include "walkcut/refine.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace walkcut {

/// 8-bit grayscale when every label fits in a byte, 16-bit otherwise.
void write_label_png(const LabelMap& labels, const std::filesystem::path& path);

/// Reads a grayscale (8/16-bit) or palette PNG as labels.
LabelMap read_label_png(const std::filesystem::path& path);

/// Reads labels from a PNG, or from a 2-D uint8/int32 tensor file.
LabelMap read_label_map(const std::filesystem::path& path);

void write_label_tensor(const LabelMap& labels, const std::filesystem::path& path);

struct RgbImage {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;  ///< interleaved RGB
};

RgbImage read_rgb_png(const std::filesystem::path& path);
void write_rgb_png(const RgbImage& image, const std::filesystem::path& path);

/// Fixed palette colour for a segment id.
std::array<std::uint8_t, 3> label_color(std::uint16_t label);

/// Colour-coded labels; blended at 50% onto `base` when given (sizes must match).
RgbImage colorize(const LabelMap& labels, const RgbImage* base = nullptr);

}  // namespace walkcut
