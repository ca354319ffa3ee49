#pragma once

// Dataset manifests: one JSON object per line,
//   {"image_id": "...", "attention": {"8": path, ..., "64": path}, "gt": path|null, "size": [H, W]}
// An optional "image" key names the RGB input used for overlays.
// Relative paths are resolved against the manifest's directory.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace walkcut {

struct ManifestEntry {
  std::string image_id;
  std::map<int, std::filesystem::path> attention;  ///< latent side -> tensor path
  std::optional<std::filesystem::path> gt;
  std::optional<std::filesystem::path> image;
  int height = 0;
  int width = 0;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
};

struct ManifestOptions {
  bool check_paths = true;  ///< require every referenced file to exist
};

DatasetManifest load_manifest(const std::filesystem::path& path, const ManifestOptions& options = {});

/// Writes paths relative to the manifest directory when they live under it.
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

}  // namespace walkcut
