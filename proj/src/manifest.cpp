#include "walkcut/manifest.hpp"

#include "walkcut/error.hpp"

#include <json.hpp>

#include <fstream>
#include <set>

namespace walkcut {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

ManifestEntry parse_entry(const json& j, const fs::path& base, std::size_t line) {
  auto fail = [line](const std::string& msg) { return ManifestError(ManifestErrc::parse, line, msg); };
  if (!j.is_object()) throw fail("expected a JSON object");

  ManifestEntry e;
  if (!j.contains("image_id") || !j["image_id"].is_string()) throw fail("missing string field \"image_id\"");
  e.image_id = j["image_id"].get<std::string>();
  if (e.image_id.empty()) throw fail("empty image_id");

  if (!j.contains("attention") || !j["attention"].is_object()) throw fail("missing object field \"attention\"");
  for (const auto& [key, value] : j["attention"].items()) {
    int side = 0;
    try {
      std::size_t used = 0;
      side = std::stoi(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw fail("attention key \"" + key + "\" is not an integer side length");
    }
    if (side < 1) throw fail("attention side must be positive");
    if (!value.is_string()) throw fail("attention path for side " + key + " must be a string");
    e.attention[side] = resolve(base, value.get<std::string>());
  }

  if (j.contains("gt") && !j["gt"].is_null()) {
    if (!j["gt"].is_string()) throw fail("\"gt\" must be a string or null");
    e.gt = resolve(base, j["gt"].get<std::string>());
  }
  if (j.contains("image") && !j["image"].is_null()) {
    if (!j["image"].is_string()) throw fail("\"image\" must be a string or null");
    e.image = resolve(base, j["image"].get<std::string>());
  }

  if (!j.contains("size") || !j["size"].is_array() || j["size"].size() != 2 || !j["size"][0].is_number_integer() ||
      !j["size"][1].is_number_integer()) {
    throw fail("\"size\" must be [H, W]");
  }
  e.height = j["size"][0].get<int>();
  e.width = j["size"][1].get<int>();
  if (e.height < 1 || e.width < 1) throw fail("image size must be positive");
  return e;
}

}  // namespace

DatasetManifest load_manifest(const fs::path& path, const ManifestOptions& options) {
  std::ifstream in(path);
  if (!in) throw ManifestError(ManifestErrc::io, 0, "cannot open " + path.string());
  const fs::path base = path.parent_path();

  DatasetManifest manifest;
  std::set<std::string> seen;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& err) {
      throw ManifestError(ManifestErrc::parse, line, err.what());
    }
    auto entry = parse_entry(j, base, line);
    if (!seen.insert(entry.image_id).second) {
      throw ManifestError(ManifestErrc::duplicate_id, line, "duplicate image_id \"" + entry.image_id + "\"");
    }
    if (options.check_paths) {
      auto require = [&](const fs::path& p) {
        if (!fs::exists(p)) throw ManifestError(ManifestErrc::missing_path, line, "missing file " + p.string());
      };
      for (const auto& [side, p] : entry.attention) require(p);
      if (entry.gt) require(*entry.gt);
      if (entry.image) require(*entry.image);
    }
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

void write_manifest(const DatasetManifest& manifest, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ManifestError(ManifestErrc::io, 0, "cannot open " + path.string() + " for writing");
  const fs::path base = path.parent_path().empty() ? fs::path(".") : path.parent_path();
  auto rel = [&](const fs::path& p) {
    auto r = p.lexically_relative(base);
    return (r.empty() || *r.begin() == "..") ? p.generic_string() : r.generic_string();
  };
  for (const auto& e : manifest.entries) {
    json j;
    j["image_id"] = e.image_id;
    j["attention"] = json::object();
    for (const auto& [side, p] : e.attention) j["attention"][std::to_string(side)] = rel(p);
    j["gt"] = e.gt ? json(rel(*e.gt)) : json(nullptr);
    if (e.image) j["image"] = rel(*e.image);
    j["size"] = {e.height, e.width};
    out << j.dump() << '\n';
  }
}

}  // namespace walkcut
