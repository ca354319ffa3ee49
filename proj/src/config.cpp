#include "walkcut/config.hpp"

#include "walkcut/error.hpp"
#include "walkcut/walk.hpp"

#include <toml.hpp>

#include <cmath>
#include <cstdlib>
#include <thread>

namespace walkcut {

void RunConfig::validate() const {
  rule.validate();
  WalkConfig{walk_k}.validate();
  if (resolutions.empty()) throw ConfigError("at least one resolution must be enabled");
  for (int r : resolutions) {
    if (!kSupportedResolutions.count(r)) throw ConfigError("unsupported resolution " + std::to_string(r) + " (expected 8, 16, 32 or 64)");
  }
  if (weights) {
    if (weights->size() != resolutions.size()) throw ConfigError("weights must have one entry per enabled resolution");
    for (double w : *weights) {
      if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("weights must be positive and finite");
    }
  }
  if (output_size && (output_size->first < 1 || output_size->second < 1)) throw ConfigError("output size must be positive");
  if (memory_budget == 0) throw ConfigError("memory budget must be positive");
  if (threads && *threads < 1) throw ConfigError("threads must be >= 1");
  if (threshold_candidates < 0) throw ConfigError("threshold candidates must be >= 0 (0 = every midpoint)");
  const int side = *resolutions.rbegin();
  if (rule.kind == StopKind::manc_scaled_mincut && rule.min_cut_mode == MinCutMode::exact &&
      side * side > kMaxExactMinCutVertices) {
    throw ConfigError("exact minimum cut supports at most " + std::to_string(kMaxExactMinCutVertices) + " vertices; finest side " +
                      std::to_string(side) + " gives " + std::to_string(side * side) + " (use --min-cut proxy)");
  }
  if (output_size && (output_size->first < side || output_size->second < side)) {
    throw ConfigError("output size must be at least the finest latent side");
  }
}

Formulation parse_formulation(const std::string& s) {
  if (s == "adjacency") return Formulation::adjacency;
  if (s == "random_walk") return Formulation::random_walk;
  throw ConfigError("unknown formulation '" + s + "' (expected adjacency or random_walk)");
}

Similarity parse_similarity(const std::string& s) {
  if (s == "dot") return Similarity::dot;
  if (s == "cosine") return Similarity::cosine;
  throw ConfigError("unknown similarity '" + s + "' (expected dot or cosine)");
}

StopKind parse_stop_kind(const std::string& s) {
  if (s == "fixed_ncut") return StopKind::fixed_ncut;
  if (s == "manc_ncut") return StopKind::manc_ncut;
  if (s == "manc_scaled_mincut") return StopKind::manc_scaled_mincut;
  throw ConfigError("unknown rule '" + s + "' (expected fixed_ncut, manc_ncut or manc_scaled_mincut)");
}

MinCutMode parse_min_cut_mode(const std::string& s) {
  if (s == "exact") return MinCutMode::exact;
  if (s == "proxy") return MinCutMode::proxy;
  throw ConfigError("unknown min-cut mode '" + s + "' (expected exact or proxy)");
}

const char* to_string(Similarity s) { return s == Similarity::dot ? "dot" : "cosine"; }

namespace {

template <typename T>
T required(const toml::node& node, const std::string& key) {
  auto v = node.value<T>();
  if (!v) throw ConfigError("config key '" + key + "' has the wrong type");
  return *v;
}

std::vector<double> number_list(const toml::node& node, const std::string& key) {
  const auto* arr = node.as_array();
  if (!arr) throw ConfigError("config key '" + key + "' must be an array");
  std::vector<double> out;
  for (const auto& item : *arr) out.push_back(required<double>(item, key));
  return out;
}

}  // namespace

void apply_toml(RunConfig& config, const std::filesystem::path& path) {
  toml::table table;
  try {
    table = toml::parse_file(path.string());
  } catch (const toml::parse_error& e) {
    throw ConfigError(path.string() + ": " + std::string(e.description()));
  }
  for (const auto& [k, node] : table) {
    const std::string key(k.str());
    if (key == "formulation") {
      config.formulation = parse_formulation(required<std::string>(node, key));
    } else if (key == "similarity") {
      config.similarity = parse_similarity(required<std::string>(node, key));
    } else if (key == "rule") {
      config.rule.kind = parse_stop_kind(required<std::string>(node, key));
    } else if (key == "tau") {
      config.rule.tau = required<double>(node, key);
    } else if (key == "min_segment_size") {
      config.rule.min_segment_size = static_cast<int>(required<std::int64_t>(node, key));
    } else if (key == "min_cut") {
      config.rule.min_cut_mode = parse_min_cut_mode(required<std::string>(node, key));
    } else if (key == "walk_k") {
      config.walk_k = static_cast<int>(required<std::int64_t>(node, key));
    } else if (key == "resolutions") {
      config.resolutions.clear();
      for (double r : number_list(node, key)) config.resolutions.insert(static_cast<int>(r));
    } else if (key == "weights") {
      config.weights = number_list(node, key);
    } else if (key == "output_size") {
      const auto v = number_list(node, key);
      if (v.size() != 2) throw ConfigError("output_size must be [height, width]");
      config.output_size = std::pair{static_cast<int>(v[0]), static_cast<int>(v[1])};
    } else if (key == "memory_budget") {
      const auto v = required<std::int64_t>(node, key);
      if (v <= 0) throw ConfigError("memory_budget must be positive");
      config.memory_budget = static_cast<std::size_t>(v);
    } else if (key == "threads") {
      config.threads = static_cast<int>(required<std::int64_t>(node, key));
    } else if (key == "threshold_candidates") {
      config.threshold_candidates = static_cast<int>(required<std::int64_t>(node, key));
    } else if (key == "interpolate_scores") {
      config.interpolate_scores = required<bool>(node, key);
    } else {
      throw ConfigError(path.string() + ": unknown key '" + key + "'");
    }
  }
}

int resolve_threads(const RunConfig& config) {
  if (config.threads) return *config.threads;
  if (const char* env = std::getenv("WALKCUT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
    throw ConfigError("WALKCUT_THREADS must be a positive integer, got '" + std::string(env) + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace walkcut
