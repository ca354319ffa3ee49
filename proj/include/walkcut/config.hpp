#pragma once

// Run configuration shared by the pipeline and the command line.

#include "walkcut/graph.hpp"
#include "walkcut/partitioner.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace walkcut {

inline const std::set<int> kSupportedResolutions{8, 16, 32, 64};

struct RunConfig {
  Formulation formulation = Formulation::adjacency;
  Similarity similarity = Similarity::dot;
  StoppingRule rule = StoppingRule::manc_ncut();
  int walk_k = 1;
  std::set<int> resolutions{16, 32, 64};
  std::optional<std::vector<double>> weights;      ///< one per resolution, ascending side order
  std::optional<std::pair<int, int>> output_size;  ///< default: the manifest size
  std::size_t memory_budget = std::size_t{512} << 20;
  std::optional<int> threads;                      ///< default: WALKCUT_THREADS, then hardware
  int threshold_candidates = kAllThresholds;
  bool interpolate_scores = false;

  /// Throws ConfigError on any combination a module would reject.
  void validate() const;
};

Formulation parse_formulation(const std::string& s);
Similarity parse_similarity(const std::string& s);
StopKind parse_stop_kind(const std::string& s);
MinCutMode parse_min_cut_mode(const std::string& s);
const char* to_string(Similarity s);

/// Overwrites the fields present in a TOML file. Unknown keys are rejected.
void apply_toml(RunConfig& config, const std::filesystem::path& path);

/// config.threads, else WALKCUT_THREADS, else the hardware concurrency (>= 1).
int resolve_threads(const RunConfig& config);

}  // namespace walkcut
