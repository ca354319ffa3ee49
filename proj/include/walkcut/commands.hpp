#pragma once

// Subcommand implementations behind the walkcut executable.

#include "walkcut/config.hpp"
#include "walkcut/metrics.hpp"
#include "walkcut/partitioner.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace walkcut {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitPartial = 3 };

/// Writes <id>.png, <id>_overlay.png, <id>_tree.json per entry and summary.json.
int cmd_segment(const std::filesystem::path& manifest, const RunConfig& config, const std::filesystem::path& out_dir,
                std::ostream& log);

struct EvaluateOptions {
  Strategy strategy = Strategy::per_image;
  EvalOptions eval;
  std::filesystem::path out_dir;  ///< default: the prediction directory
};

/// Scores <pred_dir>/<id>.png against each manifest gt; writes report.json and report.txt.
int cmd_evaluate(const std::filesystem::path& pred_dir, const std::filesystem::path& manifest,
                 const EvaluateOptions& options, std::ostream& out, std::ostream& log);

struct SynthOptions {
  int count = 4;
  int latent_side = 64;
  std::vector<int> resolutions{8, 16, 32, 64};
  int min_blocks = 2;
  int max_blocks = 6;
  double intra = 0.9;
  double noise = 0.05;
  int output_scale = 4;  ///< image side = latent_side * output_scale
  std::uint64_t seed = 1;
};

/// Writes a manifest, attention tensors and gt label maps with planted blocks.
int cmd_synth(const std::filesystem::path& out_dir, const SynthOptions& options, std::ostream& log);

int cmd_inspect(const std::filesystem::path& tensor, std::ostream& out, std::ostream& err);

/// Run-length encoding of a sorted index list as [start, length] pairs.
nlohmann::json rle_indices(const IndexSet& sorted_indices);
nlohmann::json tree_to_json(const SegmentationTree& tree);

}  // namespace walkcut
