#pragma once

// Hungarian-matched segmentation metrics and dataset evaluation strategies.

#include "walkcut/refine.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace walkcut {

inline constexpr std::uint16_t kDefaultIgnoreLabel = 255;

/// Pixel overlap counts between predicted segments (rows) and gt classes (columns).
struct ContingencyTable {
  int num_pred = 0;
  int num_gt = 0;
  std::vector<std::int64_t> counts;  ///< num_pred x num_gt, row-major
  std::vector<std::int64_t> pred_sizes;
  std::vector<std::int64_t> gt_sizes;
  std::int64_t ignore_count = 0;

  std::int64_t at(int i, int j) const { return counts[static_cast<std::size_t>(i) * num_gt + j]; }
  std::int64_t& at(int i, int j) { return counts[static_cast<std::size_t>(i) * num_gt + j]; }
  std::int64_t labelled_pixels() const;
};

/// Columns cover classes [0, num_classes); by default max gt class + 1.
ContingencyTable contingency(const LabelMap& pred, const LabelMap& gt, std::uint16_t ignore_label = kDefaultIgnoreLabel,
                             std::optional<int> num_classes = std::nullopt);

enum class MatchObjective { overlap, iou };

struct MatchResult {
  std::vector<int> assignment;  ///< per predicted id: gt class, or -1
  std::vector<int> unmatched_preds;
  double objective = 0.0;       ///< total matched overlap (or IoU sum)
};

/// Maximum-weight injective matching, O(max(K, C)^3). Pairs with zero overlap
/// are left unmatched.
MatchResult hungarian_match(const ContingencyTable& table, MatchObjective objective = MatchObjective::overlap);

/// Rectangular assignment on a general weight matrix (rows x cols), maximizing
/// the total. Returns the column of each row, -1 when the row is unassigned.
std::vector<int> max_weight_assignment(const std::vector<double>& weights, int rows, int cols);

/// gt class x (class or "none") pixel counts after relabelling matched
/// predictions. Column num_classes holds pixels of unmatched predictions.
struct ConfusionMatrix {
  int num_classes = 0;
  std::vector<std::int64_t> counts;  ///< num_classes x (num_classes + 1)

  explicit ConfusionMatrix(int classes = 0)
      : num_classes(classes), counts(static_cast<std::size_t>(classes) * static_cast<std::size_t>(classes + 1), 0) {}
  std::int64_t at(int gt, int pred) const { return counts[static_cast<std::size_t>(gt) * (num_classes + 1) + pred]; }
  std::int64_t& at(int gt, int pred) { return counts[static_cast<std::size_t>(gt) * (num_classes + 1) + pred]; }
  std::int64_t total() const;
  void accumulate(const ConfusionMatrix& other);
};

ConfusionMatrix relabel(const ContingencyTable& table, const MatchResult& match);

enum class Strategy { global, per_image, oracle_merged };
const char* to_string(Strategy s);
Strategy parse_strategy(const std::string& s);

struct ClassScore {
  int class_id = 0;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  double iou = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  Strategy strategy = Strategy::global;
  double accuracy = 0.0;
  double f1 = 0.0;
  double miou = 0.0;
  int n_images = 0;
  int n_skipped = 0;
  bool empty = false;  ///< no labelled pixels
  std::vector<ClassScore> per_class;
};

MetricsReport metrics_from_confusion(const ConfusionMatrix& conf);
MetricsReport compute_metrics(const ContingencyTable& table, const MatchResult& match);

struct EvalOptions {
  std::uint16_t ignore_label = kDefaultIgnoreLabel;
  MatchObjective objective = MatchObjective::overlap;
  std::optional<int> num_classes;  ///< default: max gt class over the dataset + 1
};

struct LabelPair {
  const LabelMap* pred = nullptr;
  const LabelMap* gt = nullptr;
};

/// Per-image failures (size mismatch) are skipped and counted in n_skipped.
MetricsReport evaluate_dataset(const std::vector<LabelPair>& pairs, Strategy strategy, const EvalOptions& options = {});

/// Scores already-relabelled per-image confusions: global sums them, the
/// other strategies average per-image metrics. Empty images are excluded.
MetricsReport evaluate_confusions(const std::vector<ConfusionMatrix>& confusions, Strategy strategy);

/// Relabels every predicted segment with the gt class of its plurality
/// overlap (ties: lower class). Segments seeing only ignored pixels get fresh
/// labels above every class id, skipping the ignore label.
LabelMap oracle_merge(const LabelMap& pred, const LabelMap& gt, std::uint16_t ignore_label = kDefaultIgnoreLabel);

nlohmann::json to_json(const MetricsReport& report);
std::string to_text(const MetricsReport& report);

}  // namespace walkcut
