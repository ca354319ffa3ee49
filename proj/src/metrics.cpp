#include "walkcut/metrics.hpp"

#include "walkcut/error.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace walkcut {

std::int64_t ContingencyTable::labelled_pixels() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

ContingencyTable contingency(const LabelMap& pred, const LabelMap& gt, std::uint16_t ignore_label,
                             std::optional<int> num_classes) {
  if (pred.height != gt.height || pred.width != gt.width) {
    throw InvalidArgument("prediction " + std::to_string(pred.height) + "x" + std::to_string(pred.width) +
                          " does not match ground truth " + std::to_string(gt.height) + "x" + std::to_string(gt.width));
  }
  ContingencyTable t;
  int max_gt = -1;
  for (auto g : gt.labels)
    if (g != ignore_label) max_gt = std::max(max_gt, static_cast<int>(g));
  t.num_gt = num_classes.value_or(max_gt + 1);
  if (max_gt >= t.num_gt) throw InvalidArgument("ground-truth class " + std::to_string(max_gt) + " exceeds num_classes");
  t.num_pred = pred.labels.empty() ? 0 : static_cast<int>(pred.max_label()) + 1;
  t.counts.assign(static_cast<std::size_t>(t.num_pred) * static_cast<std::size_t>(t.num_gt), 0);
  t.pred_sizes.assign(static_cast<std::size_t>(t.num_pred), 0);
  t.gt_sizes.assign(static_cast<std::size_t>(t.num_gt), 0);
  for (std::size_t i = 0; i < gt.labels.size(); ++i) {
    if (gt.labels[i] == ignore_label) {
      ++t.ignore_count;
      continue;
    }
    ++t.at(pred.labels[i], gt.labels[i]);
    ++t.pred_sizes[pred.labels[i]];
    ++t.gt_sizes[gt.labels[i]];
  }
  return t;
}

std::vector<int> max_weight_assignment(const std::vector<double>& weights, int rows, int cols) {
  if (rows < 0 || cols < 0 || weights.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw InvalidArgument("assignment weight matrix has the wrong size");
  }
  std::vector<int> result(static_cast<std::size_t>(rows), -1);
  if (rows == 0 || cols == 0) return result;

  // Shortest augmenting paths with potentials on an n x m cost matrix, n <= m.
  const bool transposed = rows > cols;
  const int n = transposed ? cols : rows;
  const int m = transposed ? rows : cols;
  const auto cost = [&](int i, int j) {
    return -(transposed ? weights[static_cast<std::size_t>(j) * cols + i] : weights[static_cast<std::size_t>(i) * cols + j]);
  };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0), v(static_cast<std::size_t>(m) + 1, 0.0);
  std::vector<int> p(static_cast<std::size_t>(m) + 1, 0), way(static_cast<std::size_t>(m) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(m) + 1, inf);
    std::vector<bool> used(static_cast<std::size_t>(m) + 1, false);
    do {
      used[static_cast<std::size_t>(j0)] = true;
      const int i0 = p[static_cast<std::size_t>(j0)];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        if (used[ju]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[ju];
        if (cur < minv[ju]) {
          minv[ju] = cur;
          way[ju] = j0;
        }
        if (minv[ju] < delta) {
          delta = minv[ju];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        if (used[ju]) {
          u[static_cast<std::size_t>(p[ju])] += delta;
          v[ju] -= delta;
        } else {
          minv[ju] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  for (int j = 1; j <= m; ++j) {
    const int i = p[static_cast<std::size_t>(j)];
    if (i == 0) continue;
    if (transposed) {
      result[static_cast<std::size_t>(j - 1)] = i - 1;
    } else {
      result[static_cast<std::size_t>(i - 1)] = j - 1;
    }
  }
  return result;
}

MatchResult hungarian_match(const ContingencyTable& table, MatchObjective objective) {
  std::vector<double> w(table.counts.size());
  for (int i = 0; i < table.num_pred; ++i) {
    for (int j = 0; j < table.num_gt; ++j) {
      const double inter = static_cast<double>(table.at(i, j));
      if (objective == MatchObjective::overlap) {
        w[static_cast<std::size_t>(i) * table.num_gt + j] = inter;
      } else {
        const double uni = static_cast<double>(table.pred_sizes[static_cast<std::size_t>(i)] + table.gt_sizes[static_cast<std::size_t>(j)]) - inter;
        w[static_cast<std::size_t>(i) * table.num_gt + j] = uni > 0.0 ? inter / uni : 0.0;
      }
    }
  }
  MatchResult r;
  r.assignment = max_weight_assignment(w, table.num_pred, table.num_gt);
  for (int i = 0; i < table.num_pred; ++i) {
    int& j = r.assignment[static_cast<std::size_t>(i)];
    if (j >= 0 && table.at(i, j) == 0) j = -1;
    if (j < 0) {
      r.unmatched_preds.push_back(i);
    } else {
      r.objective += w[static_cast<std::size_t>(i) * table.num_gt + j];
    }
  }
  return r;
}

std::int64_t ConfusionMatrix::total() const { return std::accumulate(counts.begin(), counts.end(), std::int64_t{0}); }

void ConfusionMatrix::accumulate(const ConfusionMatrix& other) {
  if (other.num_classes > num_classes) {
    ConfusionMatrix grown(other.num_classes);
    for (int g = 0; g < num_classes; ++g) {
      for (int p = 0; p < num_classes; ++p) grown.at(g, p) = at(g, p);
      grown.at(g, other.num_classes) = at(g, num_classes);
    }
    *this = std::move(grown);
  }
  for (int g = 0; g < other.num_classes; ++g) {
    for (int p = 0; p < other.num_classes; ++p) at(g, p) += other.at(g, p);
    at(g, num_classes) += other.at(g, other.num_classes);
  }
}

ConfusionMatrix relabel(const ContingencyTable& table, const MatchResult& match) {
  if (match.assignment.size() != static_cast<std::size_t>(table.num_pred)) {
    throw InvalidArgument("match does not belong to this contingency table");
  }
  ConfusionMatrix conf(table.num_gt);
  for (int i = 0; i < table.num_pred; ++i) {
    const int target = match.assignment[static_cast<std::size_t>(i)];
    const int col = target < 0 ? table.num_gt : target;
    for (int g = 0; g < table.num_gt; ++g) conf.at(g, col) += table.at(i, g);
  }
  return conf;
}

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::global: return "global";
    case Strategy::per_image: return "per_image";
    case Strategy::oracle_merged: return "oracle_merged";
  }
  return "unknown";
}

Strategy parse_strategy(const std::string& s) {
  if (s == "global") return Strategy::global;
  if (s == "per_image") return Strategy::per_image;
  if (s == "oracle_merged") return Strategy::oracle_merged;
  throw ConfigError("unknown strategy '" + s + "' (expected global, per_image or oracle_merged)");
}

MetricsReport metrics_from_confusion(const ConfusionMatrix& conf) {
  MetricsReport r;
  const int c = conf.num_classes;
  std::int64_t tp_total = 0;
  std::int64_t gt_total = 0;
  double iou_sum = 0.0;
  double f1_sum = 0.0;
  int present = 0;
  for (int k = 0; k < c; ++k) {
    ClassScore s;
    s.class_id = k;
    s.tp = conf.at(k, k);
    std::int64_t gt_k = 0;
    for (int p = 0; p <= c; ++p) gt_k += conf.at(k, p);
    std::int64_t pred_k = 0;
    for (int g = 0; g < c; ++g) pred_k += conf.at(g, k);
    s.fn = gt_k - s.tp;
    s.fp = pred_k - s.tp;
    tp_total += s.tp;
    gt_total += gt_k;
    if (gt_k == 0) continue;  // absent classes are not averaged
    const double tp = static_cast<double>(s.tp);
    s.iou = tp / (tp + static_cast<double>(s.fp + s.fn));
    s.f1 = 2.0 * tp / (2.0 * tp + static_cast<double>(s.fp + s.fn));
    iou_sum += s.iou;
    f1_sum += s.f1;
    ++present;
    r.per_class.push_back(s);
  }
  if (gt_total == 0) {
    r.empty = true;
    return r;
  }
  r.accuracy = static_cast<double>(tp_total) / static_cast<double>(gt_total);
  r.miou = iou_sum / present;
  r.f1 = f1_sum / present;
  r.n_images = 1;
  return r;
}

MetricsReport compute_metrics(const ContingencyTable& table, const MatchResult& match) {
  return metrics_from_confusion(relabel(table, match));
}

MetricsReport evaluate_confusions(const std::vector<ConfusionMatrix>& confusions, Strategy strategy) {
  MetricsReport out;
  out.strategy = strategy;
  if (strategy == Strategy::global) {
    ConfusionMatrix sum;
    int used = 0;
    for (const auto& c : confusions) {
      if (c.total() == 0) {
        ++out.n_skipped;
        continue;
      }
      sum.accumulate(c);
      ++used;
    }
    MetricsReport r = metrics_from_confusion(sum);
    r.strategy = strategy;
    r.n_images = used;
    r.n_skipped = out.n_skipped;
    return r;
  }
  double acc = 0.0, f1 = 0.0, miou = 0.0;
  for (const auto& c : confusions) {
    const MetricsReport r = metrics_from_confusion(c);
    if (r.empty) {
      ++out.n_skipped;
      continue;
    }
    acc += r.accuracy;
    f1 += r.f1;
    miou += r.miou;
    ++out.n_images;
  }
  if (out.n_images == 0) {
    out.empty = true;
    return out;
  }
  out.accuracy = acc / out.n_images;
  out.f1 = f1 / out.n_images;
  out.miou = miou / out.n_images;
  return out;
}

LabelMap oracle_merge(const LabelMap& pred, const LabelMap& gt, std::uint16_t ignore_label) {
  const ContingencyTable t = contingency(pred, gt, ignore_label);
  int next = t.num_gt;
  LabelMap out(pred.height, pred.width);
  std::vector<int> target(static_cast<std::size_t>(t.num_pred), -1);
  for (int i = 0; i < t.num_pred; ++i) {
    int best = -1;
    std::int64_t best_count = 0;
    for (int j = 0; j < t.num_gt; ++j) {
      if (t.at(i, j) > best_count) {
        best_count = t.at(i, j);
        best = j;
      }
    }
    if (best < 0) {
      if (next == ignore_label) ++next;
      if (next > 65535) throw InvalidArgument("oracle_merge ran out of label ids");
      best = next++;
    }
    target[static_cast<std::size_t>(i)] = best;
  }
  for (std::size_t k = 0; k < pred.labels.size(); ++k) out.labels[k] = static_cast<std::uint16_t>(target[pred.labels[k]]);
  return out;
}

MetricsReport evaluate_dataset(const std::vector<LabelPair>& pairs, Strategy strategy, const EvalOptions& options) {
  if (pairs.empty()) throw InvalidArgument("evaluate_dataset needs at least one image");
  int classes = 0;
  if (options.num_classes) {
    classes = *options.num_classes;
  } else {
    for (const auto& p : pairs)
      for (auto g : p.gt->labels)
        if (g != options.ignore_label) classes = std::max(classes, static_cast<int>(g) + 1);
  }
  std::vector<ConfusionMatrix> confusions;
  int failed = 0;
  for (const auto& p : pairs) {
    try {
      const LabelMap merged = strategy == Strategy::oracle_merged ? oracle_merge(*p.pred, *p.gt, options.ignore_label) : LabelMap{};
      const LabelMap& pred = strategy == Strategy::oracle_merged ? merged : *p.pred;
      const ContingencyTable t = contingency(pred, *p.gt, options.ignore_label, classes);
      confusions.push_back(relabel(t, hungarian_match(t, options.objective)));
    } catch (const InvalidArgument&) {
      ++failed;
    }
  }
  MetricsReport r = evaluate_confusions(confusions, strategy);
  r.n_skipped += failed;
  return r;
}

nlohmann::json to_json(const MetricsReport& report) {
  nlohmann::json j{{"strategy", to_string(report.strategy)}, {"accuracy", report.accuracy}, {"f1", report.f1},
                   {"miou", report.miou}, {"n_images", report.n_images}, {"n_skipped", report.n_skipped}};
  if (report.empty) j["empty"] = true;
  if (!report.per_class.empty()) {
    auto& pc = j["per_class"] = nlohmann::json::array();
    for (const auto& c : report.per_class) {
      pc.push_back({{"class", c.class_id}, {"iou", c.iou}, {"f1", c.f1}, {"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}});
    }
  }
  return j;
}

std::string to_text(const MetricsReport& report) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "strategy  %s\nimages    %d (skipped %d)\n", to_string(report.strategy), report.n_images,
                report.n_skipped);
  os << line;
  std::snprintf(line, sizeof line, "accuracy  %.4f\nf1        %.4f\nmiou      %.4f\n", report.accuracy, report.f1, report.miou);
  os << line;
  if (!report.per_class.empty()) {
    os << "\nclass        iou       f1\n";
    for (const auto& c : report.per_class) {
      std::snprintf(line, sizeof line, "%5d  %8.4f %8.4f\n", c.class_id, c.iou, c.f1);
      os << line;
    }
  }
  return os.str();
}

}  // namespace walkcut
