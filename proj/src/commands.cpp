#include "walkcut/commands.hpp"

#include "walkcut/error.hpp"
#include "walkcut/label_io.hpp"
#include "walkcut/manifest.hpp"
#include "walkcut/pipeline.hpp"
#include "walkcut/synth.hpp"
#include "walkcut/tensor_store.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

namespace walkcut {

namespace fs = std::filesystem;

nlohmann::json rle_indices(const IndexSet& sorted_indices) {
  auto runs = nlohmann::json::array();
  std::size_t i = 0;
  while (i < sorted_indices.size()) {
    std::size_t j = i + 1;
    while (j < sorted_indices.size() && sorted_indices[j] == sorted_indices[j - 1] + 1) ++j;
    runs.push_back({sorted_indices[i], j - i});
    i = j;
  }
  return runs;
}

nlohmann::json tree_to_json(const SegmentationTree& tree) {
  auto nodes = nlohmann::json::array();
  for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
    const auto& n = tree.nodes[id];
    IndexSet sorted = n.indices;
    std::sort(sorted.begin(), sorted.end());
    nlohmann::json j{{"id", id}, {"size", n.indices.size()}, {"indices", rle_indices(sorted)}};
    if (!n.is_leaf()) j["children"] = {n.children[0], n.children[1]};
    if (n.split_cost) j["split_cost"] = *n.split_cost;
    if (n.rule_statistic) j["rule_statistic"] = *n.rule_statistic;
    if (n.rule_threshold) j["rule_threshold"] = *n.rule_threshold;
    if (n.is_leaf()) j["stop_reason"] = to_string(n.stop_reason);
    nodes.push_back(std::move(j));
  }
  return {{"num_segments", tree.num_segments()}, {"leaves", tree.leaves}, {"nodes", nodes}};
}

namespace {

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream f(path);
  if (!f) throw FormatError(FormatErrc::io, "cannot write " + path.string());
  f << j.dump(2) << '\n';
}

nlohmann::json config_json(const RunConfig& c) {
  nlohmann::json j{{"formulation", to_string(c.formulation)},
                   {"similarity", to_string(c.similarity)},
                   {"rule", to_string(c.rule.kind)},
                   {"walk_k", c.walk_k},
                   {"resolutions", c.resolutions},
                   {"min_segment_size", c.rule.min_segment_size}};
  if (c.rule.tau) j["tau"] = *c.rule.tau;
  if (c.weights) j["weights"] = *c.weights;
  return j;
}

}  // namespace

int cmd_segment(const fs::path& manifest_path, const RunConfig& config, const fs::path& out_dir, std::ostream& log) {
  config.validate();
  const DatasetManifest manifest = load_manifest(manifest_path);
  if (manifest.entries.empty()) {
    log << "error: no entries in " << manifest_path.string() << '\n';
    return kExitData;
  }
  fs::create_directories(out_dir);

  const auto& entries = manifest.entries;
  std::vector<nlohmann::json> results(entries.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;

  const auto worker = [&] {
    for (std::size_t i = next++; i < entries.size(); i = next++) {
      const auto& e = entries[i];
      const auto start = std::chrono::steady_clock::now();
      nlohmann::json r{{"image_id", e.image_id}};
      try {
        const AttentionStack stack = load_attention_stack(e, config.resolutions);
        const int h = config.output_size ? config.output_size->first : e.height;
        const int w = config.output_size ? config.output_size->second : e.width;
        const SegmentOutput seg = segment_stack(stack, config, h, w);
        write_label_png(seg.labels, out_dir / (e.image_id + ".png"));
        std::optional<RgbImage> base;
        if (e.image) {
          base = read_rgb_png(*e.image);
          if (base->height != h || base->width != w) base.reset();
        }
        write_rgb_png(colorize(seg.labels, base ? &*base : nullptr), out_dir / (e.image_id + "_overlay.png"));
        write_json(out_dir / (e.image_id + "_tree.json"), tree_to_json(seg.tree));
        r["status"] = "ok";
        r["num_segments"] = seg.tree.num_segments();
        r["dropped_segments"] = seg.assign.dropped_segments;
      } catch (const Error& ex) {
        r["status"] = "failed";
        r["error"] = ex.what();
        std::lock_guard lock(log_mutex);
        log << "error: " << e.image_id << ": " << ex.what() << '\n';
      } catch (const std::bad_alloc&) {
        r["status"] = "failed";
        r["error"] = "out of memory";
        std::lock_guard lock(log_mutex);
        log << "error: " << e.image_id << ": out of memory\n";
      }
      r["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      results[i] = std::move(r);
    }
  };

  const int threads = std::min<int>(resolve_threads(config), static_cast<int>(entries.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int failed = 0;
  for (const auto& r : results) failed += r["status"] == "failed";
  write_json(out_dir / "summary.json",
             {{"config", config_json(config)}, {"images", results}, {"failed", failed}, {"total", entries.size()}});
  log << "segmented " << entries.size() - static_cast<std::size_t>(failed) << "/" << entries.size() << " images\n";
  if (failed == static_cast<int>(entries.size())) return kExitData;
  return failed > 0 ? kExitPartial : kExitOk;
}

int cmd_evaluate(const fs::path& pred_dir, const fs::path& manifest_path, const EvaluateOptions& options, std::ostream& out,
                 std::ostream& log) {
  const DatasetManifest manifest = load_manifest(manifest_path, {.check_paths = false});
  if (manifest.entries.empty()) {
    log << "error: no entries in " << manifest_path.string() << '\n';
    return kExitData;
  }
  std::vector<LabelMap> preds, gts;
  preds.reserve(manifest.entries.size());
  gts.reserve(manifest.entries.size());
  std::vector<std::string> missing;
  for (const auto& e : manifest.entries) {
    if (!e.gt || !fs::exists(*e.gt)) {
      missing.push_back(e.image_id + " (ground truth)");
      continue;
    }
    const fs::path pred = pred_dir / (e.image_id + ".png");
    if (!fs::exists(pred)) {
      missing.push_back(e.image_id);
      continue;
    }
    try {
      preds.push_back(read_label_map(pred));
      gts.push_back(read_label_map(*e.gt));
    } catch (const Error& ex) {
      if (preds.size() > gts.size()) preds.pop_back();
      missing.push_back(e.image_id + " (" + ex.what() + ")");
    }
  }
  for (const auto& m : missing) log << "missing: " << m << '\n';
  if (preds.empty()) {
    log << "error: no prediction could be scored\n";
    return kExitData;
  }
  std::vector<LabelPair> pairs;
  for (std::size_t i = 0; i < preds.size(); ++i) pairs.push_back({&preds[i], &gts[i]});
  MetricsReport report = evaluate_dataset(pairs, options.strategy, options.eval);
  report.n_skipped += static_cast<int>(missing.size());

  const fs::path dir = options.out_dir.empty() ? pred_dir : options.out_dir;
  fs::create_directories(dir);
  write_json(dir / "report.json", to_json(report));
  const std::string text = to_text(report);
  std::ofstream(dir / "report.txt") << text;
  out << text;
  const double missing_fraction = static_cast<double>(missing.size()) / static_cast<double>(manifest.entries.size());
  return missing_fraction > 0.1 ? kExitPartial : kExitOk;
}

int cmd_synth(const fs::path& out_dir, const SynthOptions& o, std::ostream& log) {
  if (o.count < 1) throw ConfigError("synth count must be >= 1");
  if (o.min_blocks < 2 || o.max_blocks < o.min_blocks) throw ConfigError("need 2 <= min-blocks <= max-blocks");
  if (o.output_scale < 1) throw ConfigError("output scale must be >= 1");
  if (o.resolutions.empty()) throw ConfigError("synth needs at least one resolution");
  for (int r : o.resolutions) {
    if (r < 2 || o.latent_side % r != 0) {
      throw ConfigError("resolution " + std::to_string(r) + " must divide the latent side " + std::to_string(o.latent_side));
    }
  }
  fs::create_directories(out_dir);
  DatasetManifest manifest;
  const int size = o.latent_side * o.output_scale;
  for (int i = 0; i < o.count; ++i) {
    PlantedSpec spec;
    spec.side = o.latent_side;
    spec.blocks = planted_blocks(o.latent_side, o.min_blocks + i % (o.max_blocks - o.min_blocks + 1));
    spec.intra = o.intra;
    spec.noise = o.noise;
    spec.seed = o.seed + static_cast<std::uint64_t>(i);
    const AttentionStack stack = planted_stack(spec, o.resolutions);
    const LabelMap labels = planted_transition(spec).labels;

    ManifestEntry e;
    e.image_id = "synth_" + std::to_string(i);
    e.height = size;
    e.width = size;
    for (const auto& m : stack.maps) {
      const fs::path p = out_dir / (e.image_id + "_" + std::to_string(m.side) + ".satn");
      write_tensor(matrix_to_tensor(m.s), p);
      e.attention[m.side] = p;
    }
    e.gt = out_dir / (e.image_id + "_gt.png");
    write_label_png(resize_nearest(labels, size, size), *e.gt);
    manifest.entries.push_back(std::move(e));
  }
  write_manifest(manifest, out_dir / "manifest.jsonl");
  log << "wrote " << o.count << " planted images to " << out_dir.string() << '\n';
  return kExitOk;
}

int cmd_inspect(const fs::path& path, std::ostream& out, std::ostream& err) {
  TensorFile t;
  try {
    t = read_tensor(path);
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  out << path.string() << '\n' << "dtype  " << to_string(t.dtype) << '\n' << "shape  (";
  for (std::size_t i = 0; i < t.shape.size(); ++i) out << (i ? ", " : "") << t.shape[i];
  out << ")\n";
  if (t.dtype == DType::float32) {
    const auto v = t.to_floats();
    if (!v.empty()) {
      const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
      out << "min    " << *lo << "\nmax    " << *hi << '\n';
    }
    if (t.shape.size() == 2 && t.shape[0] == t.shape[1] && t.shape[0] > 0) {
      const std::size_t n = t.shape[0];
      double dev = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < n; ++c) s += v[r * n + c];
        dev = std::max(dev, std::abs(s - 1.0));
      }
      out << "rows sum to 1 ± " << dev << '\n';
    }
  } else {
    std::map<long long, long long> hist;
    if (t.dtype == DType::uint8) {
      for (auto x : t.to_uint8()) ++hist[x];
    } else {
      for (auto x : t.to_int32()) ++hist[x];
    }
    out << "labels " << hist.size() << '\n';
    for (const auto& [label, count] : hist) out << "  " << label << ": " << count << '\n';
  }
  return kExitOk;
}

}  // namespace walkcut
