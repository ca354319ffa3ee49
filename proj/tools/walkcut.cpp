#include "walkcut/commands.hpp"
#include "walkcut/config.hpp"
#include "walkcut/error.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace walkcut;

struct RunFlags {
  std::string config_file;
  std::optional<std::string> formulation, similarity, rule, min_cut;
  std::optional<double> tau;
  std::optional<int> walk_k, threads, min_segment_size, threshold_candidates;
  std::optional<std::vector<int>> resolutions;
  std::optional<std::vector<double>> weights;
  std::optional<std::vector<int>> output_size;
  std::optional<std::size_t> memory_budget_mb;
  bool interpolate_scores = false;

  void add(CLI::App& app) {
    app.add_option("--config", config_file, "TOML run configuration (flags override it)")->check(CLI::ExistingFile);
    app.add_option("--formulation", formulation, "adjacency | random_walk");
    app.add_option("--similarity", similarity, "dot | cosine");
    app.add_option("--rule", rule, "fixed_ncut | manc_ncut | manc_scaled_mincut");
    app.add_option("--tau", tau, "NCut threshold for fixed_ncut");
    app.add_option("--min-cut", min_cut, "exact | proxy (manc_scaled_mincut)");
    app.add_option("--min-segment-size", min_segment_size, "smallest segment, in latent patches");
    app.add_option("--walk-k", walk_k, "random-walk steps");
    app.add_option("--resolutions", resolutions, "enabled latent sides, e.g. 16 32 64");
    app.add_option("--weights", weights, "aggregation weights, one per resolution in ascending order");
    app.add_option("--output-size", output_size, "H W of the label maps (default: manifest size)")->expected(2);
    app.add_option("--memory-budget", memory_budget_mb, "MB for full-resolution assignment");
    app.add_option("--threads", threads, "worker threads (default: WALKCUT_THREADS, then all cores)");
    app.add_option("--threshold-candidates", threshold_candidates, "Fiedler thresholds tried (0 = every midpoint)");
    app.add_flag("--interpolate-scores", interpolate_scores, "interpolate cosine scores instead of features");
  }

  RunConfig build() const {
    RunConfig c;
    if (!config_file.empty()) apply_toml(c, config_file);
    if (formulation) c.formulation = parse_formulation(*formulation);
    if (similarity) c.similarity = parse_similarity(*similarity);
    if (rule) {
      c.rule.kind = parse_stop_kind(*rule);
      if (c.rule.kind != StopKind::fixed_ncut && !tau) c.rule.tau.reset();
    }
    if (tau) c.rule.tau = *tau;
    if (min_cut) c.rule.min_cut_mode = parse_min_cut_mode(*min_cut);
    if (min_segment_size) c.rule.min_segment_size = *min_segment_size;
    if (walk_k) c.walk_k = *walk_k;
    if (resolutions) c.resolutions = std::set<int>(resolutions->begin(), resolutions->end());
    if (weights) c.weights = *weights;
    if (output_size) c.output_size = std::pair{(*output_size)[0], (*output_size)[1]};
    if (memory_budget_mb) c.memory_budget = *memory_budget_mb << 20;
    if (threads) c.threads = *threads;
    if (threshold_candidates) c.threshold_candidates = *threshold_candidates;
    if (interpolate_scores) c.interpolate_scores = true;
    c.validate();
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"walkcut: unsupervised segmentation from self-attention random walks"};
  app.require_subcommand(1);

  auto* segment = app.add_subcommand("segment", "segment every manifest entry");
  std::string manifest, out_dir;
  RunFlags flags;
  segment->add_option("--manifest", manifest, "JSONL manifest")->required();
  segment->add_option("--out", out_dir, "output directory")->required();
  flags.add(*segment);

  auto* evaluate = app.add_subcommand("evaluate", "score predictions against ground truth");
  std::string pred_dir, eval_manifest, strategy = "per_image", report_dir, objective = "overlap";
  int ignore_label = kDefaultIgnoreLabel;
  std::optional<int> num_classes;
  evaluate->add_option("--pred", pred_dir, "directory of <image_id>.png predictions")->required();
  evaluate->add_option("--manifest", eval_manifest, "JSONL manifest with gt paths")->required();
  evaluate->add_option("--strategy", strategy, "global | per_image | oracle_merged");
  evaluate->add_option("--out", report_dir, "report directory (default: --pred)");
  evaluate->add_option("--ignore-label", ignore_label, "ground-truth label excluded from scoring")->check(CLI::Range(0, 65535));
  evaluate->add_option("--num-classes", num_classes, "number of gt classes (default: from data)");
  evaluate->add_option("--match-objective", objective, "overlap | iou");

  auto* synth = app.add_subcommand("synth", "write a planted-partition dataset");
  std::string synth_out;
  SynthOptions so;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--count", so.count, "number of images");
  synth->add_option("--latent-side", so.latent_side, "finest latent side");
  synth->add_option("--resolutions", so.resolutions, "sides written (each divides the latent side)");
  synth->add_option("--min-blocks", so.min_blocks, "fewest planted blocks");
  synth->add_option("--max-blocks", so.max_blocks, "most planted blocks");
  synth->add_option("--intra", so.intra, "attention mass inside the own block");
  synth->add_option("--noise", so.noise, "multiplicative noise amplitude");
  synth->add_option("--output-scale", so.output_scale, "image side / latent side");
  synth->add_option("--seed", so.seed, "RNG seed");

  auto* inspect = app.add_subcommand("inspect", "print a tensor file header and statistics");
  std::string tensor;
  inspect->add_option("tensor", tensor, "tensor file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*segment) return cmd_segment(manifest, flags.build(), out_dir, std::cerr);
    if (*evaluate) {
      EvaluateOptions eo;
      eo.strategy = parse_strategy(strategy);
      eo.eval.ignore_label = static_cast<std::uint16_t>(ignore_label);
      eo.eval.num_classes = num_classes;
      if (objective == "iou") {
        eo.eval.objective = MatchObjective::iou;
      } else if (objective != "overlap") {
        throw ConfigError("unknown match objective '" + objective + "'");
      }
      eo.out_dir = report_dir;
      return cmd_evaluate(pred_dir, eval_manifest, eo, std::cout, std::cerr);
    }
    if (*synth) return cmd_synth(synth_out, so, std::cerr);
    if (*inspect) return cmd_inspect(tensor, std::cout, std::cerr);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
