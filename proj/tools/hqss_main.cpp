// hqss: toy data, pseudo-shadow synthesis, shadow removal and evaluation.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hqss/checkpoint.hpp"
#include "hqss/colorspace.hpp"
#include "hqss/config.hpp"
#include "hqss/dataio.hpp"
#include "hqss/error.hpp"
#include "hqss/metrics.hpp"
#include "hqss/png_io.hpp"
#include "hqss/removal.hpp"
#include "hqss/synth_trainer.hpp"

namespace fs = std::filesystem;
using namespace hqss;

namespace {

struct Common {
  std::string config;
  std::vector<std::string> ablate;
  std::string data;
  std::string split;
  std::string checkpoint;
  std::string log;
  std::string pseudo;
  long max_steps = -2;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON run config");
  cmd->add_option("--data", c.data, "dataset root (overrides paths.data_root)");
  cmd->add_option("--split", c.split, "dataset split (overrides paths.split)");
  cmd->add_option("--checkpoint", c.checkpoint, "checkpoint directory");
  cmd->add_option("--log", c.log, "JSON-lines loss log");
  cmd->add_option("--seed", c.seed, "global seed");
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
  for (const auto& flag : c.ablate) apply_ablation_flag(cfg.ablation, flag);
  if (!c.data.empty()) cfg.paths.data_root = c.data;
  if (!c.split.empty()) cfg.paths.split = c.split;
  if (!c.checkpoint.empty()) cfg.paths.checkpoint = c.checkpoint;
  if (!c.log.empty()) cfg.paths.log = c.log;
  if (!c.pseudo.empty()) cfg.paths.pseudo_pairs = c.pseudo;
  if (c.seed) cfg.seed = *c.seed;
  if (c.max_steps != -2) {
    cfg.synth.max_steps = c.max_steps;
    cfg.removal.max_steps = c.max_steps;
  }
  cfg.propagate();
  return cfg;
}

class LossLog {
 public:
  explicit LossLog(const std::string& path) {
    if (path.empty()) return;
    if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
    out_.open(path);
    if (!out_) throw IoError("cannot open log " + path);
  }
  void write(long step, const LossReport& r) {
    if (out_.is_open()) out_ << r.to_json_line(step) << "\n" << std::flush;
  }

 private:
  std::ofstream out_;
};

Dataset require_data(const RunConfig& cfg) {
  if (cfg.paths.data_root.empty()) throw ConfigError("paths.data_root", "no dataset root given");
  return load_dataset(cfg.paths.data_root, cfg.paths.split);
}

int cmd_make_toy(int n, int size, const std::string& out, const std::string& split, std::uint64_t seed) {
  Rng rng(seed);
  make_toy_dataset(out, split, n, size, rng);
  std::cout << "wrote " << n << " toy samples to " << (fs::path(out) / split).string() << "\n";
  return 0;
}

int cmd_train_synth(const Common& c) {
  const RunConfig cfg = resolve(c);
  const Dataset data = require_data(cfg);
  SynthTrainer trainer(make_synth_nets(cfg.net, cfg.seed), cfg.synth);
  LossLog log(cfg.paths.log);
  const SynthRunSummary s = train_synth(trainer, data, [&](long step, int, const LossReport& r) { log.write(step, r); });
  save_synth_checkpoint(cfg.paths.checkpoint, trainer.nets(), cfg.net, s.epochs_completed, cfg.seed);
  std::cout << "synthesis: " << s.steps << " steps, " << s.epochs_completed << " epochs";
  if (!s.reports.empty()) std::cout << ", last " << s.reports.back().to_json_line(s.steps - 1);
  std::cout << "\ncheckpoint: " << cfg.paths.checkpoint << "\n";
  return 0;
}

int cmd_synth(const Common& c, std::optional<int> pairs) {
  RunConfig cfg = resolve(c);
  if (pairs) cfg.export_pairs.pairs_per_image = *pairs;
  const Dataset data = require_data(cfg);
  SynthNets nets = load_synth_checkpoint(cfg.paths.checkpoint);
  const std::size_t n = export_pseudo_pairs(nets, data, cfg.paths.pseudo_pairs, cfg.export_pairs);
  std::cout << "wrote " << n << " pseudo pairs to " << cfg.paths.pseudo_pairs << "\n";
  return 0;
}

int cmd_train_removal(const Common& c) {
  const RunConfig cfg = resolve(c);
  const PseudoPairSet pairs(cfg.paths.pseudo_pairs);
  RemovalTrainer trainer(make_removal_nets(cfg.net, cfg.seed), cfg.removal);
  LossLog log(cfg.paths.log);
  const RemovalRunSummary s =
      train_removal(trainer, pairs, [&](long step, int, const LossReport& r) { log.write(step, r); });
  save_removal_checkpoint(cfg.paths.checkpoint, trainer.nets(), cfg.net, cfg.removal.epochs, cfg.seed);
  std::cout << "removal: " << s.steps << " steps\ncheckpoint: " << cfg.paths.checkpoint << "\n";
  return 0;
}

void remove_one(RemovalNets& nets, const fs::path& image, const fs::path& mask, const fs::path& out) {
  const LabImage lab = rgb_to_lab(read_png_rgb(image));
  const BinaryMask m = read_png_mask(mask, MaskKind::kShadow);
  const RemovalOutput r = remove_shadow(nets, lab, m);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_png_rgb(out, lab_to_rgb(r.refined));
}

int cmd_remove(const std::string& checkpoint, const std::string& image, const std::string& mask,
               const std::string& out) {
  RemovalNets nets = load_removal_checkpoint(checkpoint);
  if (!fs::is_directory(image)) {
    remove_one(nets, image, mask, out);
    return 0;
  }
  if (!fs::is_directory(mask)) throw IoError("batch mode needs a mask directory: " + mask);
  fs::create_directories(out);
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(image)) {
    if (e.path().extension() != ".png") continue;
    const fs::path m = fs::path(mask) / e.path().filename();
    if (!fs::exists(m)) throw DataError("no mask for " + e.path().filename().string());
    remove_one(nets, e.path(), m, fs::path(out) / e.path().filename());
    ++n;
  }
  std::cout << "processed " << n << " images into " << out << "\n";
  return 0;
}

int cmd_eval(const std::string& pred, const std::string& gt, const std::string& mask, const std::string& json,
             const std::string& config, const std::vector<int>& resize, const std::string& reduction) {
  EvalOptions opts = config.empty() ? EvalOptions{} : load_config(config).eval;
  if (!resize.empty()) {
    opts.resize_height = resize.at(0);
    opts.resize_width = resize.at(1);
  }
  if (!reduction.empty()) opts.reduction = reduction == "mean" ? ChannelReduction::kMean : ChannelReduction::kSum;
  const EvalReport report = evaluate(pred, gt, mask, opts);
  std::cout << format_table(report);
  if (!json.empty()) {
    std::ofstream out(json);
    if (!out) throw IoError("cannot write " + json);
    out << to_json_string(report) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"High-quality pseudo-shadow synthesis and shadow removal"};
  app.require_subcommand(1);

  int toy_n = 20, toy_size = 64;
  std::string toy_out, toy_split = "train";
  std::uint64_t toy_seed = 0;
  auto* toy = app.add_subcommand("make-toy-data", "write a synthetic toy-shadow dataset");
  toy->add_option("--n", toy_n, "number of samples")->check(CLI::PositiveNumber);
  toy->add_option("--size", toy_size, "image side length")->check(CLI::Range(16, 4096));
  toy->add_option("--out", toy_out, "dataset root")->required();
  toy->add_option("--split", toy_split, "split name");
  toy->add_option("--seed", toy_seed, "seed");

  Common ts, sy, tr;
  auto* train_synth_cmd = app.add_subcommand("train-synth", "train E, G, D_s, D_f");
  add_common(train_synth_cmd, ts);
  train_synth_cmd->add_option("--ablate", ts.ablate, "ablation flag(s)")
      ->check(CLI::IsMember({"no_self", "no_cycle", "no_color", "no_pseudo_nonshadow", "no_disc"}));
  train_synth_cmd->add_option("--max-steps", ts.max_steps, "stop after this many steps");

  std::optional<int> pairs;
  auto* synth_cmd = app.add_subcommand("synth", "export pseudo shadow pairs from a synthesis checkpoint");
  add_common(synth_cmd, sy);
  synth_cmd->add_option("--out", sy.pseudo, "pseudo pair directory");
  synth_cmd->add_option("--pairs-per-image", pairs, "pairs per source image");

  auto* train_removal_cmd = app.add_subcommand("train-removal", "train N_iv and N_r on pseudo pairs");
  add_common(train_removal_cmd, tr);
  train_removal_cmd->add_option("--pairs", tr.pseudo, "pseudo pair directory");
  train_removal_cmd->add_option("--max-steps", tr.max_steps, "stop after this many steps");

  std::string rm_ckpt, rm_image, rm_mask, rm_out;
  auto* remove_cmd = app.add_subcommand("remove", "remove shadows from an image or a directory of images");
  remove_cmd->add_option("--checkpoint", rm_ckpt, "removal checkpoint directory")->required();
  remove_cmd->add_option("--image", rm_image, "input png or directory")->required();
  remove_cmd->add_option("--mask", rm_mask, "shadow mask png or directory")->required();
  remove_cmd->add_option("--out", rm_out, "output png or directory")->required();

  std::string ev_pred, ev_gt, ev_mask, ev_json, ev_config, ev_reduction;
  std::vector<int> ev_resize;
  auto* eval_cmd = app.add_subcommand("eval", "score predictions against ground truth");
  eval_cmd->add_option("--pred", ev_pred, "prediction directory")->required();
  eval_cmd->add_option("--gt", ev_gt, "ground-truth directory")->required();
  eval_cmd->add_option("--mask", ev_mask, "shadow mask directory")->required();
  eval_cmd->add_option("--json", ev_json, "write the report as JSON");
  eval_cmd->add_option("--config", ev_config, "JSON run config (eval section)");
  eval_cmd->add_option("--resize", ev_resize, "evaluation size H W")->expected(2);
  eval_cmd->add_option("--channel-reduction", ev_reduction, "sum or mean")->check(CLI::IsMember({"sum", "mean"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (const char* det = std::getenv("HQSS_DETERMINISTIC"); det && std::string(det) != "0") enable_deterministic_mode();

  try {
    if (*toy) return cmd_make_toy(toy_n, toy_size, toy_out, toy_split, toy_seed);
    if (*train_synth_cmd) return cmd_train_synth(ts);
    if (*synth_cmd) return cmd_synth(sy, pairs);
    if (*train_removal_cmd) return cmd_train_removal(tr);
    if (*remove_cmd) return cmd_remove(rm_ckpt, rm_image, rm_mask, rm_out);
    if (*eval_cmd) return cmd_eval(ev_pred, ev_gt, ev_mask, ev_json, ev_config, ev_resize, ev_reduction);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
