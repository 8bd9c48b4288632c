#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "hqss/metrics.hpp"
#include "hqss/removal.hpp"
#include "hqss/synth_trainer.hpp"

namespace hqss {

inline constexpr int kConfigVersion = 1;

struct PathsConfig {
  std::string data_root;
  std::string split = "train";
  std::string checkpoint = "checkpoints";
  std::string pseudo_pairs = "pseudo_pairs";
  std::string log;  // JSON-lines loss log; empty disables
};

/// Everything a CLI run needs. `seed`, `net`, `ablation` and the data augmentation are global and
/// copied into the per-stage configs on load.
struct RunConfig {
  int version = kConfigVersion;
  std::uint64_t seed = 0;
  PathsConfig paths;
  NetConfig net;
  AugmentConfig augment;
  Ablation ablation;
  TrainConfig synth;
  RemovalConfig removal;
  ExportOptions export_pairs;
  EvalOptions eval;

  /// Pushes the global fields into synth / removal / export.
  void propagate();
};

/// Parses a config document. Unknown keys and invalid values raise ConfigError with the key path.
RunConfig parse_config(const nlohmann::json& doc);
/// Reads a JSON file; an empty file yields the defaults.
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

/// Applies one ablation flag by name (no_self, no_cycle, no_color, no_pseudo_nonshadow, no_disc).
void apply_ablation_flag(Ablation& ablation, const std::string& flag);

}  // namespace hqss
