#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hqss/nets.hpp"
#include "hqss/removal.hpp"
#include "hqss/synth_trainer.hpp"

namespace hqss {

/// `manifest.json` stored beside the per-network weight files.
struct CheckpointManifest {
  int version = 1;
  NetConfig net;
  int epoch = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> networks;  // subset of E, G, D_s, D_f, N_iv, N_r
};

CheckpointManifest read_manifest(const std::filesystem::path& dir);

/// Writes E.pt, G.pt, D_s.pt, D_f.pt and merges them into the manifest.
void save_synth_checkpoint(const std::filesystem::path& dir, SynthNets& nets, const NetConfig& net, int epoch,
                           std::uint64_t seed);
/// Writes N_iv.pt, N_r.pt and merges them into the manifest.
void save_removal_checkpoint(const std::filesystem::path& dir, RemovalNets& nets, const NetConfig& net, int epoch,
                             std::uint64_t seed);

SynthNets load_synth_checkpoint(const std::filesystem::path& dir);
RemovalNets load_removal_checkpoint(const std::filesystem::path& dir);

}  // namespace hqss
