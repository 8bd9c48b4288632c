#include "hqss/checkpoint.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>

#include "hqss/error.hpp"

namespace hqss {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json net_to_json(const NetConfig& n) {
  return {{"feat_channels", n.feat_channels},
          {"base_channels", n.base_channels},
          {"residual_blocks", n.residual_blocks},
          {"disc_channels", n.disc_channels}};
}

void write_manifest(const fs::path& dir, const CheckpointManifest& m) {
  json j = {{"version", m.version},
            {"net", net_to_json(m.net)},
            {"epoch", m.epoch},
            {"seed", m.seed},
            {"networks", m.networks}};
  std::ofstream out(dir / "manifest.json");
  if (!out) throw IoError("cannot write manifest in " + dir.string());
  out << j.dump(2) << "\n";
}

void merge_and_write(const fs::path& dir, const NetConfig& net, int epoch, std::uint64_t seed,
                     std::initializer_list<const char*> names) {
  CheckpointManifest m;
  if (fs::exists(dir / "manifest.json")) {
    m = read_manifest(dir);
    if (!(m.net == net)) m.networks.clear();
  }
  m.net = net;
  m.epoch = epoch;
  m.seed = seed;
  for (const char* n : names)
    if (std::find(m.networks.begin(), m.networks.end(), n) == m.networks.end()) m.networks.emplace_back(n);
  write_manifest(dir, m);
}

template <class Holder>
void load_into(Holder& net, const fs::path& file) {
  if (!fs::exists(file)) throw IoError("missing checkpoint file " + file.string());
  torch::load(net, file.string());
}

}  // namespace

CheckpointManifest read_manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw IoError("missing manifest.json in " + dir.string());
  json j;
  try {
    in >> j;
    CheckpointManifest m;
    m.version = j.at("version").get<int>();
    const json& n = j.at("net");
    m.net.feat_channels = n.at("feat_channels").get<int>();
    m.net.base_channels = n.at("base_channels").get<int>();
    m.net.residual_blocks = n.at("residual_blocks").get<int>();
    m.net.disc_channels = n.at("disc_channels").get<int>();
    m.epoch = j.at("epoch").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.networks = j.at("networks").get<std::vector<std::string>>();
    return m;
  } catch (const json::exception& e) {
    throw IoError("malformed manifest in " + dir.string() + ": " + e.what());
  }
}

void save_synth_checkpoint(const fs::path& dir, SynthNets& nets, const NetConfig& net, int epoch,
                           std::uint64_t seed) {
  fs::create_directories(dir);
  torch::save(nets.encoder, (dir / "E.pt").string());
  torch::save(nets.generator, (dir / "G.pt").string());
  torch::save(nets.shadow_disc, (dir / "D_s.pt").string());
  torch::save(nets.nonshadow_disc, (dir / "D_f.pt").string());
  merge_and_write(dir, net, epoch, seed, {"E", "G", "D_s", "D_f"});
}

void save_removal_checkpoint(const fs::path& dir, RemovalNets& nets, const NetConfig& net, int epoch,
                             std::uint64_t seed) {
  fs::create_directories(dir);
  torch::save(nets.inverse, (dir / "N_iv.pt").string());
  torch::save(nets.refine, (dir / "N_r.pt").string());
  merge_and_write(dir, net, epoch, seed, {"N_iv", "N_r"});
}

SynthNets load_synth_checkpoint(const fs::path& dir) {
  const CheckpointManifest m = read_manifest(dir);
  SynthNets nets = make_synth_nets(m.net, m.seed);
  load_into(nets.encoder, dir / "E.pt");
  load_into(nets.generator, dir / "G.pt");
  load_into(nets.shadow_disc, dir / "D_s.pt");
  load_into(nets.nonshadow_disc, dir / "D_f.pt");
  return nets;
}

RemovalNets load_removal_checkpoint(const fs::path& dir) {
  const CheckpointManifest m = read_manifest(dir);
  RemovalNets nets = make_removal_nets(m.net, m.seed);
  load_into(nets.inverse, dir / "N_iv.pt");
  load_into(nets.refine, dir / "N_r.pt");
  return nets;
}

}  // namespace hqss
