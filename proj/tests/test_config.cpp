#include "doctest_torch.hpp"

#include <fstream>

#include "hqss/config.hpp"
#include "support.hpp"

using namespace hqss;
using nlohmann::json;

namespace {

std::string key_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.key_path();
  }
  return "<none>";
}

}  // namespace

TEST_CASE("empty file gives the published defaults") {
  testing::TempDir dir("cfg");
  const auto path = dir.path() / "empty.json";
  std::ofstream(path) << "\n";
  const RunConfig c = load_config(path);
  CHECK(c.synth.epochs == 100);
  CHECK(c.removal.epochs == 150);
  CHECK(c.synth.lr == 2e-4);
  CHECK(c.removal.lr == 2e-4);
  CHECK(c.synth.batch_size == 1);
  CHECK(c.augment.crop == 400);
  CHECK(c.augment.resize == 448);
  CHECK(c.synth.augment.crop == 400);
  CHECK(c.removal.augment.resize == 448);
  CHECK((c.synth.weights.as_array() == std::array<double, 8>{1, 1, 0.05, 0.01, 1, 1, 0.1, 0.01}));
  CHECK(c.ablation == Ablation{});
  CHECK(c.eval.reduction == ChannelReduction::kSum);
}

TEST_CASE("validation errors carry key paths") {
  CHECK(key_of({{"synth", {{"lr", -1}}}}) == "synth.lr");
  CHECK(key_of({{"synth", {{"weights", {{"w9", 1}}}}}}) == "synth.weights.w9");
  CHECK(key_of({{"synth", {{"weights", {{"w3", -0.1}}}}}}) == "synth.weights.w3");
  CHECK(key_of({{"bogus", 1}}) == "bogus");
  CHECK(key_of({{"net", {{"base_channels", "wide"}}}}) == "net.base_channels");
  CHECK(key_of({{"augment", {{"crop", 500}}}}) == "augment.crop");
  CHECK(key_of({{"augment", {{"resize", 70}, {"crop", 66}}}}) == "augment.crop");
  CHECK(key_of({{"removal", {{"dilation_kernel", -2}}}}) == "removal.dilation_kernel");
  CHECK(key_of({{"eval", {{"channel_reduction", "max"}}}}) == "eval.channel_reduction");
  CHECK(key_of({{"ablation", {{"no_disc", 1}}}}) == "ablation.no_disc");
  CHECK(key_of({{"version", 2}}) == "version");
  CHECK(key_of({{"seed", -3}}) == "seed");
  CHECK(key_of(json::array()) == "<root>");
  CHECK(key_of({{"synth", {{"epochs", 5}}}}) == "<none>");

  testing::TempDir dir("cfgbad");
  std::ofstream(dir.path() / "bad.json") << "{ not json";
  CHECK_THROWS_AS(load_config(dir.path() / "bad.json"), ConfigError);
  CHECK_THROWS_AS(load_config(dir.path() / "missing.json"), ConfigError);
}

TEST_CASE("serialize / parse round trip") {
  RunConfig c;
  c.seed = 42;
  c.paths.data_root = "toy";
  c.net.base_channels = 12;
  c.augment = {72, 64, 0.25};
  c.ablation.no_color = true;
  c.synth.epochs = 7;
  c.synth.max_steps = 500;
  c.synth.weights.color = 0.5;
  c.synth.nonshadow.max_attempts = 3;
  c.synth.freeze_nonshadow_masks = true;
  c.removal.dilation_kernel = 9;
  c.export_pairs.pairs_per_image = 4;
  c.eval.resize_height = 480;
  c.eval.reduction = ChannelReduction::kMean;
  c.propagate();
  const json j = to_json(c);
  const RunConfig back = parse_config(json::parse(j.dump()));
  CHECK(to_json(back) == j);
  CHECK(back.synth.seed == 42);
  CHECK(back.synth.net.base_channels == 12);
  CHECK(back.synth.ablation.no_color);
  CHECK(back.removal.augment.crop == 64);
  CHECK(back.export_pairs.nonshadow.max_attempts == 3);
}

TEST_CASE("ablation flags") {
  Ablation a;
  for (const char* f : {"no_self", "no_cycle", "no_color", "no_pseudo_nonshadow", "no_disc"}) apply_ablation_flag(a, f);
  CHECK(a.no_self);
  CHECK(a.no_cycle);
  CHECK(a.no_color);
  CHECK(a.no_pseudo_nonshadow);
  CHECK(a.no_disc);
  CHECK_THROWS_AS(apply_ablation_flag(a, "no_everything"), ConfigError);
}
