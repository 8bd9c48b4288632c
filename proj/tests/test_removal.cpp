#include "doctest_torch.hpp"

#include "hqss/checkpoint.hpp"
#include "hqss/colorspace.hpp"
#include "hqss/png_io.hpp"
#include "hqss/removal.hpp"
#include "hqss/synth_trainer.hpp"
#include "hqss/tensors.hpp"
#include "support.hpp"

using namespace hqss;

namespace {

NetConfig tiny() {
  NetConfig c;
  c.feat_channels = 4;
  c.base_channels = 4;
  c.residual_blocks = 1;
  c.disc_channels = 4;
  return c;
}

}  // namespace

TEST_CASE("compose interleaves on a checkerboard") {
  std::mt19937_64 gen(1);
  const LabImage a = testing::random_lab(gen, 6, 7), b = testing::random_lab(gen, 6, 7);
  BinaryMask m(6, 7);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 7; ++x) m.set(y, x, (x + y) % 2 == 0);
  const LabImage c = compose(a, b, m);
  const auto ta = to_network(a), tb = to_network(b), tm = mask_to_tensor(m);
  const auto tc = compose(ta, tb, tm);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 7; ++x)
      for (int ch = 0; ch < 3; ++ch) {
        const bool in = (x + y) % 2 == 0;
        CHECK(c.at(y, x, ch) == (in ? a : b).at(y, x, ch));
        CHECK(tc[0][ch][y][x].item<float>() == (in ? ta : tb)[0][ch][y][x].item<float>());
      }
  CHECK_THROWS_AS(compose(a, testing::random_lab(gen, 6, 6), m), ShapeError);
}

TEST_CASE("dilation kernel scales with image size") {
  CHECK(scaled_dilation_kernel(400) == 50);
  CHECK(scaled_dilation_kernel(64) == 8);
  CHECK(scaled_dilation_kernel(16) == 3);
  CHECK(scaled_dilation_kernel(8) == 3);
  const RemovalConfig c;
  CHECK(c.epochs == 150);
  CHECK(c.lr == 2e-4);
}

TEST_CASE("remove_shadow keeps pixels outside the mask in the composed image") {
  RemovalNets nets = make_removal_nets(tiny(), 3);
  std::mt19937_64 gen(2);
  const LabImage img = testing::random_lab(gen, 16, 16);
  const BinaryMask m = testing::random_mask(gen, 16, 16, 0.3);
  const RemovalOutput out = remove_shadow(nets, img, m);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x)
      for (int c = 0; c < 3; ++c) {
        if (!m.at(y, x)) CHECK(out.composed.at(y, x, c) == img.at(y, x, c));
        else CHECK(out.composed.at(y, x, c) == out.coarse.at(y, x, c));
      }
  CHECK_NOTHROW(validate_lab(out.refined));
  CHECK_THROWS_AS(remove_shadow(nets, testing::random_lab(gen, 18, 16), BinaryMask(18, 16)), ShapeError);
}

TEST_CASE("removal training on exported pairs") {
  enable_deterministic_mode();
  testing::TempDir dir("rm");
  Rng rng(4);
  make_toy_dataset(dir.path(), "train", 4, 32, rng);
  const Dataset data = load_dataset(dir.path(), "train");
  SynthNets synth = make_synth_nets(tiny(), 2);
  export_pseudo_pairs(synth, data, dir.path() / "pairs", {2, 1, {}});

  const PseudoPairSet pairs(dir.path() / "pairs");
  REQUIRE(pairs.size() == 8);
  const PseudoPair p = pairs.load(0);
  CHECK(p.target_nonshadow.mask.kind() == MaskKind::kNonShadow);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x)
      if (!p.target_nonshadow.mask.at(y, x)) {
        CHECK(p.pseudo_shadow.at(y, x, 0) == 0.0f);
        CHECK(p.target_nonshadow.image.at(y, x, 0) == 0.0f);
      }

  RemovalConfig c;
  c.net = tiny();
  c.augment = {36, 32, 0.5};
  c.lr = 1e-3;
  c.max_steps = 60;
  RemovalTrainer t(make_removal_nets(c.net, 1), c);
  const auto reports = train_removal(t, pairs).reports;
  REQUIRE(reports.size() == 60);
  double tail = 0.0;
  for (std::size_t i = 50; i < 60; ++i) tail += reports[i].at("removal_total") / 10.0;
  CHECK(tail < reports.front().at("removal_total"));

  save_removal_checkpoint(dir.path() / "ck", t.nets(), c.net, 1, 1);
  RemovalNets back = load_removal_checkpoint(dir.path() / "ck");
  CHECK(parameter_hash(*back.refine) == parameter_hash(*t.nets().refine));

  std::filesystem::remove(dir.path() / "pairs" / "source" / "toy_0000_0.png");
  CHECK_THROWS_AS(PseudoPairSet(dir.path() / "pairs"), DataError);
}
