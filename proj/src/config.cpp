#include "hqss/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "hqss/error.hpp"

namespace hqss {

using nlohmann::json;

namespace {

// Walks one JSON object, remembering which keys were consumed.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string key_path(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw ConfigError(key_path(key), "expected a boolean");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) throw ConfigError(key_path(key), "expected a string");
      } else if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer()) throw ConfigError(key_path(key), "expected an integer");
        if constexpr (std::is_unsigned_v<T>)
          if (it->get<long long>() < 0) throw ConfigError(key_path(key), "expected a non-negative integer");
      } else {
        if (!it->is_number()) throw ConfigError(key_path(key), "expected a number");
      }
      out = it->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(key_path(key), e.what());
    }
  }

  ObjectReader child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    static const json empty = json::object();
    return ObjectReader(it == j_.end() ? empty : *it, key_path(key));
  }

  const json* raw(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [k, _] : j_.items())
      if (!seen_.count(k)) throw ConfigError(key_path(k.c_str()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& key_path, const std::string& msg) {
  if (!ok) throw ConfigError(key_path, msg);
}

void read_optim(ObjectReader& r, int& epochs, int& batch, double& lr, double& b1, double& b2, int& decay,
                long& max_steps) {
  r.get("epochs", epochs);
  r.get("batch_size", batch);
  r.get("lr", lr);
  r.get("beta1", b1);
  r.get("beta2", b2);
  r.get("decay_epochs", decay);
  r.get("max_steps", max_steps);
  require(epochs >= 1, r.key_path("epochs"), "must be >= 1");
  require(batch >= 1, r.key_path("batch_size"), "must be >= 1");
  require(lr > 0.0, r.key_path("lr"), "must be > 0");
  require(b1 >= 0.0 && b1 < 1.0, r.key_path("beta1"), "must be in [0,1)");
  require(b2 >= 0.0 && b2 < 1.0, r.key_path("beta2"), "must be in [0,1)");
  require(decay >= 1, r.key_path("decay_epochs"), "must be >= 1");
}

json optim_json(int epochs, int batch, double lr, double b1, double b2, int decay, long max_steps) {
  return {{"epochs", epochs}, {"batch_size", batch}, {"lr", lr},
          {"beta1", b1},      {"beta2", b2},         {"decay_epochs", decay},
          {"max_steps", max_steps}};
}

constexpr const char* kWeightKeys[8] = {"w1", "w2", "w3", "w4", "w5", "w6", "w7", "w8"};

}  // namespace

void RunConfig::propagate() {
  synth.seed = seed;
  synth.net = net;
  synth.ablation = ablation;
  synth.augment = augment;
  removal.seed = seed;
  removal.net = net;
  removal.augment = augment;
  export_pairs.seed = seed;
  export_pairs.nonshadow = synth.nonshadow;
}

void apply_ablation_flag(Ablation& a, const std::string& flag) {
  if (flag == "no_self") a.no_self = true;
  else if (flag == "no_cycle") a.no_cycle = true;
  else if (flag == "no_color") a.no_color = true;
  else if (flag == "no_pseudo_nonshadow") a.no_pseudo_nonshadow = true;
  else if (flag == "no_disc") a.no_disc = true;
  else throw ConfigError("ablation." + flag, "unknown ablation flag");
}

RunConfig parse_config(const json& doc) {
  RunConfig cfg;
  ObjectReader root(doc, "");
  root.get("version", cfg.version);
  require(cfg.version == kConfigVersion, "version", "unsupported config version " + std::to_string(cfg.version));
  root.get("seed", cfg.seed);

  {
    ObjectReader p = root.child("paths");
    p.get("data_root", cfg.paths.data_root);
    p.get("split", cfg.paths.split);
    p.get("checkpoint", cfg.paths.checkpoint);
    p.get("pseudo_pairs", cfg.paths.pseudo_pairs);
    p.get("log", cfg.paths.log);
    p.finish();
  }
  {
    ObjectReader n = root.child("net");
    n.get("feat_channels", cfg.net.feat_channels);
    n.get("base_channels", cfg.net.base_channels);
    n.get("residual_blocks", cfg.net.residual_blocks);
    n.get("disc_channels", cfg.net.disc_channels);
    require(cfg.net.feat_channels >= 1, n.key_path("feat_channels"), "must be >= 1");
    require(cfg.net.base_channels >= 1, n.key_path("base_channels"), "must be >= 1");
    require(cfg.net.residual_blocks >= 0, n.key_path("residual_blocks"), "must be >= 0");
    require(cfg.net.disc_channels >= 1, n.key_path("disc_channels"), "must be >= 1");
    n.finish();
  }
  {
    ObjectReader a = root.child("augment");
    a.get("resize", cfg.augment.resize);
    a.get("crop", cfg.augment.crop);
    a.get("flip_probability", cfg.augment.flip_probability);
    require(cfg.augment.resize >= 4, a.key_path("resize"), "must be >= 4");
    require(cfg.augment.crop >= 4 && cfg.augment.crop <= cfg.augment.resize, a.key_path("crop"),
            "must be in [4, resize]");
    require(cfg.augment.crop % 4 == 0, a.key_path("crop"), "must be divisible by 4");
    require(cfg.augment.flip_probability >= 0.0 && cfg.augment.flip_probability <= 1.0,
            a.key_path("flip_probability"), "must be in [0,1]");
    a.finish();
  }
  {
    ObjectReader a = root.child("ablation");
    a.get("no_self", cfg.ablation.no_self);
    a.get("no_cycle", cfg.ablation.no_cycle);
    a.get("no_color", cfg.ablation.no_color);
    a.get("no_pseudo_nonshadow", cfg.ablation.no_pseudo_nonshadow);
    a.get("no_disc", cfg.ablation.no_disc);
    a.finish();
  }
  {
    ObjectReader s = root.child("synth");
    TrainConfig& t = cfg.synth;
    read_optim(s, t.epochs, t.batch_size, t.lr, t.beta1, t.beta2, t.decay_epochs, t.max_steps);
    ObjectReader w = s.child("weights");
    auto arr = t.weights.as_array();
    for (int i = 0; i < 8; ++i) {
      w.get(kWeightKeys[i], arr[i]);
      require(arr[i] >= 0.0, w.key_path(kWeightKeys[i]), "must be >= 0");
    }
    w.finish();
    t.weights = LossWeights::from_array(arr);
    ObjectReader ns = s.child("nonshadow");
    ns.get("min_area_fraction", t.nonshadow.min_area_fraction);
    ns.get("max_attempts", t.nonshadow.max_attempts);
    ns.get("freeze", t.freeze_nonshadow_masks);
    require(t.nonshadow.min_area_fraction >= 0.0 && t.nonshadow.min_area_fraction <= 1.0,
            ns.key_path("min_area_fraction"), "must be in [0,1]");
    require(t.nonshadow.max_attempts >= 1, ns.key_path("max_attempts"), "must be >= 1");
    ns.finish();
    s.finish();
  }
  {
    ObjectReader r = root.child("removal");
    RemovalConfig& t = cfg.removal;
    read_optim(r, t.epochs, t.batch_size, t.lr, t.beta1, t.beta2, t.decay_epochs, t.max_steps);
    r.get("dilation_kernel", t.dilation_kernel);
    require(t.dilation_kernel >= 0, r.key_path("dilation_kernel"), "must be >= 0");
    r.finish();
  }
  {
    ObjectReader e = root.child("export");
    e.get("pairs_per_image", cfg.export_pairs.pairs_per_image);
    require(cfg.export_pairs.pairs_per_image >= 1, e.key_path("pairs_per_image"), "must be >= 1");
    e.finish();
  }
  {
    ObjectReader e = root.child("eval");
    e.get("resize_height", cfg.eval.resize_height);
    e.get("resize_width", cfg.eval.resize_width);
    std::string reduction = cfg.eval.reduction == ChannelReduction::kSum ? "sum" : "mean";
    e.get("channel_reduction", reduction);
    require(reduction == "sum" || reduction == "mean", e.key_path("channel_reduction"), "must be sum or mean");
    cfg.eval.reduction = reduction == "sum" ? ChannelReduction::kSum : ChannelReduction::kMean;
    require(cfg.eval.resize_height >= 1, e.key_path("resize_height"), "must be >= 1");
    require(cfg.eval.resize_width >= 1, e.key_path("resize_width"), "must be >= 1");
    e.finish();
  }
  root.finish();
  cfg.propagate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return parse_config(json::object());
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

json to_json(const RunConfig& c) {
  json weights;
  const auto w = c.synth.weights.as_array();
  for (int i = 0; i < 8; ++i) weights[kWeightKeys[i]] = w[i];
  json synth = optim_json(c.synth.epochs, c.synth.batch_size, c.synth.lr, c.synth.beta1, c.synth.beta2,
                          c.synth.decay_epochs, c.synth.max_steps);
  synth["weights"] = weights;
  synth["nonshadow"] = {{"min_area_fraction", c.synth.nonshadow.min_area_fraction},
                        {"max_attempts", c.synth.nonshadow.max_attempts},
                        {"freeze", c.synth.freeze_nonshadow_masks}};
  json removal = optim_json(c.removal.epochs, c.removal.batch_size, c.removal.lr, c.removal.beta1, c.removal.beta2,
                            c.removal.decay_epochs, c.removal.max_steps);
  removal["dilation_kernel"] = c.removal.dilation_kernel;
  return {
      {"version", c.version},
      {"seed", c.seed},
      {"paths",
       {{"data_root", c.paths.data_root},
        {"split", c.paths.split},
        {"checkpoint", c.paths.checkpoint},
        {"pseudo_pairs", c.paths.pseudo_pairs},
        {"log", c.paths.log}}},
      {"net",
       {{"feat_channels", c.net.feat_channels},
        {"base_channels", c.net.base_channels},
        {"residual_blocks", c.net.residual_blocks},
        {"disc_channels", c.net.disc_channels}}},
      {"augment",
       {{"resize", c.augment.resize}, {"crop", c.augment.crop}, {"flip_probability", c.augment.flip_probability}}},
      {"ablation",
       {{"no_self", c.ablation.no_self},
        {"no_cycle", c.ablation.no_cycle},
        {"no_color", c.ablation.no_color},
        {"no_pseudo_nonshadow", c.ablation.no_pseudo_nonshadow},
        {"no_disc", c.ablation.no_disc}}},
      {"synth", synth},
      {"removal", removal},
      {"export", {{"pairs_per_image", c.export_pairs.pairs_per_image}}},
      {"eval",
       {{"resize_height", c.eval.resize_height},
        {"resize_width", c.eval.resize_width},
        {"channel_reduction", c.eval.reduction == ChannelReduction::kSum ? "sum" : "mean"}}},
  };
}

}  // namespace hqss
