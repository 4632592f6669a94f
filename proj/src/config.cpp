#include "tradeslab/config.hpp"

#include <fstream>

namespace tradeslab {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, std::initializer_list<const char*> known,
                    const std::string& path) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok) throw ConfigError("unknown config key: " + path + it.key());
  }
}

template <typename T>
void get_if(const json& j, const char* key, T& out, const std::string& path) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("invalid value for " + path + key);
  }
}

}  // namespace

ExperimentConfig parse_config_json(const json& j) {
  ExperimentConfig cfg;
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  reject_unknown(j, {"dataset", "split", "train", "eval", "landscape"}, "");

  if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    reject_unknown(d, {"type", "classes", "per_class", "dim", "spread", "seed", "path"},
                   "dataset.");
    get_if(d, "type", cfg.dataset.type, "dataset.");
    get_if(d, "classes", cfg.dataset.classes, "dataset.");
    get_if(d, "per_class", cfg.dataset.per_class, "dataset.");
    get_if(d, "dim", cfg.dataset.dim, "dataset.");
    get_if(d, "spread", cfg.dataset.spread, "dataset.");
    get_if(d, "seed", cfg.dataset.seed, "dataset.");
    get_if(d, "path", cfg.dataset.path, "dataset.");
    if (cfg.dataset.type != "blobs" && cfg.dataset.type != "csv")
      throw ConfigError("dataset.type must be \"blobs\" or \"csv\"");
    if (cfg.dataset.type == "csv" && cfg.dataset.path.empty())
      throw ConfigError("dataset.path is required for dataset.type=csv");
  }

  if (j.contains("split")) {
    const json& s = j.at("split");
    reject_unknown(s, {"train", "val", "test", "seed"}, "split.");
    get_if(s, "train", cfg.split_fractions.train, "split.");
    get_if(s, "val", cfg.split_fractions.val, "split.");
    get_if(s, "test", cfg.split_fractions.test, "split.");
    get_if(s, "seed", cfg.split_seed, "split.");
  }

  if (j.contains("train")) {
    const json& t = j.at("train");
    reject_unknown(t,
                   {"loss_mode", "beta", "epochs", "batch_size", "lr0", "momentum",
                    "weight_decay", "lr_decay_epochs", "lr_gamma", "attack",
                    "val_attack_steps", "fosc_threshold", "noise_std", "noise_batches",
                    "seed", "hidden_dims"},
                   "train.");
    std::string mode = to_string(cfg.train.loss_mode);
    get_if(t, "loss_mode", mode, "train.");
    try {
      cfg.train.loss_mode = loss_mode_from_string(mode);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("train.loss_mode: ") + e.what());
    }
    get_if(t, "beta", cfg.train.beta, "train.");
    get_if(t, "epochs", cfg.train.epochs, "train.");
    get_if(t, "batch_size", cfg.train.batch_size, "train.");
    get_if(t, "lr0", cfg.train.lr0, "train.");
    get_if(t, "momentum", cfg.train.momentum, "train.");
    get_if(t, "weight_decay", cfg.train.weight_decay, "train.");
    get_if(t, "lr_decay_epochs", cfg.train.lr_decay_epochs, "train.");
    get_if(t, "lr_gamma", cfg.train.lr_gamma, "train.");
    get_if(t, "val_attack_steps", cfg.train.val_attack_steps, "train.");
    get_if(t, "fosc_threshold", cfg.train.fosc_threshold, "train.");
    get_if(t, "noise_std", cfg.train.noise_std, "train.");
    get_if(t, "noise_batches", cfg.train.noise_batches, "train.");
    get_if(t, "seed", cfg.train.seed, "train.");
    std::vector<std::size_t> hidden = {64, 64};
    get_if(t, "hidden_dims", hidden, "train.");
    cfg.train.model.hidden_dims = hidden;
    if (t.contains("attack")) {
      const json& a = t.at("attack");
      reject_unknown(a, {"epsilon", "alpha", "steps", "random_start", "jitter_std"},
                     "train.attack.");
      get_if(a, "epsilon", cfg.train.attack.epsilon, "train.attack.");
      get_if(a, "alpha", cfg.train.attack.alpha, "train.attack.");
      get_if(a, "steps", cfg.train.attack.steps, "train.attack.");
      get_if(a, "random_start", cfg.train.attack.random_start, "train.attack.");
      get_if(a, "jitter_std", cfg.train.attack.jitter_std, "train.attack.");
    }
  } else {
    cfg.train.model.hidden_dims = {64, 64};
  }

  if (j.contains("eval")) {
    const json& e = j.at("eval");
    reject_unknown(e, {"square_queries", "masking_threshold"}, "eval.");
    get_if(e, "square_queries", cfg.square_queries, "eval.");
    get_if(e, "masking_threshold", cfg.masking_threshold, "eval.");
  }

  if (j.contains("landscape")) {
    const json& l = j.at("landscape");
    reject_unknown(l, {"range", "resolution"}, "landscape.");
    get_if(l, "range", cfg.landscape_range, "landscape.");
    get_if(l, "resolution", cfg.landscape_resolution, "landscape.");
  }

  try {
    validate(cfg.train);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("train: ") + e.what());
  }
  cfg.train.config_digest = config_digest(cfg);
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_config_json(j);
}

nlohmann::json resolved_json(const ExperimentConfig& cfg) {
  json d = {{"type", cfg.dataset.type}};
  if (cfg.dataset.type == "blobs") {
    d["classes"] = cfg.dataset.classes;
    d["per_class"] = cfg.dataset.per_class;
    d["dim"] = cfg.dataset.dim;
    d["spread"] = cfg.dataset.spread;
    d["seed"] = cfg.dataset.seed;
  } else {
    d["path"] = cfg.dataset.path;
  }
  return json{
      {"dataset", d},
      {"split",
       {{"train", cfg.split_fractions.train},
        {"val", cfg.split_fractions.val},
        {"test", cfg.split_fractions.test},
        {"seed", cfg.split_seed}}},
      {"train",
       {{"loss_mode", to_string(cfg.train.loss_mode)},
        {"beta", cfg.train.beta},
        {"epochs", cfg.train.epochs},
        {"batch_size", cfg.train.batch_size},
        {"lr0", cfg.train.lr0},
        {"momentum", cfg.train.momentum},
        {"weight_decay", cfg.train.weight_decay},
        {"lr_decay_epochs", cfg.train.lr_decay_epochs},
        {"lr_gamma", cfg.train.lr_gamma},
        {"hidden_dims", cfg.train.model.hidden_dims},
        {"val_attack_steps", cfg.train.val_attack_steps},
        {"fosc_threshold", cfg.train.fosc_threshold},
        {"noise_std", cfg.train.noise_std},
        {"noise_batches", cfg.train.noise_batches},
        {"seed", cfg.train.seed},
        {"attack",
         {{"epsilon", cfg.train.attack.epsilon},
          {"alpha", cfg.train.attack.alpha},
          {"steps", cfg.train.attack.steps},
          {"random_start", cfg.train.attack.random_start},
          {"jitter_std", cfg.train.attack.jitter_std}}}}},
      {"eval",
       {{"square_queries", cfg.square_queries},
        {"masking_threshold", cfg.masking_threshold}}},
      {"landscape",
       {{"range", cfg.landscape_range}, {"resolution", cfg.landscape_resolution}}},
      {"rng_algorithm", std::string(Rng::kAlgorithm)}};
}

std::string config_digest(const ExperimentConfig& cfg) {
  const std::string text = resolved_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Dataset build_dataset(const DatasetSpec& spec) {
  if (spec.type == "csv") return load_csv(spec.path);
  Rng rng(spec.seed);
  return gen_blobs(spec.classes, spec.per_class, spec.dim, spec.spread, rng);
}

}  // namespace tradeslab
