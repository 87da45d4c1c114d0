#include "run_config.hpp"

#include <fstream>
#include <initializer_list>
#include <set>
#include <string_view>

#include <eventcube/error.hpp>

namespace eventcube::cli {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(Errc::InvalidConfig, what); }

void only_keys(const json& j, std::string_view section, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) bad(std::string(section) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) bad("unknown key '" + key + "' in " + std::string(section));
  }
}

template <class T>
void read(const json& j, const char* key, T& dst, std::string_view section) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    dst = it->get<T>();
  } catch (const json::exception&) {
    bad(std::string(section) + "." + key + " has the wrong type");
  }
}

void read_size(const json& j, const char* key, std::size_t& dst, std::string_view section) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  if (!it->is_number_unsigned()) bad(std::string(section) + "." + key + " must be a non-negative integer");
  dst = it->get<std::size_t>();
}

void read_binning(const json& j, BinningConfig& b) {
  only_keys(j, "binning", {"n_tau", "n_eps", "n_dtau", "transform", "scaling", "bounds", "strict"});
  read(j, "n_tau", b.n_tau, "binning");
  read(j, "n_eps", b.n_eps, "binning");
  read(j, "n_dtau", b.n_dtau, "binning");
  read(j, "strict", b.strict, "binning");
  if (j.contains("transform")) {
    if (!j["transform"].is_string()) bad("binning.transform must be a string");
    b.transform = parse_transform(j["transform"].get<std::string>());
  }
  if (j.contains("scaling")) {
    if (!j["scaling"].is_string()) bad("binning.scaling must be a string");
    b.scaling = parse_scaling(j["scaling"].get<std::string>());
  }
  if (j.contains("bounds")) {
    const auto& v = j["bounds"];
    if (v == "dataset") {
      b.bounds = DatasetBounds{};
    } else if (v == "per_series") {
      b.bounds = PerSeriesBounds{};
    } else if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
      b.bounds = GlobalBounds{v[0].get<double>(), v[1].get<double>()};
    } else {
      bad("binning.bounds must be \"dataset\", \"per_series\" or [lo, hi]");
    }
  }
}

void read_train(const json& j, sae::TrainConfig& t) {
  only_keys(j, "train",
            {"lambda", "batch_size", "max_epochs", "lr", "plateau_factor", "plateau_patience", "early_stop_patience",
             "min_delta"});
  read(j, "lambda", t.lambda, "train");
  read_size(j, "batch_size", t.batch_size, "train");
  read_size(j, "max_epochs", t.max_epochs, "train");
  read(j, "lr", t.lr, "train");
  read(j, "plateau_factor", t.plateau_factor, "train");
  read_size(j, "plateau_patience", t.plateau_patience, "train");
  read_size(j, "early_stop_patience", t.early_stop_patience, "train");
  read(j, "min_delta", t.min_delta, "train");
}

void read_tsne(const json& j, TsneConfig& t) {
  only_keys(j, "tsne",
            {"perplexity", "iterations", "learning_rate", "initial_momentum", "final_momentum", "momentum_switch_iter",
             "early_exaggeration", "exaggeration_iters", "init_sigma"});
  read(j, "perplexity", t.perplexity, "tsne");
  read_size(j, "iterations", t.iterations, "tsne");
  read(j, "learning_rate", t.learning_rate, "tsne");
  read(j, "initial_momentum", t.initial_momentum, "tsne");
  read(j, "final_momentum", t.final_momentum, "tsne");
  read_size(j, "momentum_switch_iter", t.momentum_switch_iter, "tsne");
  read(j, "early_exaggeration", t.early_exaggeration, "tsne");
  read_size(j, "exaggeration_iters", t.exaggeration_iters, "tsne");
  read(j, "init_sigma", t.init_sigma, "tsne");
}

void read_arch(const json& j) {
  only_keys(j, "arch", {"input_dims", "layers", "leaky_slope", "bn_momentum", "bn_epsilon", "batch_norm"});
  if (!j.contains("layers")) bad("arch.layers is required");
}

}  // namespace

sae::ArchSpec RunConfig::resolved_arch() const {
  std::vector<std::uint32_t> dims{binning.n_tau, binning.n_eps};
  if (!binning.is_map()) dims.push_back(binning.n_dtau);
  sae::ArchSpec a;
  if (arch) {
    json j = *arch;
    if (!j.contains("input_dims")) j["input_dims"] = dims;
    a = sae::arch_from_json(j.dump());
  } else {
    a = binning.is_map() ? sae::ArchSpec::conv_map() : sae::ArchSpec::dense_cube();
    a.input_dims = dims;
  }
  sae::infer_encoder_shapes(a);
  return a;
}

void RunConfig::validate() const {
  binning.validate();
  train.validate();
  head.model.validate();
  if (gen.per_class < 1) bad("gen.per_class must be >= 1");
  if (!(tsne.perplexity > 0.0)) bad("tsne.perplexity must be positive");
  if (tsne.iterations < 1) bad("tsne.iterations must be >= 1");
  if (cluster.eps && !(*cluster.eps > 0.0)) bad("cluster.eps must be positive");
  if (cluster.min_pts < 1) bad("cluster.min_pts must be >= 1");
  if (knn_k < 1 || score_k < 1) bad("k must be >= 1");
  if (!(head.test_fraction > 0.0 && head.test_fraction < 1.0)) bad("head.test_fraction must lie in (0, 1)");
  try {
    resolved_arch();
  } catch (const Error& e) {
    bad(std::string("arch: ") + e.what());
  }
}

RunConfig config_from_json(const json& j, RunConfig cfg) {
  only_keys(j, "config",
            {"seed", "workers", "gen", "binning", "arch", "train", "tsne", "cluster", "knn", "score", "head"});
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) bad("seed must be a non-negative integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  read_size(j, "workers", cfg.workers, "config");
  if (j.contains("gen")) {
    only_keys(j["gen"], "gen", {"per_class"});
    read_size(j["gen"], "per_class", cfg.gen.per_class, "gen");
  }
  if (j.contains("binning")) read_binning(j["binning"], cfg.binning);
  if (j.contains("arch")) {
    read_arch(j["arch"]);
    cfg.arch = j["arch"];
  }
  if (j.contains("train")) read_train(j["train"], cfg.train);
  if (j.contains("tsne")) read_tsne(j["tsne"], cfg.tsne);
  if (j.contains("cluster")) {
    const auto& c = j["cluster"];
    only_keys(c, "cluster", {"eps", "min_pts", "standardize"});
    if (c.contains("eps")) {
      if (!c["eps"].is_number()) bad("cluster.eps must be a number");
      cfg.cluster.eps = c["eps"].get<double>();
    }
    read_size(c, "min_pts", cfg.cluster.min_pts, "cluster");
    if (c.contains("standardize")) {
      if (!c["standardize"].is_boolean()) bad("cluster.standardize must be a boolean");
      cfg.cluster.standardize = c["standardize"].get<bool>();
    }
  }
  if (j.contains("knn")) {
    only_keys(j["knn"], "knn", {"k"});
    read_size(j["knn"], "k", cfg.knn_k, "knn");
  }
  if (j.contains("score")) {
    only_keys(j["score"], "score", {"k"});
    read_size(j["score"], "k", cfg.score_k, "score");
  }
  if (j.contains("head")) {
    const auto& h = j["head"];
    only_keys(h, "head", {"n_estimators", "max_depth", "learning_rate", "min_child_weight", "test_fraction"});
    read_size(h, "n_estimators", cfg.head.model.n_estimators, "head");
    read_size(h, "max_depth", cfg.head.model.max_depth, "head");
    read(h, "learning_rate", cfg.head.model.learning_rate, "head");
    read(h, "min_child_weight", cfg.head.model.min_child_weight, "head");
    read(h, "test_fraction", cfg.head.test_fraction, "head");
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::InvalidConfig, "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    bad("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

json config_to_json(const RunConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["workers"] = cfg.workers;
  j["gen"] = {{"per_class", cfg.gen.per_class}};
  const auto& b = cfg.binning;
  json bounds;
  if (std::holds_alternative<DatasetBounds>(b.bounds)) {
    bounds = "dataset";
  } else if (std::holds_alternative<PerSeriesBounds>(b.bounds)) {
    bounds = "per_series";
  } else {
    const auto& g = std::get<GlobalBounds>(b.bounds);
    bounds = json::array({g.lo, g.hi});
  }
  j["binning"] = {{"n_tau", b.n_tau},
                  {"n_eps", b.n_eps},
                  {"n_dtau", b.n_dtau},
                  {"transform", transform_name(b.transform)},
                  {"scaling", scaling_name(b.scaling)},
                  {"bounds", bounds},
                  {"strict", b.strict}};
  j["arch"] = json::parse(sae::arch_to_json(cfg.resolved_arch()));
  const auto& t = cfg.train;
  j["train"] = {{"lambda", t.lambda},
                {"batch_size", t.batch_size},
                {"max_epochs", t.max_epochs},
                {"lr", t.lr},
                {"plateau_factor", t.plateau_factor},
                {"plateau_patience", t.plateau_patience},
                {"early_stop_patience", t.early_stop_patience},
                {"min_delta", t.min_delta}};
  const auto& s = cfg.tsne;
  j["tsne"] = {{"perplexity", s.perplexity},
               {"iterations", s.iterations},
               {"learning_rate", s.learning_rate},
               {"initial_momentum", s.initial_momentum},
               {"final_momentum", s.final_momentum},
               {"momentum_switch_iter", s.momentum_switch_iter},
               {"early_exaggeration", s.early_exaggeration},
               {"exaggeration_iters", s.exaggeration_iters},
               {"init_sigma", s.init_sigma}};
  j["cluster"] = {{"min_pts", cfg.cluster.min_pts}, {"standardize", cfg.cluster.standardize}};
  if (cfg.cluster.eps) j["cluster"]["eps"] = *cfg.cluster.eps;
  j["knn"] = {{"k", cfg.knn_k}};
  j["score"] = {{"k", cfg.score_k}};
  const auto& h = cfg.head.model;
  j["head"] = {{"n_estimators", h.n_estimators},
               {"max_depth", h.max_depth},
               {"learning_rate", h.learning_rate},
               {"min_child_weight", h.min_child_weight},
               {"test_fraction", cfg.head.test_fraction}};
  return j;
}

}  // namespace eventcube::cli
