#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "geokern/common.hpp"
#include "geokern/corpus.hpp"
#include "geokern/nu_svr.hpp"
#include "geokern/stacking.hpp"
#include "geokern/string_kernel.hpp"

namespace geokern {

inline constexpr int kBundleFormatVersion = 1;

struct BundleProvenance {
  std::uint64_t seed = 0;
  std::string corpus_checksum;  // fnv1a64 of the training file, hex
  std::size_t train_samples = 0;
};

// Everything needed to reproduce predictions exactly: kernel config, the
// training profiles (or texts), the dual coefficients, and the optional
// stacked ensemble. JSON with full-precision doubles, so a save/load
// round-trip predicts bit-for-bit identically.
struct ModelBundle {
  KernelConfig kernel;
  std::vector<NGramProfile> train_profiles;
  std::optional<std::vector<std::string>> train_texts;  // embedded on request
  DualRegressor regressor;
  std::optional<StackedEnsemble> ensemble;
  BundleProvenance provenance;
};

namespace detail {

using nlohmann::json;

inline json kernel_to_json(const KernelConfig& c) {
  return {{"n_min", c.n_min}, {"n_max", c.n_max}, {"normalize", c.normalize}};
}

inline KernelConfig kernel_from_json(const json& j) {
  KernelConfig c;
  c.n_min = j.at("n_min").get<int>();
  c.n_max = j.at("n_max").get<int>();
  c.normalize = j.at("normalize").get<bool>();
  c.validate();
  return c;
}

inline json svr_params_to_json(const NuSvrParams& p) {
  return {{"c", p.c}, {"nu", p.nu}, {"tol", p.tol}, {"max_iter", p.max_iter}};
}

inline NuSvrParams svr_params_from_json(const json& j) {
  NuSvrParams p;
  p.c = j.at("c").get<double>();
  p.nu = j.at("nu").get<double>();
  p.tol = j.at("tol").get<double>();
  p.max_iter = j.at("max_iter").get<std::size_t>();
  return p;
}

inline json svr_model_to_json(const NuSvrModel& m) {
  return {{"beta", m.beta},
          {"bias", m.bias},
          {"epsilon", m.epsilon_hat},
          {"params", svr_params_to_json(m.params)},
          {"iterations", m.iterations},
          {"kkt_violation", m.kkt_violation},
          {"objective", m.objective}};
}

inline NuSvrModel svr_model_from_json(const json& j) {
  NuSvrModel m;
  m.beta = j.at("beta").get<std::vector<double>>();
  m.bias = j.at("bias").get<double>();
  m.epsilon_hat = j.at("epsilon").get<double>();
  m.params = svr_params_from_json(j.at("params"));
  m.iterations = j.at("iterations").get<std::size_t>();
  m.kkt_violation = j.at("kkt_violation").get<double>();
  m.objective = j.at("objective").get<double>();
  for (std::size_t i = 0; i < m.beta.size(); ++i)
    if (m.beta[i] != 0.0) m.support_indices.push_back(i);
  return m;
}

inline json regressor_to_json(const DualRegressor& r) {
  return {{"kernel", kernel_to_json(r.kernel)},
          {"lat", svr_model_to_json(r.lat_model)},
          {"lon", svr_model_to_json(r.lon_model)}};
}

inline DualRegressor regressor_from_json(const json& j) {
  DualRegressor r;
  r.kernel = kernel_from_json(j.at("kernel"));
  r.lat_model = svr_model_from_json(j.at("lat"));
  r.lon_model = svr_model_from_json(j.at("lon"));
  return r;
}

inline json profiles_to_json(const std::vector<NGramProfile>& profiles,
                             const KernelConfig& config) {
  json arr = json::array();
  for (const auto& p : profiles) {
    json sets = json::array();
    for (int n = config.n_min; n <= config.n_max; ++n) {
      const auto grams = p.grams(n);
      sets.push_back(std::vector<std::string>(grams.begin(), grams.end()));
    }
    arr.push_back(std::move(sets));
  }
  return arr;
}

inline std::vector<NGramProfile> profiles_from_json(const json& arr,
                                                    const KernelConfig& config) {
  std::vector<NGramProfile> profiles;
  profiles.reserve(arr.size());
  for (const auto& sets_json : arr) {
    std::vector<std::vector<std::string>> sets;
    for (const auto& set_json : sets_json) {
      auto grams = set_json.get<std::vector<std::string>>();
      std::sort(grams.begin(), grams.end());
      grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
      sets.push_back(std::move(grams));
    }
    if (sets.size() != static_cast<std::size_t>(config.n_max - config.n_min + 1))
      throw DataError("bundle: profile does not cover the kernel's n range");
    profiles.emplace_back(config, std::move(sets));
  }
  return profiles;
}

inline json tree_to_json(const RegressionTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes()) {
    nodes.push_back({{"f", n.feature},
                     {"t", n.threshold},
                     {"l", n.left},
                     {"r", n.right},
                     {"v", n.value}});
  }
  return nodes;
}

inline RegressionTree tree_from_json(const json& arr) {
  std::vector<TreeNode> nodes;
  nodes.reserve(arr.size());
  for (const auto& nj : arr) {
    TreeNode n;
    n.feature = nj.at("f").get<int>();
    n.threshold = nj.at("t").get<double>();
    n.left = nj.at("l").get<int>();
    n.right = nj.at("r").get<int>();
    n.value = nj.at("v").get<double>();
    nodes.push_back(n);
  }
  return RegressionTree(std::move(nodes));
}

inline json gbt_to_json(const GbtModel& m) {
  json trees = json::array();
  for (const auto& t : m.trees) trees.push_back(tree_to_json(t));
  return {{"base_score", m.base_score},
          {"params",
           {{"n_rounds", m.params.n_rounds},
            {"max_depth", m.params.max_depth},
            {"learning_rate", m.params.learning_rate},
            {"colsample", m.params.colsample},
            {"min_samples_leaf", m.params.min_samples_leaf},
            {"seed", m.params.seed}}},
          {"trees", std::move(trees)}};
}

inline GbtModel gbt_from_json(const json& j) {
  GbtModel m;
  m.base_score = j.at("base_score").get<double>();
  const json& p = j.at("params");
  m.params.n_rounds = p.at("n_rounds").get<std::size_t>();
  m.params.max_depth = p.at("max_depth").get<int>();
  m.params.learning_rate = p.at("learning_rate").get<double>();
  m.params.colsample = p.at("colsample").get<double>();
  m.params.min_samples_leaf = p.at("min_samples_leaf").get<std::size_t>();
  m.params.seed = p.at("seed").get<std::uint64_t>();
  for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t));
  return m;
}

inline json base_model_to_json(const BaseModel& base) {
  if (const auto* svr = dynamic_cast<const SvrTextModel*>(&base)) {
    if (!svr->fitted()) throw Error("bundle: unfitted base model");
    return {{"type", "svr"},
            {"kernel", kernel_to_json(svr->kernel_config())},
            {"params", svr_params_to_json(svr->svr_params())},
            {"regressor", regressor_to_json(svr->regressor())},
            {"profiles",
             profiles_to_json(svr->train_profiles(), svr->kernel_config())}};
  }
  if (const auto* cen = dynamic_cast<const CentroidModel*>(&base)) {
    if (!cen->fitted()) throw Error("bundle: unfitted base model");
    return {{"type", "centroid"},
            {"center", {{"lat", cen->center().lat}, {"lon", cen->center().lon}}}};
  }
  throw Error("bundle: base model '" + base.name() + "' is not serializable");
}

inline std::unique_ptr<BaseModel> base_model_from_json(const json& j,
                                                       unsigned threads) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "svr") {
    const KernelConfig kernel = kernel_from_json(j.at("kernel"));
    auto model = std::make_unique<SvrTextModel>(
        kernel, svr_params_from_json(j.at("params")), threads);
    model->restore(profiles_from_json(j.at("profiles"), kernel),
                   regressor_from_json(j.at("regressor")));
    return model;
  }
  if (type == "centroid") {
    auto model = std::make_unique<CentroidModel>();
    model->restore({j.at("center").at("lat").get<double>(),
                    j.at("center").at("lon").get<double>()});
    return model;
  }
  throw DataError("bundle: unknown base model type '" + type + "'");
}

}  // namespace detail

inline std::string serialize_bundle(const ModelBundle& bundle) {
  using detail::json;
  json j;
  j["format"] = "geokern-model-bundle";
  j["format_version"] = kBundleFormatVersion;
  j["kernel"] = detail::kernel_to_json(bundle.kernel);
  j["svr"] = detail::regressor_to_json(bundle.regressor);
  j["train_profiles"] =
      detail::profiles_to_json(bundle.train_profiles, bundle.kernel);
  if (bundle.train_texts) j["train_texts"] = *bundle.train_texts;
  if (bundle.ensemble) {
    json base = json::array();
    for (const auto& b : bundle.ensemble->base_models)
      base.push_back(detail::base_model_to_json(*b));
    j["ensemble"] = {{"folds", bundle.ensemble->folds},
                     {"base_models", std::move(base)},
                     {"meta_lat", detail::gbt_to_json(bundle.ensemble->meta_lat)},
                     {"meta_lon", detail::gbt_to_json(bundle.ensemble->meta_lon)}};
  }
  j["provenance"] = {{"seed", bundle.provenance.seed},
                     {"corpus_checksum", bundle.provenance.corpus_checksum},
                     {"train_samples", bundle.provenance.train_samples}};
  return j.dump(1, '\t') + "\n";
}

inline ModelBundle deserialize_bundle(const std::string& text,
                                      unsigned threads = 1) {
  using detail::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("bundle: not valid JSON: ") + e.what());
  }
  try {
    if (j.value("format", std::string()) != "geokern-model-bundle")
      throw DataError("bundle: missing geokern-model-bundle marker");
    const int version = j.at("format_version").get<int>();
    if (version != kBundleFormatVersion)
      throw DataError("bundle: format version " + std::to_string(version) +
                      " is not supported; this build reads version " +
                      std::to_string(kBundleFormatVersion));
    ModelBundle bundle;
    bundle.kernel = detail::kernel_from_json(j.at("kernel"));
    bundle.regressor = detail::regressor_from_json(j.at("svr"));
    bundle.train_profiles =
        detail::profiles_from_json(j.at("train_profiles"), bundle.kernel);
    if (j.contains("train_texts"))
      bundle.train_texts = j.at("train_texts").get<std::vector<std::string>>();
    if (j.contains("ensemble")) {
      const json& e = j.at("ensemble");
      StackedEnsemble ensemble;
      ensemble.folds = e.at("folds").get<std::size_t>();
      for (const auto& b : e.at("base_models"))
        ensemble.base_models.push_back(detail::base_model_from_json(b, threads));
      ensemble.meta_lat = detail::gbt_from_json(e.at("meta_lat"));
      ensemble.meta_lon = detail::gbt_from_json(e.at("meta_lon"));
      bundle.ensemble = std::move(ensemble);
    }
    const json& prov = j.at("provenance");
    bundle.provenance.seed = prov.at("seed").get<std::uint64_t>();
    bundle.provenance.corpus_checksum =
        prov.at("corpus_checksum").get<std::string>();
    bundle.provenance.train_samples = prov.at("train_samples").get<std::size_t>();
    return bundle;
  } catch (const json::exception& e) {
    throw DataError(std::string("bundle: malformed contents: ") + e.what());
  }
}

inline void save_bundle(const ModelBundle& bundle, const std::string& path) {
  write_file(path, serialize_bundle(bundle));
}

inline ModelBundle load_bundle(const std::string& path, unsigned threads = 1) {
  try {
    return deserialize_bundle(read_file(path), threads);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

// Predicts with the ensemble when one is present, else with the plain
// dual-SVR. This matches how the bundle was intended to be used at save
// time: the ensemble is only stored when it was requested at training.
inline std::vector<GeoPoint> predict_with_bundle(const ModelBundle& bundle,
                                                 std::span<const std::string> texts,
                                                 unsigned threads = 1) {
  if (bundle.ensemble) return predict_stack(*bundle.ensemble, texts);
  const std::vector<NGramProfile> query = profile_all(texts, bundle.kernel, threads);
  const KernelMatrix Kq = gram_matrix(query, bundle.train_profiles, threads);
  return predict_dual(bundle.regressor, Kq);
}

}  // namespace geokern
