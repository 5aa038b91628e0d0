#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "geokern/common.hpp"
#include "geokern/corpus.hpp"
#include "geokern/gbt.hpp"
#include "geokern/geoeval.hpp"
#include "geokern/nu_svr.hpp"
#include "geokern/string_kernel.hpp"

namespace geokern {

// A first-level location predictor the stacking meta-learner combines.
class BaseModel {
 public:
  virtual ~BaseModel() = default;
  virtual std::string name() const = 0;
  virtual void fit(const Corpus& train) = 0;
  virtual std::vector<GeoPoint> predict(std::span<const std::string> texts) const = 0;
  // Unfitted copy with the same configuration, for per-fold retraining.
  virtual std::unique_ptr<BaseModel> clone_unfitted() const = 0;
};

// nu-SVR over the presence-bits string kernel; the primary base model.
class SvrTextModel final : public BaseModel {
 public:
  SvrTextModel(KernelConfig kernel, NuSvrParams params, unsigned threads = 1)
      : kernel_(kernel), params_(params), threads_(threads) {}

  std::string name() const override {
    return "svr-" + std::to_string(kernel_.n_min) + "-" +
           std::to_string(kernel_.n_max);
  }

  void fit(const Corpus& train) override {
    const std::vector<std::string> texts = texts_of(train);
    const std::vector<GeoPoint> locations = locations_of(train);
    profiles_ = profile_all(texts, kernel_, threads_);
    const KernelMatrix K = gram_matrix(profiles_, threads_);
    regressor_ = train_dual(K, locations, params_, threads_);
    fitted_ = true;
  }

  std::vector<GeoPoint> predict(std::span<const std::string> texts) const override {
    if (!fitted_) throw Error(name() + ": predict before fit");
    const std::vector<NGramProfile> query = profile_all(texts, kernel_, threads_);
    const KernelMatrix Kq = gram_matrix(query, profiles_, threads_);
    return predict_dual(regressor_, Kq);
  }

  std::unique_ptr<BaseModel> clone_unfitted() const override {
    return std::make_unique<SvrTextModel>(kernel_, params_, threads_);
  }

  const KernelConfig& kernel_config() const { return kernel_; }
  const NuSvrParams& svr_params() const { return params_; }
  const std::vector<NGramProfile>& train_profiles() const { return profiles_; }
  const DualRegressor& regressor() const { return regressor_; }
  bool fitted() const { return fitted_; }

  // For bundle loading: restore a previously fitted state.
  void restore(std::vector<NGramProfile> profiles, DualRegressor regressor) {
    profiles_ = std::move(profiles);
    regressor_ = std::move(regressor);
    fitted_ = true;
  }

 private:
  KernelConfig kernel_;
  NuSvrParams params_;
  unsigned threads_;
  std::vector<NGramProfile> profiles_;
  DualRegressor regressor_;
  bool fitted_ = false;
};

// Predicts the training centroid for every query.
class CentroidModel final : public BaseModel {
 public:
  CentroidModel() = default;

  std::string name() const override { return "centroid"; }

  void fit(const Corpus& train) override {
    center_ = centroid(train);
    fitted_ = true;
  }

  std::vector<GeoPoint> predict(std::span<const std::string> texts) const override {
    if (!fitted_) throw Error("centroid: predict before fit");
    return std::vector<GeoPoint>(texts.size(), center_);
  }

  std::unique_ptr<BaseModel> clone_unfitted() const override {
    return std::make_unique<CentroidModel>();
  }

  const GeoPoint& center() const { return center_; }
  bool fitted() const { return fitted_; }
  void restore(GeoPoint center) {
    center_ = center;
    fitted_ = true;
  }

 private:
  GeoPoint center_;
  bool fitted_ = false;
};

// The trio used when no explicit base-model list is given: the tuned-range
// kernel model, a single-length kernel variant, and the centroid baseline.
inline std::vector<std::unique_ptr<BaseModel>> default_base_models(
    const NuSvrParams& params, unsigned threads = 1) {
  std::vector<std::unique_ptr<BaseModel>> models;
  models.push_back(std::make_unique<SvrTextModel>(KernelConfig{3, 5, true},
                                                  params, threads));
  models.push_back(std::make_unique<SvrTextModel>(KernelConfig{3, 3, true},
                                                  params, threads));
  models.push_back(std::make_unique<CentroidModel>());
  return models;
}

// Base models plus one boosted-tree meta-learner per coordinate. The meta
// feature matrix holds each base model's (lat, lon) prediction; nothing from
// the raw texts reaches the meta-learners.
struct StackedEnsemble {
  std::vector<std::unique_ptr<BaseModel>> base_models;  // refit on full train
  GbtModel meta_lat;
  GbtModel meta_lon;
  std::size_t folds = 0;
};

namespace detail {

// Shuffled contiguous chunks; fold of row i, sizes differing by at most one.
inline std::vector<std::size_t> fold_assignment(std::size_t n, std::size_t k,
                                                std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<std::size_t> fold(n);
  std::size_t begin = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    for (std::size_t i = begin; i < begin + size; ++i) fold[order[i]] = f;
    begin += size;
  }
  return fold;
}

}  // namespace detail

// Out-of-fold stacking: every meta-training feature for row i comes from a
// base model fitted without row i. Base models are refit on the full corpus
// afterwards for inference.
inline StackedEnsemble fit_stack(std::vector<std::unique_ptr<BaseModel>> base_models,
                                 const Corpus& train, std::size_t k,
                                 const GbtParams& params) {
  if (base_models.empty()) throw DataError("fit_stack: no base models");
  if (k < 2) throw DataError("fit_stack: need at least 2 folds");
  if (k > train.size())
    throw DataError("fit_stack: k > corpus size (" + std::to_string(k) + " > " +
                    std::to_string(train.size()) + ")");
  if (!train.labeled) throw DataError("fit_stack: corpus is unlabeled");

  const std::size_t n = train.size();
  const std::vector<std::size_t> fold = detail::fold_assignment(n, k, params.seed);

  Matrix meta(n, 2 * base_models.size());
  for (std::size_t b = 0; b < base_models.size(); ++b) {
    for (std::size_t f = 0; f < k; ++f) {
      Corpus fit_part, held_out;
      fit_part.labeled = held_out.labeled = true;
      std::vector<std::size_t> held_rows;
      for (std::size_t i = 0; i < n; ++i) {
        if (fold[i] == f) {
          held_out.samples.push_back(train.samples[i]);
          held_rows.push_back(i);
        } else {
          fit_part.samples.push_back(train.samples[i]);
        }
      }
      auto model = base_models[b]->clone_unfitted();
      model->fit(fit_part);
      const std::vector<GeoPoint> pred = model->predict(texts_of(held_out));
      for (std::size_t r = 0; r < held_rows.size(); ++r) {
        meta.at(held_rows[r], 2 * b) = pred[r].lat;
        meta.at(held_rows[r], 2 * b + 1) = pred[r].lon;
      }
    }
  }

  std::vector<double> gold_lat(n), gold_lon(n);
  for (std::size_t i = 0; i < n; ++i) {
    gold_lat[i] = train.samples[i].location->lat;
    gold_lon[i] = train.samples[i].location->lon;
  }

  StackedEnsemble ensemble;
  ensemble.folds = k;
  ensemble.meta_lat = fit_gbt(meta, gold_lat, params);
  ensemble.meta_lon = fit_gbt(meta, gold_lon, params);
  for (auto& b : base_models) b->fit(train);
  ensemble.base_models = std::move(base_models);
  return ensemble;
}

inline Matrix stack_features(const StackedEnsemble& ensemble,
                             std::span<const std::string> texts) {
  Matrix meta(texts.size(), 2 * ensemble.base_models.size());
  for (std::size_t b = 0; b < ensemble.base_models.size(); ++b) {
    const std::vector<GeoPoint> pred = ensemble.base_models[b]->predict(texts);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      meta.at(i, 2 * b) = pred[i].lat;
      meta.at(i, 2 * b + 1) = pred[i].lon;
    }
  }
  return meta;
}

inline std::vector<GeoPoint> predict_stack(const StackedEnsemble& ensemble,
                                           std::span<const std::string> texts) {
  const Matrix meta = stack_features(ensemble, texts);
  const std::vector<double> lat = predict_gbt(ensemble.meta_lat, meta);
  const std::vector<double> lon = predict_gbt(ensemble.meta_lon, meta);
  std::vector<GeoPoint> out(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) out[i] = {lat[i], lon[i]};
  return out;
}

}  // namespace geokern
