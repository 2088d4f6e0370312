#include "mia/defenses.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace mia {

namespace {

// Picks `count` distinct values from [0, total) under the given stream.
std::vector<int> sample_without_replacement(int total, int count,
                                            SeededRng& rng) {
  std::vector<int> all(total);
  for (int i = 0; i < total; ++i) all[i] = i;
  for (int i = 0; i < count; ++i) {
    int j = i + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(total - i));
    std::swap(all[i], all[j]);
  }
  all.resize(count);
  std::sort(all.begin(), all.end());
  return all;
}

ProbVector noisy_softmax(const LogitVector& z, double variance,
                         double temperature, SeededRng& rng) {
  if (variance == 0.0) {
    return softmax(z, temperature);
  }
  Vec perturbed = z.values();
  for (double& v : perturbed) v += rng.next_gaussian(variance);
  return softmax(LogitVector(std::move(perturbed)), temperature);
}

}  // namespace

void DynaNoiseConfig::validate() const {
  if (base_variance < 0.0) throw InvalidParameterError("base_variance must be >= 0");
  if (lambda_scale < 0.0) throw InvalidParameterError("lambda_scale must be >= 0");
  if (!(temperature > 0.0)) throw InvalidParameterError("temperature must be > 0");
  if (temperature <= 1.0) {
    std::cerr << "warning: DynaNoise temperature " << temperature
              << " is <= 1; smoothing expects T > 1\n";
  }
}

void StaticNoiseConfig::validate() const {
  if (variance < 0.0) throw InvalidParameterError("variance must be >= 0");
  if (!(temperature > 0.0)) throw InvalidParameterError("temperature must be > 0");
}

void SelenaConfig::validate() const {
  if (num_submodels < 2) throw InvalidParameterError("num_submodels must be >= 2");
  if (partitions_per_sample < 1 || partitions_per_sample >= num_submodels) {
    throw InvalidParameterError("need 1 <= partitions_per_sample < num_submodels");
  }
  if (hidden_width < 1) throw InvalidParameterError("hidden_width must be >= 1");
  submodel_train.validate();
  distill_train.validate();
}

SensitivityScore sensitivity_score(const LogitVector& z) {
  const ProbVector p = softmax(z, 1.0);
  const double h = shannon_entropy(p);
  double r = 1.0 - h / std::log(static_cast<double>(z.size()));
  return SensitivityScore{std::clamp(r, 0.0, 1.0)};
}

double noise_variance(SensitivityScore r, const DynaNoiseConfig& cfg) {
  return cfg.base_variance * (1.0 + cfg.lambda_scale * r.value);
}

ProbVector dynanoise_transform(const LogitVector& z, const DynaNoiseConfig& cfg,
                               SeededRng& rng) {
  const double variance = noise_variance(sensitivity_score(z), cfg);
  return noisy_softmax(z, variance, cfg.temperature, rng);
}

ProbVector static_noise_transform(const LogitVector& z,
                                  const StaticNoiseConfig& cfg,
                                  SeededRng& rng) {
  return noisy_softmax(z, cfg.variance, cfg.temperature, rng);
}

SelenaModel selena_train(const Dataset& pool, const SelenaConfig& cfg,
                         std::uint64_t seed) {
  cfg.validate();
  const int K = cfg.num_submodels;
  const int L = cfg.partitions_per_sample;
  if (pool.size() < static_cast<std::size_t>(K)) {
    throw InvalidParameterError("SELENA pool smaller than the sub-model count");
  }

  SelenaModel model;
  model.exclusion_map.resize(pool.size());
  for (std::size_t s = 0; s < pool.size(); ++s) {
    SeededRng rng(derive_seed(seed, 1), s);
    model.exclusion_map[s] = sample_without_replacement(K, L, rng);
  }

  // Sub-model i trains on every sample whose exclusion set omits i.
  model.submodels.reserve(K);
  for (int i = 0; i < K; ++i) {
    Dataset sub;
    sub.num_classes = pool.num_classes;
    sub.feature_dim = pool.feature_dim;
    for (std::size_t s = 0; s < pool.size(); ++s) {
      const auto& excl = model.exclusion_map[s];
      if (!std::binary_search(excl.begin(), excl.end(), i)) {
        sub.examples.push_back(pool.examples[s]);
      }
    }
    if (sub.examples.empty()) {
      throw ConfigError("SELENA sub-model " + std::to_string(i) +
                        " has an empty training set");
    }
    TrainConfig tc = cfg.submodel_train;
    tc.seed = derive_seed(seed, 100 + static_cast<std::uint64_t>(i));
    model.submodels.push_back(train_mlp(sub, tc, cfg.hidden_width));
  }

  // Each sample's soft label is the mean unit-temperature softmax over the
  // sub-models that excluded it, so no sample is labeled by a model that
  // trained on it.
  std::vector<Vec> features(pool.size());
  std::vector<Vec> soft_labels(pool.size(), Vec(pool.num_classes, 0.0));
  for (std::size_t s = 0; s < pool.size(); ++s) {
    features[s] = pool.examples[s].features;
    for (int i : model.exclusion_map[s]) {
      const ProbVector p =
          softmax(predict_logits(model.submodels[static_cast<std::size_t>(i)],
                                 features[s]),
                  1.0);
      for (int c = 0; c < pool.num_classes; ++c) {
        soft_labels[s][static_cast<std::size_t>(c)] += p[static_cast<std::size_t>(c)];
      }
    }
    for (double& v : soft_labels[s]) v /= static_cast<double>(L);
  }

  TrainConfig dc = cfg.distill_train;
  dc.seed = derive_seed(seed, 9999);
  model.distilled = train_mlp_soft(features, soft_labels, dc, cfg.hidden_width,
                                   pool.num_classes);
  return model;
}

ProbVector selena_inference(const SelenaModel& model, const Vec& features) {
  return softmax(predict_logits(model.distilled, features), 1.0);
}

}  // namespace mia
