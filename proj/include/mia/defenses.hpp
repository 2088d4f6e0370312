#ifndef MIA_DEFENSES_HPP
#define MIA_DEFENSES_HPP

#include <cstdint>
#include <vector>

#include "mia/data.hpp"
#include "mia/models.hpp"
#include "mia/numerics.hpp"

namespace mia {

// The three defense knobs: base variance, sensitivity scaling, smoothing
// temperature.
struct DynaNoiseConfig {
  double base_variance = 0.5;
  double lambda_scale = 4.0;
  double temperature = 2.0;

  // Throws on invalid values; warns on stderr for temperature <= 1, which is
  // accepted but outside the intended smoothing regime.
  void validate() const;
};

// Fixed-variance strawman: same transform with the sensitivity scaling
// switched off.
struct StaticNoiseConfig {
  double variance = 0.5;
  double temperature = 2.0;

  void validate() const;
};

struct SelenaConfig {
  int num_submodels = 5;        // K
  int partitions_per_sample = 2;  // L, sub-models that must exclude a sample
  int hidden_width = 64;          // architecture shared with the target model
  TrainConfig submodel_train;
  TrainConfig distill_train;

  void validate() const;
};

// Query risk in [0, 1]: 1 - H(softmax(z)) / ln k. High for confident
// (low-entropy) predictions, which leak the most membership signal.
struct SensitivityScore {
  double value = 0.0;
};

SensitivityScore sensitivity_score(const LogitVector& z);

// base_variance * (1 + lambda_scale * r).
double noise_variance(SensitivityScore r, const DynaNoiseConfig& cfg);

// Sensitivity from the clean logits, isotropic Gaussian noise on the logits
// (k draws in logit order), then temperature softmax.
ProbVector dynanoise_transform(const LogitVector& z, const DynaNoiseConfig& cfg,
                               SeededRng& rng);

ProbVector static_noise_transform(const LogitVector& z,
                                  const StaticNoiseConfig& cfg, SeededRng& rng);

// Split-AI ensemble plus the self-distilled model that actually serves
// queries. Sub-models and the exclusion map are retained for inspection.
struct SelenaModel {
  MlpParams distilled;
  std::vector<MlpParams> submodels;
  // exclusion_map[sample] lists the L sub-model indices that never saw it.
  std::vector<std::vector<int>> exclusion_map;
};

SelenaModel selena_train(const Dataset& pool, const SelenaConfig& cfg,
                         std::uint64_t seed);

// The deployed path: distilled model logits through a unit-temperature
// softmax. No randomness at inference.
ProbVector selena_inference(const SelenaModel& model, const Vec& features);

}  // namespace mia

#endif  // MIA_DEFENSES_HPP
