#ifndef MIA_MODELS_HPP
#define MIA_MODELS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "mia/data.hpp"
#include "mia/numerics.hpp"

namespace mia {

// One-hidden-layer ReLU network, d -> h -> k. Weights are row-major:
// w1[j*d + i] connects input i to hidden unit j, w2[c*h + j] connects hidden
// unit j to class c.
struct MlpParams {
  int input_dim = 0;
  int hidden_dim = 0;
  int num_classes = 0;
  Vec w1, b1, w2, b2;
};

struct TrainConfig {
  int epochs = 15;
  double learning_rate = 0.01;
  int batch_size = 64;
  // Classical momentum over summed per-batch gradients. 0 disables it.
  double momentum = 0.7;
  std::uint64_t seed = 0;

  void validate() const;
};

// Binary logistic regression over standardized features. The per-dimension
// standardization statistics travel with the parameters so prediction sees
// the same transform as training.
struct LogRegParams {
  Vec weights;
  double bias = 0.0;
  Vec feature_mean;
  Vec feature_std;
};

// Minibatch SGD on softmax cross-entropy. Per-epoch shuffle and weight init
// both derive from cfg.seed; fixed inputs give bit-identical parameters.
MlpParams train_mlp(const Dataset& train, const TrainConfig& cfg,
                    int hidden_width);

// Same optimizer, but against per-example soft target distributions
// (SELENA's self-distillation step).
MlpParams train_mlp_soft(const std::vector<Vec>& features,
                         const std::vector<Vec>& soft_labels,
                         const TrainConfig& cfg, int hidden_width,
                         int num_classes);

LogitVector predict_logits(const MlpParams& params, const Vec& features);

// Fraction of examples whose argmax logit equals the label; argmax ties go to
// the lowest class index.
double model_accuracy(const MlpParams& params, const Dataset& eval_set);

// Mean softmax cross-entropy over the dataset; used by the finite-difference
// gradient tests.
double mlp_mean_loss(const MlpParams& params, const Dataset& data);

// Analytic gradient of mlp_mean_loss, in MlpParams layout.
MlpParams mlp_mean_loss_gradient(const MlpParams& params, const Dataset& data);

LogRegParams train_logreg(const std::vector<Vec>& features,
                          const std::vector<int>& labels,
                          const TrainConfig& cfg);

// sigmoid(w . standardized(x) + b), in (0, 1).
double logreg_predict(const LogRegParams& params, const Vec& features);

double logreg_mean_loss(const LogRegParams& params,
                        const std::vector<Vec>& features,
                        const std::vector<int>& labels);
// Gradient w.r.t. (weights, bias), bias appended last.
Vec logreg_mean_loss_gradient(const LogRegParams& params,
                              const std::vector<Vec>& features,
                              const std::vector<int>& labels);

// JSON round-trip for the CLI's train/defend/attack file pipeline.
std::string mlp_to_json(const MlpParams& params);
MlpParams mlp_from_json(const std::string& text);
std::string logreg_to_json(const LogRegParams& params);
LogRegParams logreg_from_json(const std::string& text);

}  // namespace mia

#endif  // MIA_MODELS_HPP
