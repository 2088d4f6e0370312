#include "mia/models.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace mia {

namespace {

using nlohmann::json;

void shuffle_sizes(std::vector<std::size_t>& idx, SeededRng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
    std::swap(idx[i - 1], idx[j]);
  }
}

Vec uniform_init(std::size_t count, int fan_in, SeededRng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Vec w(count);
  for (double& v : w) v = (2.0 * rng.next_uniform() - 1.0) * bound;
  return w;
}

// Forward pass writing hidden activations and output probabilities.
void mlp_forward(const MlpParams& m, const Vec& x, Vec& hidden, Vec& probs) {
  const int d = m.input_dim, h = m.hidden_dim, k = m.num_classes;
  hidden.assign(h, 0.0);
  for (int j = 0; j < h; ++j) {
    double s = m.b1[j];
    const double* row = &m.w1[static_cast<std::size_t>(j) * d];
    for (int i = 0; i < d; ++i) s += row[i] * x[i];
    hidden[j] = s > 0.0 ? s : 0.0;
  }
  Vec logits(k);
  for (int c = 0; c < k; ++c) {
    double s = m.b2[c];
    const double* row = &m.w2[static_cast<std::size_t>(c) * h];
    for (int j = 0; j < h; ++j) s += row[j] * hidden[j];
    logits[c] = s;
  }
  const double zmax = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  probs.assign(k, 0.0);
  for (int c = 0; c < k; ++c) {
    probs[c] = std::exp(logits[c] - zmax);
    sum += probs[c];
  }
  for (double& p : probs) p /= sum;
}

// Accumulates d(loss)/d(params) for one example into grad, where the
// per-example loss is cross-entropy against `target` (a distribution).
void mlp_backward(const MlpParams& m, const Vec& x, const Vec& hidden,
                  const Vec& probs, const Vec& target, double scale,
                  MlpParams& grad) {
  const int d = m.input_dim, h = m.hidden_dim, k = m.num_classes;
  Vec delta_out(k);
  for (int c = 0; c < k; ++c) delta_out[c] = scale * (probs[c] - target[c]);
  Vec delta_hidden(h, 0.0);
  for (int c = 0; c < k; ++c) {
    double* grow = &grad.w2[static_cast<std::size_t>(c) * h];
    const double* wrow = &m.w2[static_cast<std::size_t>(c) * h];
    for (int j = 0; j < h; ++j) {
      grow[j] += delta_out[c] * hidden[j];
      delta_hidden[j] += delta_out[c] * wrow[j];
    }
    grad.b2[c] += delta_out[c];
  }
  for (int j = 0; j < h; ++j) {
    if (hidden[j] <= 0.0) continue;  // ReLU gate
    double* grow = &grad.w1[static_cast<std::size_t>(j) * d];
    for (int i = 0; i < d; ++i) grow[i] += delta_hidden[j] * x[i];
    grad.b1[j] += delta_hidden[j];
  }
}

MlpParams zero_like(const MlpParams& m) {
  MlpParams g;
  g.input_dim = m.input_dim;
  g.hidden_dim = m.hidden_dim;
  g.num_classes = m.num_classes;
  g.w1.assign(m.w1.size(), 0.0);
  g.b1.assign(m.b1.size(), 0.0);
  g.w2.assign(m.w2.size(), 0.0);
  g.b2.assign(m.b2.size(), 0.0);
  return g;
}

void axpy(Vec& y, const Vec& x, double a) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

// Shared SGD core. Targets are per-example distributions over k classes.
MlpParams sgd_train(const std::vector<const Vec*>& features,
                    const std::vector<Vec>& targets, const TrainConfig& cfg,
                    int hidden_width, int input_dim, int num_classes) {
  cfg.validate();
  if (hidden_width < 1) throw InvalidParameterError("hidden width must be >= 1");
  if (features.empty()) throw InvalidParameterError("empty training set");

  MlpParams m;
  m.input_dim = input_dim;
  m.hidden_dim = hidden_width;
  m.num_classes = num_classes;
  SeededRng init_rng(cfg.seed, 0);
  m.w1 = uniform_init(static_cast<std::size_t>(hidden_width) * input_dim,
                      input_dim, init_rng);
  m.b1.assign(hidden_width, 0.0);
  m.w2 = uniform_init(static_cast<std::size_t>(num_classes) * hidden_width,
                      hidden_width, init_rng);
  m.b2.assign(num_classes, 0.0);

  MlpParams velocity = zero_like(m);
  std::vector<std::size_t> order(features.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  Vec hidden, probs;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    SeededRng shuffle_rng(cfg.seed, 1 + static_cast<std::uint64_t>(epoch));
    shuffle_sizes(order, shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      MlpParams grad = zero_like(m);
      for (std::size_t p = start; p < end; ++p) {
        const Vec& x = *features[order[p]];
        const Vec& t = targets[order[p]];
        mlp_forward(m, x, hidden, probs);
        for (int c = 0; c < num_classes; ++c) {
          if (t[c] > 0.0) epoch_loss -= t[c] * std::log(std::max(probs[c], kProbFloor));
        }
        mlp_backward(m, x, hidden, probs, t, 1.0, grad);
      }
      // Gradients are summed over the batch, not averaged.
      const std::pair<Vec*, const Vec*> layers[] = {
          {&velocity.w1, &grad.w1},
          {&velocity.b1, &grad.b1},
          {&velocity.w2, &grad.w2},
          {&velocity.b2, &grad.b2}};
      for (const auto& [v, g] : layers) {
        for (std::size_t i = 0; i < v->size(); ++i) {
          (*v)[i] = cfg.momentum * (*v)[i] + (*g)[i];
        }
      }
      axpy(m.w1, velocity.w1, -cfg.learning_rate);
      axpy(m.b1, velocity.b1, -cfg.learning_rate);
      axpy(m.w2, velocity.w2, -cfg.learning_rate);
      axpy(m.b2, velocity.b2, -cfg.learning_rate);
    }
    if (!std::isfinite(epoch_loss)) {
      throw TrainingDivergedError(
          "NaN loss at epoch " + std::to_string(epoch) +
          "; consider lowering learning_rate");
    }
  }
  return m;
}

Vec one_hot(int label, int k) {
  Vec t(k, 0.0);
  t[static_cast<std::size_t>(label)] = 1.0;
  return t;
}

json vec_to_json(const Vec& v) { return json(v); }

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw InvalidParameterError("epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw InvalidParameterError("learning_rate must be positive");
  if (batch_size < 1) throw InvalidParameterError("batch_size must be >= 1");
  if (momentum < 0.0 || momentum >= 1.0) throw InvalidParameterError("momentum must lie in [0, 1)");
}

MlpParams train_mlp(const Dataset& train, const TrainConfig& cfg,
                    int hidden_width) {
  if (train.examples.empty()) throw InvalidParameterError("empty dataset");
  std::vector<const Vec*> features;
  std::vector<Vec> targets;
  features.reserve(train.size());
  targets.reserve(train.size());
  for (const auto& ex : train.examples) {
    if (ex.label < 0 || ex.label >= train.num_classes) {
      throw InvalidLabelError("dataset label out of range");
    }
    features.push_back(&ex.features);
    targets.push_back(one_hot(ex.label, train.num_classes));
  }
  return sgd_train(features, targets, cfg, hidden_width, train.feature_dim,
                   train.num_classes);
}

MlpParams train_mlp_soft(const std::vector<Vec>& features,
                         const std::vector<Vec>& soft_labels,
                         const TrainConfig& cfg, int hidden_width,
                         int num_classes) {
  if (features.empty()) throw InvalidParameterError("empty training set");
  if (features.size() != soft_labels.size()) {
    throw InvalidInputError("features/soft_labels size mismatch");
  }
  std::vector<const Vec*> fptr;
  fptr.reserve(features.size());
  for (const auto& f : features) fptr.push_back(&f);
  return sgd_train(fptr, soft_labels, cfg, hidden_width,
                   static_cast<int>(features.front().size()), num_classes);
}

LogitVector predict_logits(const MlpParams& m, const Vec& x) {
  if (static_cast<int>(x.size()) != m.input_dim) {
    throw InvalidInputError("feature length does not match input_dim");
  }
  const int d = m.input_dim, h = m.hidden_dim, k = m.num_classes;
  Vec hidden(h);
  for (int j = 0; j < h; ++j) {
    double s = m.b1[j];
    const double* row = &m.w1[static_cast<std::size_t>(j) * d];
    for (int i = 0; i < d; ++i) s += row[i] * x[i];
    hidden[j] = s > 0.0 ? s : 0.0;
  }
  Vec logits(k);
  for (int c = 0; c < k; ++c) {
    double s = m.b2[c];
    const double* row = &m.w2[static_cast<std::size_t>(c) * h];
    for (int j = 0; j < h; ++j) s += row[j] * hidden[j];
    logits[c] = s;
  }
  return LogitVector(std::move(logits));
}

double model_accuracy(const MlpParams& m, const Dataset& eval_set) {
  if (eval_set.examples.empty()) throw InvalidParameterError("empty eval set");
  std::size_t correct = 0;
  for (const auto& ex : eval_set.examples) {
    const Vec z = predict_logits(m, ex.features).values();
    std::size_t best = 0;
    for (std::size_t c = 1; c < z.size(); ++c) {
      if (z[c] > z[best]) best = c;  // ties keep the lower index
    }
    if (static_cast<int>(best) == ex.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(eval_set.size());
}

double mlp_mean_loss(const MlpParams& m, const Dataset& data) {
  double total = 0.0;
  Vec hidden, probs;
  for (const auto& ex : data.examples) {
    mlp_forward(m, ex.features, hidden, probs);
    total -= std::log(std::max(probs[static_cast<std::size_t>(ex.label)], kProbFloor));
  }
  return total / static_cast<double>(data.size());
}

MlpParams mlp_mean_loss_gradient(const MlpParams& m, const Dataset& data) {
  MlpParams grad = zero_like(m);
  Vec hidden, probs;
  const double scale = 1.0 / static_cast<double>(data.size());
  for (const auto& ex : data.examples) {
    mlp_forward(m, ex.features, hidden, probs);
    mlp_backward(m, ex.features, hidden, probs,
                 one_hot(ex.label, m.num_classes), scale, grad);
  }
  return grad;
}

LogRegParams train_logreg(const std::vector<Vec>& features,
                          const std::vector<int>& labels,
                          const TrainConfig& cfg) {
  cfg.validate();
  if (features.empty() || features.size() != labels.size()) {
    throw InvalidInputError("features/labels size mismatch or empty");
  }
  const std::size_t n = features.size();
  const std::size_t d = features.front().size();
  bool has0 = false, has1 = false;
  for (int y : labels) {
    if (y == 0) has0 = true;
    else if (y == 1) has1 = true;
    else throw InvalidLabelError("logreg labels must be 0 or 1");
  }
  if (!has0 || !has1) {
    throw DegenerateLabelsError("logreg training data contains a single class");
  }
  for (const auto& f : features) {
    if (f.size() != d) throw InvalidInputError("inconsistent feature length");
  }

  LogRegParams p;
  p.feature_mean.assign(d, 0.0);
  p.feature_std.assign(d, 0.0);
  for (const auto& f : features) {
    for (std::size_t i = 0; i < d; ++i) p.feature_mean[i] += f[i];
  }
  for (double& v : p.feature_mean) v /= static_cast<double>(n);
  for (const auto& f : features) {
    for (std::size_t i = 0; i < d; ++i) {
      const double c = f[i] - p.feature_mean[i];
      p.feature_std[i] += c * c;
    }
  }
  for (double& v : p.feature_std) {
    v = std::sqrt(v / static_cast<double>(n));
    if (v < 1e-12) v = 1.0;  // constant feature: leave it centered
  }

  // Standardize once up front.
  std::vector<Vec> x(n, Vec(d));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < d; ++i) {
      x[r][i] = (features[r][i] - p.feature_mean[i]) / p.feature_std[i];
    }
  }

  p.weights.assign(d, 0.0);
  p.bias = 0.0;
  Vec vel(d + 1, 0.0);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    SeededRng shuffle_rng(cfg.seed, 1 + static_cast<std::uint64_t>(epoch));
    shuffle_sizes(order, shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n;
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end =
          std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      Vec grad(d + 1, 0.0);
      for (std::size_t q = start; q < end; ++q) {
        const std::size_t r = order[q];
        double s = p.bias;
        for (std::size_t i = 0; i < d; ++i) s += p.weights[i] * x[r][i];
        const double pred = 1.0 / (1.0 + std::exp(-s));
        const double err = pred - static_cast<double>(labels[r]);
        for (std::size_t i = 0; i < d; ++i) grad[i] += err * x[r][i];
        grad[d] += err;
        const double py = labels[r] == 1 ? pred : 1.0 - pred;
        epoch_loss -= std::log(std::max(py, kProbFloor));
      }
      for (std::size_t i = 0; i <= d; ++i) {
        vel[i] = cfg.momentum * vel[i] + grad[i];
      }
      for (std::size_t i = 0; i < d; ++i) p.weights[i] -= cfg.learning_rate * vel[i];
      p.bias -= cfg.learning_rate * vel[d];
    }
    if (!std::isfinite(epoch_loss)) {
      throw TrainingDivergedError("logreg loss went NaN at epoch " +
                                  std::to_string(epoch));
    }
  }
  return p;
}

double logreg_predict(const LogRegParams& p, const Vec& f) {
  if (f.size() != p.weights.size()) {
    throw InvalidInputError("feature length does not match classifier");
  }
  double s = p.bias;
  for (std::size_t i = 0; i < f.size(); ++i) {
    s += p.weights[i] * (f[i] - p.feature_mean[i]) / p.feature_std[i];
  }
  return 1.0 / (1.0 + std::exp(-s));
}

double logreg_mean_loss(const LogRegParams& p, const std::vector<Vec>& features,
                        const std::vector<int>& labels) {
  double total = 0.0;
  for (std::size_t r = 0; r < features.size(); ++r) {
    const double pred = logreg_predict(p, features[r]);
    const double py = labels[r] == 1 ? pred : 1.0 - pred;
    total -= std::log(std::max(py, kProbFloor));
  }
  return total / static_cast<double>(features.size());
}

Vec logreg_mean_loss_gradient(const LogRegParams& p,
                              const std::vector<Vec>& features,
                              const std::vector<int>& labels) {
  const std::size_t d = p.weights.size();
  Vec grad(d + 1, 0.0);
  for (std::size_t r = 0; r < features.size(); ++r) {
    const double err =
        logreg_predict(p, features[r]) - static_cast<double>(labels[r]);
    for (std::size_t i = 0; i < d; ++i) {
      grad[i] +=
          err * (features[r][i] - p.feature_mean[i]) / p.feature_std[i];
    }
    grad[d] += err;
  }
  for (double& g : grad) g /= static_cast<double>(features.size());
  return grad;
}

std::string mlp_to_json(const MlpParams& m) {
  json j{{"input_dim", m.input_dim},
         {"hidden_dim", m.hidden_dim},
         {"num_classes", m.num_classes},
         {"w1", vec_to_json(m.w1)},
         {"b1", vec_to_json(m.b1)},
         {"w2", vec_to_json(m.w2)},
         {"b2", vec_to_json(m.b2)}};
  return j.dump(2);
}

MlpParams mlp_from_json(const std::string& text) {
  MlpParams m;
  try {
    json j = json::parse(text);
    m.input_dim = j.at("input_dim").get<int>();
    m.hidden_dim = j.at("hidden_dim").get<int>();
    m.num_classes = j.at("num_classes").get<int>();
    m.w1 = j.at("w1").get<Vec>();
    m.b1 = j.at("b1").get<Vec>();
    m.w2 = j.at("w2").get<Vec>();
    m.b2 = j.at("b2").get<Vec>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("bad MLP document: ") + e.what());
  }
  const auto h = static_cast<std::size_t>(m.hidden_dim);
  if (m.w1.size() != h * static_cast<std::size_t>(m.input_dim) ||
      m.b1.size() != h ||
      m.w2.size() != static_cast<std::size_t>(m.num_classes) * h ||
      m.b2.size() != static_cast<std::size_t>(m.num_classes)) {
    throw SchemaError("MLP array sizes inconsistent with declared shape");
  }
  return m;
}

std::string logreg_to_json(const LogRegParams& p) {
  json j{{"weights", vec_to_json(p.weights)},
         {"bias", p.bias},
         {"feature_mean", vec_to_json(p.feature_mean)},
         {"feature_std", vec_to_json(p.feature_std)}};
  return j.dump(2);
}

LogRegParams logreg_from_json(const std::string& text) {
  LogRegParams p;
  try {
    json j = json::parse(text);
    p.weights = j.at("weights").get<Vec>();
    p.bias = j.at("bias").get<double>();
    p.feature_mean = j.at("feature_mean").get<Vec>();
    p.feature_std = j.at("feature_std").get<Vec>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("bad logreg document: ") + e.what());
  }
  if (p.feature_mean.size() != p.weights.size() ||
      p.feature_std.size() != p.weights.size()) {
    throw SchemaError("logreg array sizes inconsistent");
  }
  return p;
}

}  // namespace mia
