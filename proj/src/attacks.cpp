#include "mia/attacks.hpp"

#include <algorithm>
#include <fstream>

namespace mia {

namespace {

Membership verdict_of(bool member) {
  return member ? Membership::kMember : Membership::kNonmember;
}

}  // namespace

void AttackThresholds::validate() const {
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidParameterError("tau must lie in (0, 1)");
  if (!(gamma > 0.0)) throw InvalidParameterError("gamma must be positive");
}

const char* attack_name(AttackKind a) {
  switch (a) {
    case AttackKind::kConfidence: return "confidence";
    case AttackKind::kLoss: return "loss";
    case AttackKind::kShadow: return "shadow";
  }
  return "?";
}

Membership confidence_attack(const ProbVector& p, double tau) {
  const double pmax = *std::max_element(p.values().begin(), p.values().end());
  return verdict_of(pmax > tau);
}

Membership loss_attack(const ProbVector& p, int true_label, double gamma) {
  return verdict_of(cross_entropy_loss(p, true_label) < gamma);
}

ShadowFeatures extract_shadow_features(const ProbVector& p, int true_label) {
  ShadowFeatures f;
  f.ce_loss = cross_entropy_loss(p, true_label);
  double top1 = -1.0, top2 = -1.0;
  for (double v : p.values()) {
    if (v > top1) {
      top2 = top1;
      top1 = v;
    } else if (v > top2) {
      top2 = v;
    }
  }
  f.max_confidence = top1;
  f.margin = top1 - top2;
  return f;
}

LogRegParams train_shadow_attack(const Dataset& shadow_pool, int hidden_width,
                                 const TrainConfig& target_cfg,
                                 std::uint64_t seed) {
  if (shadow_pool.size() < 4) {
    throw InvalidParameterError(
        "shadow pool needs at least 4 samples for an in/out split");
  }
  const std::size_t half = shadow_pool.size() / 2;

  Dataset shadow_train;
  shadow_train.num_classes = shadow_pool.num_classes;
  shadow_train.feature_dim = shadow_pool.feature_dim;
  shadow_train.examples.assign(shadow_pool.examples.begin(),
                               shadow_pool.examples.begin() + half);

  TrainConfig cfg = target_cfg;
  cfg.seed = derive_seed(seed, 71);
  MlpParams shadow_model = train_mlp(shadow_train, cfg, hidden_width);

  std::vector<Vec> features;
  std::vector<int> labels;
  features.reserve(shadow_pool.size());
  labels.reserve(shadow_pool.size());
  for (std::size_t i = 0; i < shadow_pool.size(); ++i) {
    const auto& ex = shadow_pool.examples[i];
    const ProbVector p = softmax(predict_logits(shadow_model, ex.features), 1.0);
    features.push_back(extract_shadow_features(p, ex.label).as_vector());
    labels.push_back(i < half ? 1 : 0);
  }

  TrainConfig attack_cfg = target_cfg;
  attack_cfg.seed = derive_seed(seed, 72);
  return train_logreg(features, labels, attack_cfg);
}

Membership shadow_attack(const LogRegParams& classifier,
                         const ShadowFeatures& features) {
  return verdict_of(logreg_predict(classifier, features.as_vector()) > 0.5);
}

AttackSuiteResult run_attack_suite(const std::vector<AttackSample>& samples,
                                   const AttackThresholds& thresholds,
                                   const LogRegParams* classifier) {
  if (samples.empty()) throw InvalidParameterError("empty attack pool");
  thresholds.validate();

  AttackSuiteResult result;
  result.has_shadow = classifier != nullptr;
  std::size_t correct_conf = 0, correct_loss = 0, correct_shadow = 0;
  for (const auto& s : samples) {
    const Membership vc = confidence_attack(s.probs, thresholds.tau);
    const Membership vl = loss_attack(s.probs, s.true_label, thresholds.gamma);
    result.decisions.push_back({s.sample_id, AttackKind::kConfidence, vc, s.truth});
    result.decisions.push_back({s.sample_id, AttackKind::kLoss, vl, s.truth});
    if (vc == s.truth) ++correct_conf;
    if (vl == s.truth) ++correct_loss;
    if (classifier) {
      const Membership vs = shadow_attack(
          *classifier, extract_shadow_features(s.probs, s.true_label));
      result.decisions.push_back({s.sample_id, AttackKind::kShadow, vs, s.truth});
      if (vs == s.truth) ++correct_shadow;
    }
  }
  const double n = static_cast<double>(samples.size());
  result.asr_confidence = static_cast<double>(correct_conf) / n;
  result.asr_loss = static_cast<double>(correct_loss) / n;
  result.asr_shadow =
      result.has_shadow ? static_cast<double>(correct_shadow) / n : 0.0;
  return result;
}

void save_decisions_csv(const std::string& path,
                        const std::vector<AttackDecision>& decisions) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "sample_id,attack,verdict,truth\n";
  for (const auto& d : decisions) {
    out << d.sample_id << ',' << attack_name(d.attack) << ','
        << membership_name(d.verdict) << ',' << membership_name(d.truth)
        << "\n";
  }
}

}  // namespace mia
