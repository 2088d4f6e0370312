#ifndef MIA_ATTACKS_HPP
#define MIA_ATTACKS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mia/data.hpp"
#include "mia/models.hpp"
#include "mia/numerics.hpp"

namespace mia {

struct AttackThresholds {
  double tau = 0.9;    // confidence threshold
  double gamma = 0.5;  // loss threshold

  void validate() const;
};

enum class AttackKind { kConfidence, kLoss, kShadow };

const char* attack_name(AttackKind a);

// The three shadow-attack features extracted from one output distribution.
struct ShadowFeatures {
  double max_confidence = 0.0;
  double ce_loss = 0.0;
  double margin = 0.0;  // top-1 minus top-2 probability

  Vec as_vector() const { return {max_confidence, ce_loss, margin}; }
};

struct AttackDecision {
  std::string sample_id;
  AttackKind attack = AttackKind::kConfidence;
  Membership verdict = Membership::kNonmember;
  Membership truth = Membership::kNonmember;
};

struct AttackSuiteResult {
  std::vector<AttackDecision> decisions;
  double asr_confidence = 0.0;
  double asr_loss = 0.0;
  double asr_shadow = 0.0;
  bool has_shadow = false;
};

// One defended (or raw) output plus ground truth, as consumed by the suite.
struct AttackSample {
  std::string sample_id;
  ProbVector probs;
  int true_label = 0;
  Membership truth = Membership::kNonmember;
};

// Member iff max_i p_i > tau (strict).
Membership confidence_attack(const ProbVector& p, double tau);

// Member iff -ln p(y) < gamma (strict).
Membership loss_attack(const ProbVector& p, int true_label, double gamma);

ShadowFeatures extract_shadow_features(const ProbVector& p, int true_label);

// Shokri-style pipeline: split the shadow pool 50/50 into shadow-train
// (members) and shadow-out (non-members), train a shadow MLP with the
// target's architecture and TrainConfig, extract features from its raw
// softmax outputs, and fit the logistic-regression attack classifier
// (label 1 = member).
LogRegParams train_shadow_attack(const Dataset& shadow_pool, int hidden_width,
                                 const TrainConfig& target_cfg,
                                 std::uint64_t seed);

// Member iff the classifier's sigmoid score exceeds 0.5 (strict).
Membership shadow_attack(const LogRegParams& classifier,
                         const ShadowFeatures& features);

// Runs all three attacks on every sample; ASR per attack is the fraction of
// verdicts matching ground truth. Without a classifier the shadow attack is
// skipped and has_shadow stays false.
AttackSuiteResult run_attack_suite(const std::vector<AttackSample>& samples,
                                   const AttackThresholds& thresholds,
                                   const LogRegParams* classifier);

// CSV export: sample_id,attack,verdict,truth
void save_decisions_csv(const std::string& path,
                        const std::vector<AttackDecision>& decisions);

}  // namespace mia

#endif  // MIA_ATTACKS_HPP
