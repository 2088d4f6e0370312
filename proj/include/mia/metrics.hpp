#ifndef MIA_METRICS_HPP
#define MIA_METRICS_HPP

#include <string>
#include <vector>

#include "mia/numerics.hpp"

namespace mia {

// Test accuracy plus the three attack success rates for one defense
// condition (one Table-style row).
struct EvalReport {
  std::string defense;
  double test_accuracy = 0.0;
  double asr_confidence = 0.0;
  double asr_loss = 0.0;
  double asr_shadow = 0.0;
};

// Per-attack and overall privacy-utility trade-off of a defended report
// against the undefended baseline. midput_A = delta_A - delta_acc; the
// overall value averages the three attack deltas first.
struct MidputReport {
  std::string defense;
  double delta_acc = 0.0;
  double delta_conf = 0.0;
  double delta_loss = 0.0;
  double delta_shadow = 0.0;
  double midput_conf = 0.0;
  double midput_loss = 0.0;
  double midput_shadow = 0.0;
  double midput_overall = 0.0;
};

MidputReport compute_midput(const EvalReport& no_def,
                            const EvalReport& defended);

// Histogram-KL leakage diagnostic: per-sample max confidence binned over
// [0, 1] with num_bins equal-width bins, +1 Laplace smoothing on each count,
// then KL(member_hist || nonmember_hist).
double leakage_kl(const std::vector<ProbVector>& member_probs,
                  const std::vector<ProbVector>& nonmember_probs,
                  int num_bins = 20);

// CSV layouts mirroring the report tables.
std::string eval_reports_csv(const std::vector<EvalReport>& reports);
std::string midput_reports_csv(const std::vector<MidputReport>& reports);
std::string eval_report_to_json(const EvalReport& r);
std::string midput_report_to_json(const MidputReport& r);
std::vector<EvalReport> eval_reports_from_csv(const std::string& text);

}  // namespace mia

#endif  // MIA_METRICS_HPP
