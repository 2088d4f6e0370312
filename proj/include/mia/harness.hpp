#ifndef MIA_HARNESS_HPP
#define MIA_HARNESS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "mia/attacks.hpp"
#include "mia/data.hpp"
#include "mia/defenses.hpp"
#include "mia/metrics.hpp"
#include "mia/models.hpp"

namespace mia {

inline constexpr const char* kConditionNone = "None";
inline constexpr const char* kConditionStaticNoise = "StaticNoise";
inline constexpr const char* kConditionSelena = "SELENA";
inline constexpr const char* kConditionDynaNoise = "DynaNoise";

// Everything one seeded end-to-end run needs. Defaults are the desk-scale
// protocol: 4 overlapping Gaussian classes so the undefended target overfits
// and the attacks have signal to exploit.
struct ExperimentConfig {
  int num_classes = 4;
  int per_class = 200;
  int feature_dim = 16;
  double spread = 1.0;

  double target_fraction = 0.70;
  double train_fraction_within_target = 0.5;

  TrainConfig train;
  int hidden_width = 64;

  DynaNoiseConfig dynanoise;
  StaticNoiseConfig static_noise;
  SelenaConfig selena;
  AttackThresholds thresholds;

  std::uint64_t seed = 42;
  std::vector<std::string> conditions = {kConditionNone, kConditionStaticNoise,
                                         kConditionSelena, kConditionDynaNoise};

  void validate() const;
};

ExperimentConfig experiment_config_from_json(const std::string& text);
std::string experiment_config_to_json(const ExperimentConfig& cfg);

struct ConditionOutcome {
  std::string condition;
  bool ok = false;
  std::string error;  // set when !ok
  EvalReport report;
  double leakage = 0.0;  // max-confidence histogram KL diagnostic
};

struct PipelineResult {
  std::vector<ConditionOutcome> outcomes;  // declared condition order
  std::vector<MidputReport> midputs;       // defended conditions vs None
  double train_accuracy = 0.0;             // undefended target, train split
  double undefended_test_accuracy = 0.0;
};

// Generates data, trains target + shadow attack, evaluates every requested
// condition, and computes MIDPUT against the None condition when present.
// Fully deterministic under cfg.seed; a condition failure is recorded in its
// outcome without aborting the others. threads > 1 evaluates conditions
// concurrently with identical results.
PipelineResult run_pipeline(const ExperimentConfig& cfg, int threads = 1);

enum class SweepParameter { kBaseVariance, kLambdaScale, kTemperature };

const char* sweep_parameter_name(SweepParameter p);
SweepParameter sweep_parameter_from_string(const std::string& s);

struct SweepSpec {
  SweepParameter parameter = SweepParameter::kBaseVariance;
  std::vector<double> values;  // strictly increasing
  ExperimentConfig base;

  void validate() const;
};

struct SweepRow {
  double value = 0.0;
  std::string condition;
  std::string metric;
  double measurement = 0.0;
};

// One pipeline run per value with only the swept DynaNoise parameter
// changed; identical seeds throughout. Emits long-format rows for the four
// report metrics per condition.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, int threads = 1);

std::string sweep_csv(const std::vector<SweepRow>& rows);

struct OverheadRow {
  int num_classes = 0;
  double mean_seconds_per_sample = 0.0;
};

// Wall-clock timing of dynanoise_transform alone, single-threaded.
std::vector<OverheadRow> overhead_benchmark(const std::vector<int>& k_values,
                                            int samples_per_k);

std::string overhead_csv(const std::vector<OverheadRow>& rows);

// Writes eval_report.csv, midput_report.csv, leakage_report.csv and
// run_manifest.json under out_dir (created if missing).
void write_reports(const std::string& out_dir, const ExperimentConfig& cfg,
                   const PipelineResult& result);

}  // namespace mia

#endif  // MIA_HARNESS_HPP
