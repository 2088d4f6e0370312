// Batch front end for the membership-inference evaluation toolkit:
// seeded data generation, end-to-end defense evaluation, post-hoc defense of
// externally produced logits, attacks, MIDPUT scoring, parameter sweeps and
// the per-sample overhead benchmark.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mia/harness.hpp"

namespace {

namespace fs = std::filesystem;
using namespace mia;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed for " + path);
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int resolve_threads(int threads_flag) {
  if (threads_flag > 0) return threads_flag;
  if (const char* env = std::getenv("MIA_BENCH_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

int cmd_gen_data(int classes, int per_class, int dim, double spread,
                 std::uint64_t seed, double target_fraction,
                 double train_fraction, const std::string& out_dir) {
  const Dataset ds = generate_blobs(classes, per_class, dim, spread, seed);
  const SplitPlan plan =
      split_target_shadow(ds, target_fraction, train_fraction, seed);

  fs::create_directories(out_dir);
  std::ostringstream csv;
  csv << "sample_id,label";
  for (int i = 0; i < dim; ++i) csv << ",feature_" << i;
  csv << "\n";
  for (std::size_t s = 0; s < ds.size(); ++s) {
    csv << s << ',' << ds.examples[s].label;
    for (double v : ds.examples[s].features) csv << ',' << fmt17(v);
    csv << "\n";
  }
  write_file((fs::path(out_dir) / "dataset.csv").string(), csv.str());

  nlohmann::json split{{"seed", seed},
                       {"target_train", plan.target_train},
                       {"target_test", plan.target_test},
                       {"shadow_pool", plan.shadow_pool}};
  write_file((fs::path(out_dir) / "split.json").string(), split.dump(2) + "\n");
  std::cout << "wrote " << ds.size() << " samples to " << out_dir << "\n";
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            const std::string& conditions_csv, int threads) {
  ExperimentConfig cfg = experiment_config_from_json(read_file(config_path));
  if (!conditions_csv.empty()) {
    cfg.conditions.clear();
    std::istringstream is(conditions_csv);
    std::string c;
    while (std::getline(is, c, ',')) cfg.conditions.push_back(c);
    cfg.validate();
  }
  const PipelineResult result = run_pipeline(cfg, resolve_threads(threads));
  write_reports(out_dir, cfg, result);
  bool any_failed = false;
  for (const auto& o : result.outcomes) {
    if (o.ok) {
      std::cout << o.condition << ": acc=" << o.report.test_accuracy
                << " conf=" << o.report.asr_confidence
                << " loss=" << o.report.asr_loss
                << " shadow=" << o.report.asr_shadow << "\n";
    } else {
      std::cerr << o.condition << ": FAILED: " << o.error << "\n";
      any_failed = true;
    }
  }
  return any_failed ? 1 : 0;
}

int cmd_defend(const std::string& input, const std::string& output,
               const std::string& defense, double base_variance,
               double lambda_scale, double temperature, double variance,
               std::uint64_t seed) {
  const LogitsFile file = load_logits_file(input);
  std::vector<LogitsRecord> out_records = file.records;
  std::vector<std::string> metadata;

  if (defense == "dynanoise") {
    DynaNoiseConfig cfg{base_variance, lambda_scale, temperature};
    cfg.validate();
    metadata.push_back("defense=dynanoise base_variance=" + fmt17(base_variance) +
                       " lambda_scale=" + fmt17(lambda_scale) +
                       " temperature=" + fmt17(temperature) +
                       " seed=" + std::to_string(seed));
    for (std::size_t i = 0; i < out_records.size(); ++i) {
      SeededRng rng(seed, i);
      out_records[i].logits =
          dynanoise_transform(LogitVector(file.records[i].logits), cfg, rng)
              .values();
    }
  } else if (defense == "static") {
    StaticNoiseConfig cfg{variance, temperature};
    cfg.validate();
    metadata.push_back("defense=static variance=" + fmt17(variance) +
                       " temperature=" + fmt17(temperature) +
                       " seed=" + std::to_string(seed));
    for (std::size_t i = 0; i < out_records.size(); ++i) {
      SeededRng rng(seed, i);
      out_records[i].logits =
          static_noise_transform(LogitVector(file.records[i].logits), cfg, rng)
              .values();
    }
  } else {
    throw ConfigError("unknown defense '" + defense + "' (dynanoise|static)");
  }

  save_logits_file(output, file.num_classes, out_records, metadata);
  std::cout << "defended " << out_records.size() << " records -> " << output
            << "\n";
  return 0;
}

int cmd_attack(const std::string& input, const std::string& out_dir,
               double tau, double gamma, const std::string& classifier_path,
               const std::string& defense_name) {
  const LogitsFile file = load_logits_file(input);
  LogRegParams classifier;
  bool have_classifier = false;
  if (!classifier_path.empty()) {
    classifier = logreg_from_json(read_file(classifier_path));
    have_classifier = true;
  }

  // Records hold either raw logits or already-defended probabilities; a
  // unit-temperature softmax is the identity direction for probabilities
  // only up to normalization, so detect probability rows and use them as-is.
  std::vector<AttackSample> samples;
  std::size_t test_total = 0, test_correct = 0;
  for (const auto& rec : file.records) {
    double sum = 0.0;
    bool nonneg = true;
    for (double v : rec.logits) {
      sum += v;
      nonneg = nonneg && v >= 0.0;
    }
    ProbVector probs = (nonneg && std::abs(sum - 1.0) <= 1e-9)
                           ? ProbVector(rec.logits)
                           : softmax(LogitVector(rec.logits), 1.0);
    if (rec.membership == Membership::kNonmember) {
      ++test_total;
      std::size_t best = 0;
      for (std::size_t c = 1; c < probs.size(); ++c) {
        if (probs[c] > probs[best]) best = c;
      }
      if (static_cast<int>(best) == rec.true_label) ++test_correct;
    }
    samples.push_back({rec.sample_id, std::move(probs), rec.true_label,
                       rec.membership});
  }

  const AttackSuiteResult suite = run_attack_suite(
      samples, AttackThresholds{tau, gamma},
      have_classifier ? &classifier : nullptr);

  fs::create_directories(out_dir);
  EvalReport report;
  report.defense = defense_name;
  report.test_accuracy = test_total == 0
                             ? 0.0
                             : static_cast<double>(test_correct) /
                                   static_cast<double>(test_total);
  report.asr_confidence = suite.asr_confidence;
  report.asr_loss = suite.asr_loss;
  report.asr_shadow = suite.asr_shadow;
  write_file((fs::path(out_dir) / "eval_report.csv").string(),
             eval_reports_csv({report}));
  save_decisions_csv((fs::path(out_dir) / "decisions.csv").string(),
                     suite.decisions);
  std::cout << "conf=" << suite.asr_confidence << " loss=" << suite.asr_loss;
  if (suite.has_shadow) std::cout << " shadow=" << suite.asr_shadow;
  std::cout << "\n";
  return 0;
}

int cmd_midput(const std::string& baseline_path, const std::string& defended_path,
               const std::string& output) {
  const auto baseline = eval_reports_from_csv(read_file(baseline_path));
  const auto defended = eval_reports_from_csv(read_file(defended_path));
  std::vector<MidputReport> reports;
  for (const auto& d : defended) {
    reports.push_back(compute_midput(baseline.front(), d));
    std::cout << d.defense << ": overall MIDPUT = "
              << reports.back().midput_overall << "\n";
  }
  if (!output.empty()) write_file(output, midput_reports_csv(reports));
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& param,
              const std::vector<double>& values, const std::string& out_dir,
              int threads) {
  SweepSpec spec;
  spec.parameter = sweep_parameter_from_string(param);
  spec.values = values;
  spec.base = experiment_config_from_json(read_file(config_path));
  const auto rows = run_sweep(spec, resolve_threads(threads));
  fs::create_directories(out_dir);
  const std::string name = "sweep_" + param + ".csv";
  write_file((fs::path(out_dir) / name).string(), sweep_csv(rows));
  std::cout << "wrote " << rows.size() << " rows to " << name << "\n";
  return 0;
}

int cmd_bench(const std::vector<int>& k_values, int samples_per_k,
              const std::string& out_dir) {
  const auto rows = overhead_benchmark(k_values, samples_per_k);
  fs::create_directories(out_dir);
  write_file((fs::path(out_dir) / "overhead.csv").string(), overhead_csv(rows));
  for (const auto& r : rows) {
    std::cout << "k=" << r.num_classes << ": "
              << r.mean_seconds_per_sample * 1e6 << " us/sample\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Membership-inference defense benchmark (adaptive logit noise)"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic blob dataset and split plan");
  int classes = 4, per_class = 200, dim = 16;
  double spread = 1.0, target_fraction = 0.70, train_fraction = 0.5;
  std::uint64_t gen_seed = 42;
  std::string gen_out;
  gen->add_option("--classes", classes, "Number of classes");
  gen->add_option("--per-class", per_class, "Samples per class");
  gen->add_option("--dim", dim, "Feature dimension");
  gen->add_option("--spread", spread, "Per-coordinate standard deviation");
  gen->add_option("--seed", gen_seed, "Master seed");
  gen->add_option("--target-fraction", target_fraction, "Fraction of data for the target model");
  gen->add_option("--train-fraction", train_fraction, "Train fraction within the target portion");
  gen->add_option("-o,--output", gen_out, "Output directory")->required();

  // run
  auto* run = app.add_subcommand("run", "Run the full seeded multi-condition evaluation pipeline");
  std::string run_config, run_out, run_conditions;
  int run_threads = 0;
  run->add_option("-c,--config", run_config, "Experiment config JSON")->required();
  run->add_option("-o,--output", run_out, "Output directory")->required();
  run->add_option("--conditions", run_conditions, "Comma-separated condition subset (e.g. None,DynaNoise)");
  run->add_option("--threads", run_threads, "Worker threads (env MIA_BENCH_THREADS as fallback; outputs are thread-count independent)");

  // defend
  auto* defend = app.add_subcommand("defend", "Apply a noise defense to a logits file");
  std::string def_in, def_out, def_kind = "dynanoise";
  double def_base_variance = 0.5, def_lambda = 4.0, def_temperature = 2.0,
         def_variance = 0.5;
  std::uint64_t def_seed = 42;
  defend->add_option("-i,--input", def_in, "Input logits file (CSV or JSON-lines)")->required();
  defend->add_option("-o,--output", def_out, "Output file")->required();
  defend->add_option("--defense", def_kind, "dynanoise or static");
  defend->add_option("--base-variance", def_base_variance, "DynaNoise base variance");
  defend->add_option("--lambda", def_lambda, "DynaNoise sensitivity scaling");
  defend->add_option("--temperature", def_temperature, "Smoothing temperature");
  defend->add_option("--variance", def_variance, "Static noise variance");
  defend->add_option("--seed", def_seed, "Noise seed (per-record streams derive from it)");

  // attack
  auto* attack = app.add_subcommand("attack", "Run the attack suite on a logits/probabilities file");
  std::string atk_in, atk_out, atk_classifier, atk_defense = "unknown";
  double atk_tau = 0.9, atk_gamma = 0.5;
  attack->add_option("-i,--input", atk_in, "Input file from gen/defend or an external framework")->required();
  attack->add_option("-o,--output", atk_out, "Output directory")->required();
  attack->add_option("--tau", atk_tau, "Confidence threshold");
  attack->add_option("--gamma", atk_gamma, "Loss threshold");
  attack->add_option("--classifier", atk_classifier, "Shadow attack classifier JSON (omitting it skips the shadow attack)");
  attack->add_option("--defense", atk_defense, "Defense label for the report row");

  // midput
  auto* midput = app.add_subcommand("midput", "Compute MIDPUT from two eval report CSVs");
  std::string mid_baseline, mid_defended, mid_out;
  midput->add_option("--baseline", mid_baseline, "Undefended eval report CSV")->required();
  midput->add_option("--defended", mid_defended, "Defended eval report CSV")->required();
  midput->add_option("-o,--output", mid_out, "Output MIDPUT CSV");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Sweep one DynaNoise parameter across pipeline runs");
  std::string sw_config, sw_param, sw_out;
  std::vector<double> sw_values;
  int sw_threads = 0;
  sweep->add_option("-c,--config", sw_config, "Base experiment config JSON")->required();
  sweep->add_option("--param", sw_param, "base_variance, lambda_scale or temperature")->required();
  sweep->add_option("--values", sw_values, "Swept values, strictly increasing")->required()->delimiter(',');
  sweep->add_option("-o,--output", sw_out, "Output directory")->required();
  sweep->add_option("--threads", sw_threads, "Worker threads");

  // bench
  auto* bench = app.add_subcommand("bench", "Per-sample defense overhead benchmark");
  std::vector<int> bench_k{10, 100, 1000};
  int bench_samples = 2000;
  std::string bench_out;
  bench->add_option("--k-values", bench_k, "Class counts to time")->delimiter(',');
  bench->add_option("--samples", bench_samples, "Samples per class count");
  bench->add_option("-o,--output", bench_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Uniform exit-code contract: any usage error is 2, --help stays 0.
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      return cmd_gen_data(classes, per_class, dim, spread, gen_seed,
                          target_fraction, train_fraction, gen_out);
    }
    if (*run) return cmd_run(run_config, run_out, run_conditions, run_threads);
    if (*defend) {
      return cmd_defend(def_in, def_out, def_kind, def_base_variance,
                        def_lambda, def_temperature, def_variance, def_seed);
    }
    if (*attack) {
      return cmd_attack(atk_in, atk_out, atk_tau, atk_gamma, atk_classifier,
                        atk_defense);
    }
    if (*midput) return cmd_midput(mid_baseline, mid_defended, mid_out);
    if (*sweep) return cmd_sweep(sw_config, sw_param, sw_values, sw_out, sw_threads);
    if (*bench) return cmd_bench(bench_k, bench_samples, bench_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidParameterError& e) {
    std::cerr << "invalid parameter: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
