#include "mia/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <set>

#include "json.hpp"

namespace mia {

namespace {

using nlohmann::json;

// Fixed salts so every derived stream is stable no matter which conditions
// run or in which order.
constexpr std::uint64_t kSaltData = 1;
constexpr std::uint64_t kSaltSplit = 2;
constexpr std::uint64_t kSaltTarget = 3;
constexpr std::uint64_t kSaltShadow = 4;
constexpr std::uint64_t kSaltSelena = 5;
constexpr std::uint64_t kSaltNoiseStatic = 11;
constexpr std::uint64_t kSaltNoiseDyna = 13;

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& scope) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown config key '" +
                        (scope.empty() ? key : scope + "." + key) + "'");
    }
  }
}

TrainConfig train_config_from_json(const json& j, const std::string& scope,
                                   const TrainConfig& defaults) {
  check_keys(j, {"epochs", "learning_rate", "batch_size", "momentum"}, scope);
  TrainConfig t = defaults;
  t.epochs = j.value("epochs", t.epochs);
  t.learning_rate = j.value("learning_rate", t.learning_rate);
  t.batch_size = j.value("batch_size", t.batch_size);
  t.momentum = j.value("momentum", t.momentum);
  return t;
}

struct PoolSample {
  std::string sample_id;
  LogitVector target_logits;
  Vec features;
  int label = 0;
  Membership truth = Membership::kNonmember;
};

Dataset subset(const Dataset& ds, const std::vector<std::size_t>& idx) {
  Dataset out;
  out.num_classes = ds.num_classes;
  out.feature_dim = ds.feature_dim;
  out.examples.reserve(idx.size());
  for (std::size_t i : idx) out.examples.push_back(ds.examples[i]);
  return out;
}

std::size_t argmax_low(const Vec& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

ConditionOutcome evaluate_condition(const std::string& name,
                                    const ExperimentConfig& cfg,
                                    const std::vector<PoolSample>& pool,
                                    const Dataset& target_train_ds,
                                    const LogRegParams& classifier) {
  ConditionOutcome out;
  out.condition = name;
  try {
    std::vector<ProbVector> probs;
    probs.reserve(pool.size());

    if (name == kConditionSelena) {
      SelenaConfig sc = cfg.selena;
      sc.hidden_width = cfg.hidden_width;
      SelenaModel model =
          selena_train(target_train_ds, sc, derive_seed(cfg.seed, kSaltSelena));
      for (const auto& s : pool) {
        probs.push_back(selena_inference(model, s.features));
      }
    } else if (name == kConditionNone) {
      for (const auto& s : pool) probs.push_back(softmax(s.target_logits, 1.0));
    } else if (name == kConditionStaticNoise) {
      const std::uint64_t noise_seed = derive_seed(cfg.seed, kSaltNoiseStatic);
      for (std::size_t i = 0; i < pool.size(); ++i) {
        SeededRng rng(noise_seed, i);
        probs.push_back(
            static_noise_transform(pool[i].target_logits, cfg.static_noise, rng));
      }
    } else if (name == kConditionDynaNoise) {
      const std::uint64_t noise_seed = derive_seed(cfg.seed, kSaltNoiseDyna);
      for (std::size_t i = 0; i < pool.size(); ++i) {
        SeededRng rng(noise_seed, i);
        probs.push_back(
            dynanoise_transform(pool[i].target_logits, cfg.dynanoise, rng));
      }
    } else {
      throw ConfigError("unknown defense condition '" + name + "'");
    }

    // Test accuracy from the defended outputs' argmax, over the non-member
    // (target_test) half of the pool.
    std::size_t test_total = 0, test_correct = 0;
    std::vector<ProbVector> member_probs, nonmember_probs;
    std::vector<AttackSample> samples;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (pool[i].truth == Membership::kNonmember) {
        ++test_total;
        if (static_cast<int>(argmax_low(probs[i].values())) == pool[i].label) {
          ++test_correct;
        }
        nonmember_probs.push_back(probs[i]);
      } else {
        member_probs.push_back(probs[i]);
      }
      samples.push_back(
          {pool[i].sample_id, probs[i], pool[i].label, pool[i].truth});
    }

    const AttackSuiteResult suite =
        run_attack_suite(samples, cfg.thresholds, &classifier);
    out.report.defense = name;
    out.report.test_accuracy =
        static_cast<double>(test_correct) / static_cast<double>(test_total);
    out.report.asr_confidence = suite.asr_confidence;
    out.report.asr_loss = suite.asr_loss;
    out.report.asr_shadow = suite.asr_shadow;
    out.leakage = leakage_kl(member_probs, nonmember_probs);
    out.ok = true;
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
  }
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (num_classes < 2) throw ConfigError("num_classes must be >= 2");
  if (per_class < 1) throw ConfigError("per_class must be >= 1");
  if (feature_dim < 1) throw ConfigError("feature_dim must be >= 1");
  if (!(spread > 0.0)) throw ConfigError("spread must be positive");
  if (hidden_width < 1) throw ConfigError("hidden_width must be >= 1");
  if (conditions.empty()) throw ConfigError("conditions list is empty");
  train.validate();
  dynanoise.validate();
  static_noise.validate();
  thresholds.validate();
  for (const auto& c : conditions) {
    if (c != kConditionNone && c != kConditionStaticNoise &&
        c != kConditionSelena && c != kConditionDynaNoise) {
      throw ConfigError("unknown defense condition '" + c + "'");
    }
  }
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j,
             {"data", "split", "train", "hidden_width", "dynanoise",
              "static_noise", "selena", "thresholds", "seed", "conditions"},
             "");
  ExperimentConfig cfg;
  if (j.contains("data")) {
    const auto& d = j["data"];
    check_keys(d, {"num_classes", "per_class", "feature_dim", "spread"}, "data");
    cfg.num_classes = d.value("num_classes", cfg.num_classes);
    cfg.per_class = d.value("per_class", cfg.per_class);
    cfg.feature_dim = d.value("feature_dim", cfg.feature_dim);
    cfg.spread = d.value("spread", cfg.spread);
  }
  if (j.contains("split")) {
    const auto& s = j["split"];
    check_keys(s, {"target_fraction", "train_fraction_within_target"}, "split");
    cfg.target_fraction = s.value("target_fraction", cfg.target_fraction);
    cfg.train_fraction_within_target =
        s.value("train_fraction_within_target", cfg.train_fraction_within_target);
  }
  if (j.contains("train")) {
    cfg.train = train_config_from_json(j["train"], "train", cfg.train);
  }
  cfg.hidden_width = j.value("hidden_width", cfg.hidden_width);
  if (j.contains("dynanoise")) {
    const auto& d = j["dynanoise"];
    check_keys(d, {"base_variance", "lambda_scale", "temperature"}, "dynanoise");
    cfg.dynanoise.base_variance = d.value("base_variance", cfg.dynanoise.base_variance);
    cfg.dynanoise.lambda_scale = d.value("lambda_scale", cfg.dynanoise.lambda_scale);
    cfg.dynanoise.temperature = d.value("temperature", cfg.dynanoise.temperature);
  }
  if (j.contains("static_noise")) {
    const auto& s = j["static_noise"];
    check_keys(s, {"variance", "temperature"}, "static_noise");
    cfg.static_noise.variance = s.value("variance", cfg.static_noise.variance);
    cfg.static_noise.temperature = s.value("temperature", cfg.static_noise.temperature);
  }
  if (j.contains("selena")) {
    const auto& s = j["selena"];
    check_keys(s, {"num_submodels", "partitions_per_sample", "submodel_train",
                   "distill_train"},
               "selena");
    cfg.selena.num_submodels = s.value("num_submodels", cfg.selena.num_submodels);
    cfg.selena.partitions_per_sample =
        s.value("partitions_per_sample", cfg.selena.partitions_per_sample);
    cfg.selena.submodel_train = s.contains("submodel_train")
        ? train_config_from_json(s["submodel_train"], "selena.submodel_train", cfg.train)
        : cfg.train;
    cfg.selena.distill_train = s.contains("distill_train")
        ? train_config_from_json(s["distill_train"], "selena.distill_train", cfg.train)
        : cfg.train;
  } else {
    cfg.selena.submodel_train = cfg.train;
    cfg.selena.distill_train = cfg.train;
  }
  if (j.contains("thresholds")) {
    const auto& t = j["thresholds"];
    check_keys(t, {"tau", "gamma"}, "thresholds");
    cfg.thresholds.tau = t.value("tau", cfg.thresholds.tau);
    cfg.thresholds.gamma = t.value("gamma", cfg.thresholds.gamma);
  }
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("conditions")) {
    cfg.conditions = j["conditions"].get<std::vector<std::string>>();
  }
  cfg.validate();
  return cfg;
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  json j{
      {"data",
       {{"num_classes", cfg.num_classes},
        {"per_class", cfg.per_class},
        {"feature_dim", cfg.feature_dim},
        {"spread", cfg.spread}}},
      {"split",
       {{"target_fraction", cfg.target_fraction},
        {"train_fraction_within_target", cfg.train_fraction_within_target}}},
      {"train",
       {{"epochs", cfg.train.epochs},
        {"learning_rate", cfg.train.learning_rate},
        {"batch_size", cfg.train.batch_size},
        {"momentum", cfg.train.momentum}}},
      {"hidden_width", cfg.hidden_width},
      {"dynanoise",
       {{"base_variance", cfg.dynanoise.base_variance},
        {"lambda_scale", cfg.dynanoise.lambda_scale},
        {"temperature", cfg.dynanoise.temperature}}},
      {"static_noise",
       {{"variance", cfg.static_noise.variance},
        {"temperature", cfg.static_noise.temperature}}},
      {"selena",
       {{"num_submodels", cfg.selena.num_submodels},
        {"partitions_per_sample", cfg.selena.partitions_per_sample}}},
      {"thresholds", {{"tau", cfg.thresholds.tau}, {"gamma", cfg.thresholds.gamma}}},
      {"seed", cfg.seed},
      {"conditions", cfg.conditions}};
  return j.dump(2);
}

PipelineResult run_pipeline(const ExperimentConfig& cfg, int threads) {
  cfg.validate();

  const Dataset dataset =
      generate_blobs(cfg.num_classes, cfg.per_class, cfg.feature_dim,
                     cfg.spread, derive_seed(cfg.seed, kSaltData));
  const SplitPlan plan = split_target_shadow(
      dataset, cfg.target_fraction, cfg.train_fraction_within_target,
      derive_seed(cfg.seed, kSaltSplit));

  const Dataset target_train_ds = subset(dataset, plan.target_train);
  const Dataset target_test_ds = subset(dataset, plan.target_test);
  const Dataset shadow_ds = subset(dataset, plan.shadow_pool);

  TrainConfig target_cfg = cfg.train;
  target_cfg.seed = derive_seed(cfg.seed, kSaltTarget);
  const MlpParams target = train_mlp(target_train_ds, target_cfg, cfg.hidden_width);

  const LogRegParams classifier = train_shadow_attack(
      shadow_ds, cfg.hidden_width, cfg.train, derive_seed(cfg.seed, kSaltShadow));

  // Balanced attack pool: members first (target_train), then non-members
  // (target_test), in split order.
  std::vector<PoolSample> pool;
  pool.reserve(target_train_ds.size() + target_test_ds.size());
  for (std::size_t i = 0; i < target_train_ds.size(); ++i) {
    const auto& ex = target_train_ds.examples[i];
    pool.push_back({"train_" + std::to_string(i),
                    predict_logits(target, ex.features), ex.features, ex.label,
                    Membership::kMember});
  }
  for (std::size_t i = 0; i < target_test_ds.size(); ++i) {
    const auto& ex = target_test_ds.examples[i];
    pool.push_back({"test_" + std::to_string(i),
                    predict_logits(target, ex.features), ex.features, ex.label,
                    Membership::kNonmember});
  }

  PipelineResult result;
  result.train_accuracy = model_accuracy(target, target_train_ds);
  result.undefended_test_accuracy = model_accuracy(target, target_test_ds);

  result.outcomes.resize(cfg.conditions.size());
  if (threads > 1) {
    std::vector<std::future<ConditionOutcome>> futures;
    futures.reserve(cfg.conditions.size());
    for (const auto& name : cfg.conditions) {
      futures.push_back(std::async(std::launch::async, [&, name] {
        return evaluate_condition(name, cfg, pool, target_train_ds, classifier);
      }));
    }
    for (std::size_t i = 0; i < futures.size(); ++i) {
      result.outcomes[i] = futures[i].get();
    }
  } else {
    for (std::size_t i = 0; i < cfg.conditions.size(); ++i) {
      result.outcomes[i] = evaluate_condition(cfg.conditions[i], cfg, pool,
                                              target_train_ds, classifier);
    }
  }

  const ConditionOutcome* baseline = nullptr;
  for (const auto& o : result.outcomes) {
    if (o.condition == kConditionNone && o.ok) baseline = &o;
  }
  if (baseline) {
    for (const auto& o : result.outcomes) {
      if (o.ok && o.condition != kConditionNone) {
        result.midputs.push_back(compute_midput(baseline->report, o.report));
      }
    }
  }
  return result;
}

const char* sweep_parameter_name(SweepParameter p) {
  switch (p) {
    case SweepParameter::kBaseVariance: return "base_variance";
    case SweepParameter::kLambdaScale: return "lambda_scale";
    case SweepParameter::kTemperature: return "temperature";
  }
  return "?";
}

SweepParameter sweep_parameter_from_string(const std::string& s) {
  if (s == "base_variance") return SweepParameter::kBaseVariance;
  if (s == "lambda_scale") return SweepParameter::kLambdaScale;
  if (s == "temperature") return SweepParameter::kTemperature;
  throw ConfigError("unknown sweep parameter '" + s + "'");
}

void SweepSpec::validate() const {
  if (values.empty()) throw ConfigError("sweep values list is empty");
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] > values[i - 1])) {
      throw ConfigError("sweep values must be strictly increasing");
    }
  }
  base.validate();
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, int threads) {
  spec.validate();
  std::vector<SweepRow> rows;
  for (double value : spec.values) {
    ExperimentConfig cfg = spec.base;
    switch (spec.parameter) {
      case SweepParameter::kBaseVariance: cfg.dynanoise.base_variance = value; break;
      case SweepParameter::kLambdaScale: cfg.dynanoise.lambda_scale = value; break;
      case SweepParameter::kTemperature: cfg.dynanoise.temperature = value; break;
    }
    const PipelineResult r = run_pipeline(cfg, threads);
    for (const auto& o : r.outcomes) {
      if (!o.ok) {
        throw ConfigError("condition " + o.condition + " failed at " +
                          std::string(sweep_parameter_name(spec.parameter)) +
                          "=" + std::to_string(value) + ": " + o.error);
      }
      rows.push_back({value, o.condition, "test_accuracy", o.report.test_accuracy});
      rows.push_back({value, o.condition, "asr_confidence", o.report.asr_confidence});
      rows.push_back({value, o.condition, "asr_loss", o.report.asr_loss});
      rows.push_back({value, o.condition, "asr_shadow", o.report.asr_shadow});
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "value,condition,metric,measurement\n";
  char buf[96];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g,%s,%s,%.17g\n", r.value,
                  r.condition.c_str(), r.metric.c_str(), r.measurement);
    out += buf;
  }
  return out;
}

std::vector<OverheadRow> overhead_benchmark(const std::vector<int>& k_values,
                                            int samples_per_k) {
  if (k_values.size() < 2) throw InvalidParameterError("need >= 2 k values");
  for (std::size_t i = 0; i < k_values.size(); ++i) {
    if (k_values[i] < 2 || (i > 0 && k_values[i] <= k_values[i - 1])) {
      throw InvalidParameterError("k values must be increasing and >= 2");
    }
  }
  if (samples_per_k < 1) throw InvalidParameterError("samples_per_k must be >= 1");

  DynaNoiseConfig cfg;  // defaults; the cost is shape-driven, not knob-driven
  std::vector<OverheadRow> rows;
  double sink = 0.0;
  for (int k : k_values) {
    SeededRng gen(9001, static_cast<std::uint64_t>(k));
    std::vector<LogitVector> inputs;
    inputs.reserve(samples_per_k);
    for (int s = 0; s < samples_per_k; ++s) {
      Vec z(static_cast<std::size_t>(k));
      for (double& v : z) v = 4.0 * (gen.next_uniform() - 0.5);
      inputs.emplace_back(std::move(z));
    }
    // Warmup pass keeps cache effects out of the first timed sample.
    {
      SeededRng rng(9002, 0);
      sink += dynanoise_transform(inputs.front(), cfg, rng)[0];
    }
    const auto start = std::chrono::steady_clock::now();
    for (int s = 0; s < samples_per_k; ++s) {
      SeededRng rng(9003, static_cast<std::uint64_t>(s));
      sink += dynanoise_transform(inputs[static_cast<std::size_t>(s)], cfg, rng)[0];
    }
    const auto elapsed = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    rows.push_back({k, elapsed / samples_per_k});
  }
  if (sink == 42.0) std::abort();  // keep the timed loop observable
  return rows;
}

std::string overhead_csv(const std::vector<OverheadRow>& rows) {
  std::string out = "num_classes,mean_seconds_per_sample\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.9e\n", r.num_classes,
                  r.mean_seconds_per_sample);
    out += buf;
  }
  return out;
}

void write_reports(const std::string& out_dir, const ExperimentConfig& cfg,
                   const PipelineResult& result) {
  std::filesystem::create_directories(out_dir);
  const auto path = [&](const char* name) {
    return (std::filesystem::path(out_dir) / name).string();
  };

  std::vector<EvalReport> reports;
  json condition_status = json::object();
  json leakage = json::object();
  for (const auto& o : result.outcomes) {
    condition_status[o.condition] = o.ok ? "ok" : ("error: " + o.error);
    if (o.ok) {
      reports.push_back(o.report);
      leakage[o.condition] = o.leakage;
    }
  }

  auto write = [](const std::string& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write " + p);
    out << text;
  };
  write(path("eval_report.csv"), eval_reports_csv(reports));
  write(path("midput_report.csv"), midput_reports_csv(result.midputs));

  std::string leakage_csv = "condition,leakage_kl\n";
  for (const auto& o : result.outcomes) {
    if (!o.ok) continue;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%s,%.17g\n", o.condition.c_str(), o.leakage);
    leakage_csv += buf;
  }
  write(path("leakage_report.csv"), leakage_csv);

  json manifest{{"artifact", "dynanoise-bench"},
                {"version", "0.1.0"},
                {"seed", cfg.seed},
                {"config", json::parse(experiment_config_to_json(cfg))},
                {"conditions", condition_status},
                {"leakage_kl", leakage},
                {"train_accuracy", result.train_accuracy},
                {"undefended_test_accuracy", result.undefended_test_accuracy}};
  write(path("run_manifest.json"), manifest.dump(2) + "\n");
}

}  // namespace mia
