#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "mia/defenses.hpp"

using namespace mia;

TEST_CASE("sensitivity score examples") {
  CHECK(sensitivity_score(LogitVector({0.0, 0.0, 0.0, 0.0})).value == 0.0);
  CHECK(sensitivity_score(LogitVector({100.0, 0.0, 0.0})).value ==
        doctest::Approx(1.0).epsilon(1e-6));

  // z = ln p for p = [0.7, 0.2, 0.1]: softmax recovers p, so
  // r = 1 - H(p)/ln 3 with H(p) computed directly.
  const LogitVector z({std::log(0.7), std::log(0.2), std::log(0.1)});
  const double entropy =
      -(0.7 * std::log(0.7) + 0.2 * std::log(0.2) + 0.1 * std::log(0.1));
  const double expected = 1.0 - entropy / std::log(3.0);
  CHECK(sensitivity_score(z).value == doctest::Approx(expected).epsilon(1e-9));
  CHECK(expected == doctest::Approx(0.2702).epsilon(1e-3));
}

TEST_CASE("sensitivity stays in [0,1]") {
  SeededRng rng(3, 0);
  for (int trial = 0; trial < 500; ++trial) {
    const int k = 2 + static_cast<int>(rng.next_u64() % 9);
    Vec z(static_cast<std::size_t>(k));
    for (double& v : z) v = 50.0 * (2.0 * rng.next_uniform() - 1.0);
    const double r = sensitivity_score(LogitVector(std::move(z))).value;
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
  }
}

TEST_CASE("noise variance formula") {
  DynaNoiseConfig cfg;
  cfg.base_variance = 0.1;
  cfg.lambda_scale = 2.0;
  CHECK(noise_variance({0.5}, cfg) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(noise_variance({0.0}, cfg) == doctest::Approx(0.1).epsilon(1e-12));
  cfg.lambda_scale = 0.0;
  CHECK(noise_variance({0.9}, cfg) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("noise variance strictly increasing in r") {
  DynaNoiseConfig cfg;
  cfg.base_variance = 0.5;
  cfg.lambda_scale = 4.0;
  double prev = -1.0;
  for (double r = 0.0; r <= 1.0 + 1e-12; r += 0.05) {
    const double v = noise_variance({r}, cfg);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("config validation") {
  DynaNoiseConfig d;
  d.base_variance = -0.1;
  CHECK_THROWS_AS(d.validate(), InvalidParameterError);
  d = DynaNoiseConfig{};
  d.lambda_scale = -1.0;
  CHECK_THROWS_AS(d.validate(), InvalidParameterError);
  d = DynaNoiseConfig{};
  d.temperature = 0.0;
  CHECK_THROWS_AS(d.validate(), InvalidParameterError);
  d = DynaNoiseConfig{};
  d.temperature = 0.5;  // accepted with a warning
  CHECK_NOTHROW(d.validate());

  StaticNoiseConfig s;
  s.variance = -1.0;
  CHECK_THROWS_AS(s.validate(), InvalidParameterError);

  SelenaConfig sel;
  sel.partitions_per_sample = 5;  // L >= K
  CHECK_THROWS_AS(sel.validate(), InvalidParameterError);
  sel = SelenaConfig{};
  sel.num_submodels = 1;
  CHECK_THROWS_AS(sel.validate(), InvalidParameterError);
}

TEST_CASE("zero noise, unit temperature is exactly softmax") {
  DynaNoiseConfig cfg;
  cfg.base_variance = 0.0;
  cfg.temperature = 1.0;
  const LogitVector z({1.5, -0.25, 0.75});
  SeededRng rng(10, 0);
  const ProbVector out = dynanoise_transform(z, cfg, rng);
  const ProbVector ref = softmax(z, 1.0);
  for (std::size_t i = 0; i < 3; ++i) CHECK(out[i] == ref[i]);  // bit-exact
}

TEST_CASE("zero noise, temperature 2 halves the logits") {
  DynaNoiseConfig cfg;
  cfg.base_variance = 0.0;
  cfg.temperature = 2.0;
  SeededRng rng(10, 0);
  const ProbVector out = dynanoise_transform(LogitVector({2.0, 0.0}), cfg, rng);
  const double e = std::exp(1.0);
  CHECK(out[0] == doctest::Approx(e / (e + 1.0)).epsilon(1e-12));
  CHECK(out[1] == doctest::Approx(1.0 / (e + 1.0)).epsilon(1e-12));
  CHECK(out[0] > out[1]);  // argmax unchanged
}

TEST_CASE("transform determinism") {
  DynaNoiseConfig cfg;
  const LogitVector z({0.4, 1.1, -2.0, 0.0});
  SeededRng a(77, 5), b(77, 5);
  const ProbVector pa = dynanoise_transform(z, cfg, a);
  const ProbVector pb = dynanoise_transform(z, cfg, b);
  for (std::size_t i = 0; i < 4; ++i) CHECK(pa[i] == pb[i]);
}

TEST_CASE("lambda=0 equals static noise with matched stream") {
  DynaNoiseConfig dyn;
  dyn.base_variance = 0.8;
  dyn.lambda_scale = 0.0;
  dyn.temperature = 2.0;
  StaticNoiseConfig stat;
  stat.variance = 0.8;
  stat.temperature = 2.0;
  const LogitVector z({0.3, -1.2, 2.5});
  SeededRng a(55, 9), b(55, 9);
  const ProbVector pd = dynanoise_transform(z, dyn, a);
  const ProbVector ps = static_noise_transform(z, stat, b);
  for (std::size_t i = 0; i < 3; ++i) CHECK(pd[i] == ps[i]);
}

TEST_CASE("static noise basics") {
  StaticNoiseConfig cfg;
  cfg.variance = 0.0;
  cfg.temperature = 1.0;
  SeededRng rng(1, 0);
  const LogitVector z({1.0, 2.0});
  const ProbVector p = static_noise_transform(z, cfg, rng);
  const ProbVector ref = softmax(z, 1.0);
  CHECK(p[0] == ref[0]);
  CHECK(p[1] == ref[1]);

  cfg.variance = 1.5;
  double sum = 0.0;
  const ProbVector q = static_noise_transform(z, cfg, rng);
  for (std::size_t i = 0; i < q.size(); ++i) sum += q[i];
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("perturbed logit variance matches sigma^2 empirically") {
  // Reconstruct the noise from the output: with T=1 the transform returns
  // softmax(z + eta), and log p_i - log p_j recovers (z_i + eta_i) - (z_j + eta_j).
  // Instead, measure directly against the stream contract: the transform must
  // consume k gaussian draws at variance sigma(q)^2 in logit order.
  DynaNoiseConfig cfg;
  cfg.base_variance = 0.5;
  cfg.lambda_scale = 4.0;
  cfg.temperature = 1.0;
  const LogitVector z({2.0, 0.0, -1.0});
  const double sigma2 =
      noise_variance(sensitivity_score(z), cfg);

  const int n = 10000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    SeededRng rng(900, static_cast<std::uint64_t>(i));
    const ProbVector p = dynanoise_transform(z, cfg, rng);
    // Recover eta_0 - eta_1 from the log-odds shift; its variance is 2 sigma^2.
    const double shift = std::log(p[0] / p[1]) - (z[0] - z[1]);
    sum += shift;
    sumsq += shift * shift;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(var - 2.0 * sigma2) / (2.0 * sigma2) < 0.05);
}

TEST_CASE("selena exclusion map K=5 L=2") {
  const Dataset pool = generate_blobs(2, 50, 4, 0.5, 13);  // 100 samples
  SelenaConfig cfg;
  cfg.submodel_train.epochs = 2;
  cfg.distill_train.epochs = 2;
  cfg.hidden_width = 8;
  const SelenaModel model = selena_train(pool, cfg, 13);

  REQUIRE(model.submodels.size() == 5);
  REQUIRE(model.exclusion_map.size() == 100);
  std::vector<int> excluded_count(5, 0);
  for (const auto& excluders : model.exclusion_map) {
    CHECK(excluders.size() == 2);
    std::set<int> uniq(excluders.begin(), excluders.end());
    CHECK(uniq.size() == 2);
    for (int e : excluders) {
      REQUIRE(e >= 0);
      REQUIRE(e < 5);
      ++excluded_count[e];
    }
  }
  // Each sub-model trains on the samples that do not exclude it; expected
  // training-set size is 100 * (1 - 2/5) = 60. Count per sub-model.
  int total_excluded = 0;
  for (int c : excluded_count) total_excluded += c;
  CHECK(total_excluded == 200);  // 100 samples x L=2
  const double mean_train_size = 100.0 - total_excluded / 5.0;
  CHECK(mean_train_size == doctest::Approx(60.0));
}

TEST_CASE("selena L=K-1 completes and is deterministic") {
  const Dataset pool = generate_blobs(2, 30, 3, 0.5, 21);
  SelenaConfig cfg;
  cfg.num_submodels = 3;
  cfg.partitions_per_sample = 2;
  cfg.hidden_width = 6;
  cfg.submodel_train.epochs = 1;
  cfg.distill_train.epochs = 1;
  const SelenaModel a = selena_train(pool, cfg, 4);
  const SelenaModel b = selena_train(pool, cfg, 4);
  CHECK(a.exclusion_map == b.exclusion_map);
  CHECK(a.distilled.w1 == b.distilled.w1);
  CHECK(a.distilled.w2 == b.distilled.w2);
  // Every sub-model kept a non-empty training set.
  for (std::size_t i = 0; i < a.submodels.size(); ++i) {
    int train_size = 0;
    for (const auto& excluders : a.exclusion_map) {
      bool excluded = false;
      for (int e : excluders) excluded = excluded || e == static_cast<int>(i);
      if (!excluded) ++train_size;
    }
    CHECK(train_size > 0);
  }
}

TEST_CASE("selena inference is a valid deterministic distribution") {
  const Dataset pool = generate_blobs(3, 20, 4, 0.3, 31);
  SelenaConfig cfg;
  cfg.hidden_width = 8;
  cfg.submodel_train.epochs = 2;
  cfg.distill_train.epochs = 2;
  const SelenaModel model = selena_train(pool, cfg, 31);
  const Vec x = pool.examples[5].features;
  const ProbVector p = selena_inference(model, x);
  const ProbVector q = selena_inference(model, x);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(p[i] == q[i]);
    CHECK(p[i] >= 0.0);
    sum += p[i];
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}
