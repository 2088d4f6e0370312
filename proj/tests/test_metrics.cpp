#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mia/metrics.hpp"

using namespace mia;

namespace {

EvalReport report(const char* name, double acc, double conf, double loss,
                  double shadow) {
  return {name, acc, conf, loss, shadow};
}

struct GoldenRow {
  const char* defense;
  EvalReport baseline;
  EvalReport defended;
  double mc, ml, ms, overall;
};

// Published accuracy/ASR inputs with their published per-attack and overall
// trade-off values; tolerance 5e-4 absorbs the 4-decimal rounding.
const GoldenRow kGolden[] = {
    {"cifar10/selena",
     report("None", 0.8211, 0.6956, 0.7639, 0.7841),
     report("SELENA", 0.7668, 0.5446, 0.6307, 0.6755),
     0.0967, 0.0789, 0.0543, 0.0766},
    {"cifar10/dynanoise",
     report("None", 0.8211, 0.6956, 0.7639, 0.7841),
     report("DynaNoise", 0.8156, 0.2785, 0.4221, 0.5334),
     0.4116, 0.3363, 0.2452, 0.3310},
    {"imagenet10/selena",
     report("None", 0.9165, 0.6489, 0.7177, 0.7612),
     report("SELENA", 0.7085, 0.3893, 0.5355, 0.6817),
     0.0516, -0.0258, -0.1285, -0.0342},
    {"imagenet10/dynanoise",
     report("None", 0.9165, 0.6489, 0.7177, 0.7612),
     report("DynaNoise", 0.9115, 0.2248, 0.3080, 0.5725),
     0.4191, 0.4047, 0.1837, 0.3358},
    {"sst2/selena",
     report("None", 0.8865, 0.7913, 0.7961, 0.7854),
     report("SELENA", 0.8945, 0.7774, 0.7603, 0.7415),
     0.0219, 0.0438, 0.0519, 0.0392},
    // The published version of this row prints MIDPUT_S = 0.0523 and
    // overall = 0.2091, which are inconsistent with its own ASR inputs
    // (they imply a defended shadow ASR of ~0.7377, not the printed 0.735).
    // The expected values below are the exact arithmetic from the printed
    // inputs; the first two columns match the published row.
    {"sst2/dynanoise",
     report("None", 0.8865, 0.7913, 0.7961, 0.7854),
     report("DynaNoise", 0.8911, 0.2354, 0.7863, 0.7350),
     0.5605, 0.0144, 0.0550, 0.2100},
};

}  // namespace

TEST_CASE("published trade-off values reproduced") {
  for (const GoldenRow& row : kGolden) {
    CAPTURE(row.defense);
    const MidputReport m = compute_midput(row.baseline, row.defended);
    CHECK(std::abs(m.midput_conf - row.mc) < 5e-4);
    CHECK(std::abs(m.midput_loss - row.ml) < 5e-4);
    CHECK(std::abs(m.midput_shadow - row.ms) < 5e-4);
    CHECK(std::abs(m.midput_overall - row.overall) < 5e-4);
  }
}

TEST_CASE("midput identity and exact arithmetic") {
  const EvalReport base = report("None", 0.8, 0.7, 0.6, 0.65);
  const MidputReport zero = compute_midput(base, report("X", 0.8, 0.7, 0.6, 0.65));
  CHECK(zero.delta_acc == 0.0);
  CHECK(zero.midput_conf == 0.0);
  CHECK(zero.midput_loss == 0.0);
  CHECK(zero.midput_shadow == 0.0);
  CHECK(zero.midput_overall == 0.0);

  const MidputReport m = compute_midput(base, report("D", 0.75, 0.5, 0.4, 0.6));
  CHECK(m.delta_acc == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(m.delta_conf == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(m.midput_conf == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(m.midput_overall ==
        doctest::Approx((0.2 + 0.2 + 0.05) / 3.0 - 0.05).epsilon(1e-12));
}

TEST_CASE("midput input validation") {
  const EvalReport base = report("None", 0.8, 0.7, 0.6, 0.65);
  CHECK_THROWS_AS(compute_midput(base, report("D", 1.5, 0.5, 0.4, 0.6)),
                  InvalidInputError);
  CHECK_THROWS_AS(compute_midput(report("None", -0.1, 0.7, 0.6, 0.65),
                                 report("D", 0.8, 0.5, 0.4, 0.6)),
                  InvalidInputError);
}

TEST_CASE("accuracy shift moves every trade-off value equally") {
  const EvalReport base = report("None", 0.9, 0.7, 0.65, 0.6);
  const EvalReport d1 = report("D", 0.80, 0.5, 0.45, 0.55);
  EvalReport d2 = d1;
  const double delta = 0.07;
  d2.test_accuracy += delta;
  const MidputReport m1 = compute_midput(base, d1);
  const MidputReport m2 = compute_midput(base, d2);
  CHECK(m2.midput_conf - m1.midput_conf == doctest::Approx(delta).epsilon(1e-12));
  CHECK(m2.midput_loss - m1.midput_loss == doctest::Approx(delta).epsilon(1e-12));
  CHECK(m2.midput_shadow - m1.midput_shadow ==
        doctest::Approx(delta).epsilon(1e-12));
  CHECK(m2.midput_overall - m1.midput_overall ==
        doctest::Approx(delta).epsilon(1e-12));
}

TEST_CASE("midput boundedness over random reports") {
  SeededRng rng(14, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    // Paper-shaped inputs: defenses reduce ASR, accuracy may drop slightly.
    const double acc0 = 0.5 + 0.5 * rng.next_uniform();
    const double acc1 = acc0 * rng.next_uniform();
    auto asr_pair = [&](double& hi, double& lo) {
      hi = 0.5 + 0.5 * rng.next_uniform();
      lo = hi * rng.next_uniform();
    };
    double c0, c1, l0, l1, s0, s1;
    asr_pair(c0, c1);
    asr_pair(l0, l1);
    asr_pair(s0, s1);
    const MidputReport m = compute_midput(report("None", acc0, c0, l0, s0),
                                          report("D", acc1, c1, l1, s1));
    for (double v : {m.midput_conf, m.midput_loss, m.midput_shadow,
                     m.midput_overall}) {
      CHECK(v >= -1.0 - 1e-12);
      CHECK(v <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("leakage divergence basics") {
  std::vector<ProbVector> a(10, ProbVector({0.8, 0.2}));
  CHECK(leakage_kl(a, a) == doctest::Approx(0.0).epsilon(1e-12));

  // One-hot members vs uniform nonmembers with 20 bins:
  // member max-confidence 1.0 lands in the last bin, nonmember 0.5 in bin 10.
  // Smoothed member hist: last bin (n+1)/(n+20), others 1/(n+20); same shape
  // for nonmembers at bin 10.
  const int n = 50;
  std::vector<ProbVector> members(n, ProbVector({1.0, 0.0}));
  std::vector<ProbVector> nonmembers(n, ProbVector({0.5, 0.5}));
  const double kl = leakage_kl(members, nonmembers, 20);
  const double hi = (n + 1.0) / (n + 20.0);
  const double lo = 1.0 / (n + 20.0);
  // Hand-evaluated smoothed-histogram divergence: the heavy bin contributes
  // hi*ln(hi/lo), the bin under the other distribution's mass lo*ln(lo/hi);
  // the 18 remaining bins cancel.
  const double expected = hi * std::log(hi / lo) + lo * std::log(lo / hi);
  CHECK(kl == doctest::Approx(expected).epsilon(1e-9));
  CHECK(kl > 1.0);
  CHECK(leakage_kl(nonmembers, members, 20) >= 0.0);

  CHECK_THROWS_AS(leakage_kl({}, nonmembers, 20), InvalidParameterError);
  CHECK_THROWS_AS(leakage_kl(members, nonmembers, 0), InvalidParameterError);
}

TEST_CASE("report csv round trip") {
  std::vector<EvalReport> reports = {
      report("None", 0.8211, 0.6956, 0.7639, 0.7841),
      report("DynaNoise", 0.8156, 0.2785, 0.4221, 0.5334)};
  const std::string csv = eval_reports_csv(reports);
  CHECK(csv.rfind("defense,test_accuracy,asr_confidence,asr_loss,asr_shadow\n",
                  0) == 0);
  const std::vector<EvalReport> parsed = eval_reports_from_csv(csv);
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0].defense == "None");
  CHECK(parsed[1].test_accuracy == reports[1].test_accuracy);
  CHECK(parsed[1].asr_shadow == reports[1].asr_shadow);
}

TEST_CASE("midput csv and json shapes") {
  const MidputReport m = compute_midput(
      report("None", 0.8211, 0.6956, 0.7639, 0.7841),
      report("DynaNoise", 0.8156, 0.2785, 0.4221, 0.5334));
  const std::string csv = midput_reports_csv({m});
  CHECK(csv.find("midput_overall") != std::string::npos);
  CHECK(csv.find("DynaNoise") != std::string::npos);
  const std::string json = midput_report_to_json(m);
  CHECK(json.find("\"midput_conf\"") != std::string::npos);
  const std::string ej = eval_report_to_json(report("None", 0.5, 0.5, 0.5, 0.5));
  CHECK(ej.find("\"defense\"") != std::string::npos);
}
