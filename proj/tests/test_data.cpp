#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>

#include "mia/data.hpp"
#include "mia/errors.hpp"

using namespace mia;

namespace {

std::string tmp_path(const std::string& name) {
  return "/tmp/mia_test_data_" + name;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

std::vector<LogitsRecord> sample_records() {
  std::vector<LogitsRecord> recs;
  recs.push_back({"s0", Membership::kMember, 0, {1.25, -0.5, 3.0}});
  recs.push_back({"s1", Membership::kNonmember, 2, {0.0, 1e-9, -2.75}});
  recs.push_back({"s2", Membership::kMember, 1, {1.0 / 3.0, 2.0, 0.125}});
  return recs;
}

}  // namespace

TEST_CASE("generate_blobs size and balance contract") {
  const Dataset d = generate_blobs(2, 5, 2, 0.1, 1);
  CHECK(d.size() == 10);
  CHECK(d.num_classes == 2);
  CHECK(d.feature_dim == 2);
  int counts[2] = {0, 0};
  for (const auto& ex : d.examples) {
    REQUIRE(ex.label >= 0);
    REQUIRE(ex.label < 2);
    REQUIRE(ex.features.size() == 2);
    ++counts[ex.label];
  }
  CHECK(counts[0] == 5);
  CHECK(counts[1] == 5);

  CHECK_THROWS_AS(generate_blobs(1, 5, 2, 0.1, 1), InvalidParameterError);
  CHECK_THROWS_AS(generate_blobs(2, 0, 2, 0.1, 1), InvalidParameterError);
  CHECK_THROWS_AS(generate_blobs(2, 5, 2, 0.0, 1), InvalidParameterError);
}

TEST_CASE("generate_blobs is deterministic") {
  const Dataset a = generate_blobs(3, 20, 4, 0.5, 77);
  const Dataset b = generate_blobs(3, 20, 4, 0.5, 77);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.examples[i].label == b.examples[i].label);
    CHECK(a.examples[i].features == b.examples[i].features);
  }
  const Dataset c = generate_blobs(3, 20, 4, 0.5, 78);
  bool identical = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    identical = identical && a.examples[i].features == c.examples[i].features;
  }
  CHECK_FALSE(identical);
}

TEST_CASE("tight blobs separable by nearest centroid") {
  const Dataset d = generate_blobs(4, 100, 8, 0.05, 9);
  // Empirical per-class centroids as an independent classifier.
  std::vector<Vec> centroid(4, Vec(8, 0.0));
  std::vector<int> count(4, 0);
  for (const auto& ex : d.examples) {
    for (int i = 0; i < 8; ++i) centroid[ex.label][i] += ex.features[i];
    ++count[ex.label];
  }
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < 8; ++i) centroid[c][i] /= count[c];
  }
  int correct = 0;
  for (const auto& ex : d.examples) {
    int best = 0;
    double best_d2 = 1e300;
    for (int c = 0; c < 4; ++c) {
      double d2 = 0.0;
      for (int i = 0; i < 8; ++i) {
        const double diff = ex.features[i] - centroid[c][i];
        d2 += diff * diff;
      }
      if (d2 < best_d2) {
        best_d2 = d2;
        best = c;
      }
    }
    if (best == ex.label) ++correct;
  }
  CHECK(static_cast<double>(correct) / d.size() >= 0.99);
}

TEST_CASE("split sizes follow the fractions") {
  const Dataset d = generate_blobs(2, 50, 2, 0.5, 3);
  const SplitPlan plan = split_target_shadow(d, 0.70, 0.5, 7);
  CHECK(plan.target_train.size() == 35);
  CHECK(plan.target_test.size() == 35);
  CHECK(plan.shadow_pool.size() == 30);
  CHECK(plan.seed == 7);
}

TEST_CASE("split is a partition") {
  SeededRng rng(5, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const int per_class = 5 + static_cast<int>(rng.next_u64() % 40);
    const double tf = 0.3 + 0.5 * rng.next_uniform();
    const double wf = 0.3 + 0.4 * rng.next_uniform();
    const Dataset d = generate_blobs(2, per_class, 2, 0.5, trial + 1);
    const SplitPlan plan = split_target_shadow(d, tf, wf, rng.next_u64());
    std::set<std::size_t> seen;
    for (const auto* part :
         {&plan.target_train, &plan.target_test, &plan.shadow_pool}) {
      for (std::size_t idx : *part) {
        CHECK(idx < d.size());
        CHECK(seen.insert(idx).second);  // disjoint
      }
    }
    CHECK(seen.size() == d.size());  // covering
  }
}

TEST_CASE("different split seeds permute, same sizes") {
  const Dataset d = generate_blobs(2, 50, 2, 0.5, 3);
  const SplitPlan a = split_target_shadow(d, 0.7, 0.5, 1);
  const SplitPlan b = split_target_shadow(d, 0.7, 0.5, 2);
  CHECK(a.target_train.size() == b.target_train.size());
  CHECK(a.shadow_pool.size() == b.shadow_pool.size());
  CHECK(a.target_train != b.target_train);

  CHECK_THROWS_AS(split_target_shadow(d, 0.0, 0.5, 1), InvalidParameterError);
  CHECK_THROWS_AS(split_target_shadow(d, 1.0, 0.5, 1), InvalidParameterError);
}

TEST_CASE("logits file round-trip") {
  const std::string path = tmp_path("roundtrip.csv");
  const auto recs = sample_records();
  save_logits_file(path, 3, recs, {"source=unit-test"});
  const LogitsFile loaded = load_logits_file(path);
  CHECK(loaded.num_classes == 3);
  REQUIRE(loaded.records.size() == recs.size());
  REQUIRE(loaded.metadata.size() == 1);
  CHECK(loaded.metadata[0] == "source=unit-test");
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(loaded.records[i].sample_id == recs[i].sample_id);
    CHECK(loaded.records[i].membership == recs[i].membership);
    CHECK(loaded.records[i].true_label == recs[i].true_label);
    REQUIRE(loaded.records[i].logits.size() == 3);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(std::abs(loaded.records[i].logits[j] - recs[i].logits[j]) < 1e-9);
    }
  }
  std::remove(path.c_str());
}

TEST_CASE("saved file format details") {
  const std::string path = tmp_path("format.csv");
  save_logits_file(path, 3, sample_records());
  const std::string text = read_file(path);
  CHECK(text.rfind("sample_id,membership,true_label,logit_0,logit_1,logit_2\n",
                   0) == 0);
  CHECK(text.find("\r") == std::string::npos);  // LF endings
  // Header appears exactly once.
  CHECK(text.find("sample_id", 1) == std::string::npos);

  // Deterministic bytes on re-save.
  const std::string path2 = tmp_path("format2.csv");
  save_logits_file(path2, 3, sample_records());
  CHECK(read_file(path2) == text);
  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("csv parse errors carry line numbers") {
  const std::string path = tmp_path("bad.csv");

  write_file(path,
             "sample_id,membership,true_label,logit_0,logit_1,logit_2,logit_3\n"
             "a,member,0,1,2,3,4\n"
             "b,member,0,1,2,3\n");
  try {
    load_logits_file(path);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }

  write_file(path,
             "sample_id,membership,true_label,logit_0,logit_1\n"
             "a,maybe,0,1,2\n");
  CHECK_THROWS_AS(load_logits_file(path), ParseError);

  write_file(path, "");
  try {
    load_logits_file(path);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("no records") != std::string::npos);
  }

  write_file(path, "sample_id,membership,true_label,logit_0,logit_1\n");
  CHECK_THROWS_AS(load_logits_file(path), SchemaError);

  CHECK_THROWS_AS(load_logits_file(tmp_path("does_not_exist.csv")), IoError);
  std::remove(path.c_str());
}

TEST_CASE("jsonl input accepted") {
  const std::string path = tmp_path("recs.jsonl");
  write_file(
      path,
      "{\"sample_id\":\"a\",\"membership\":\"member\",\"true_label\":1,"
      "\"logits\":[0.5,1.5]}\n"
      "{\"sample_id\":\"b\",\"membership\":\"nonmember\",\"true_label\":0,"
      "\"logits\":[-1.0,2.0]}\n");
  const LogitsFile f = load_logits_file(path);
  CHECK(f.num_classes == 2);
  REQUIRE(f.records.size() == 2);
  CHECK(f.records[0].membership == Membership::kMember);
  CHECK(f.records[1].sample_id == "b");
  CHECK(f.records[1].logits[1] == 2.0);

  // Inconsistent k across lines.
  write_file(path,
             "{\"sample_id\":\"a\",\"membership\":\"member\",\"true_label\":0,"
             "\"logits\":[0.5,1.5]}\n"
             "{\"sample_id\":\"b\",\"membership\":\"member\",\"true_label\":0,"
             "\"logits\":[1,2,3]}\n");
  CHECK_THROWS_AS(load_logits_file(path), SchemaError);
  std::remove(path.c_str());
}

TEST_CASE("membership names") {
  CHECK(std::string(membership_name(Membership::kMember)) == "member");
  CHECK(std::string(membership_name(Membership::kNonmember)) == "nonmember");
  CHECK(membership_from_string("member") == Membership::kMember);
  CHECK(membership_from_string("nonmember") == Membership::kNonmember);
  CHECK_THROWS_AS(membership_from_string("maybe"), InvalidInputError);
}
