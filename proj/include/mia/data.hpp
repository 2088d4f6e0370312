#ifndef MIA_DATA_HPP
#define MIA_DATA_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "mia/numerics.hpp"

namespace mia {

struct LabeledExample {
  Vec features;
  int label = 0;
};

struct Dataset {
  std::vector<LabeledExample> examples;
  int num_classes = 0;
  int feature_dim = 0;

  std::size_t size() const { return examples.size(); }
};

// Disjoint index partition of a dataset into the target model's train/test
// halves and the attacker's shadow pool.
struct SplitPlan {
  std::vector<std::size_t> target_train;
  std::vector<std::size_t> target_test;
  std::vector<std::size_t> shadow_pool;
  std::uint64_t seed = 0;
};

enum class Membership { kMember, kNonmember };

const char* membership_name(Membership m);
Membership membership_from_string(const std::string& s);

// One sample's raw model outputs plus membership ground truth; the unit the
// defend/attack pipeline flows over and the schema of the interchange file.
struct LogitsRecord {
  std::string sample_id;
  Membership membership = Membership::kNonmember;
  int true_label = 0;
  Vec logits;
};

struct LogitsFile {
  int num_classes = 0;
  std::vector<LogitsRecord> records;
  // Leading "# key=value" metadata lines, without the "# " prefix.
  std::vector<std::string> metadata;
};

// k Gaussian clusters with unit-norm means on coordinate axes and
// per-coordinate standard deviation `spread`; exactly per_class examples per
// class, in class-major order. Deterministic under seed.
Dataset generate_blobs(int num_classes, int per_class, int feature_dim,
                       double spread, std::uint64_t seed);

// Shuffles indices under seed, gives the first target_fraction to the target
// model (split train/test by train_fraction_within_target) and the rest to
// the shadow pool.
SplitPlan split_target_shadow(const Dataset& dataset, double target_fraction,
                              double train_fraction_within_target,
                              std::uint64_t seed);

// Interchange formats: CSV with header
//   sample_id,membership,true_label,logit_0,...,logit_{k-1}
// or JSON-lines with the same field names (logits as an array). "#"-prefixed
// lines before the CSV header are metadata and are preserved.
LogitsFile load_logits_file(const std::string& path);

void save_logits_file(const std::string& path, int num_classes,
                      const std::vector<LogitsRecord>& records,
                      const std::vector<std::string>& metadata = {});

}  // namespace mia

#endif  // MIA_DATA_HPP
