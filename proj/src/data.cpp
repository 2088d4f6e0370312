#include "mia/data.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace mia {

namespace {

// Fisher-Yates with explicit bounded draws, so the permutation does not
// depend on the standard library's std::shuffle implementation.
void shuffle_indices(std::vector<std::size_t>& idx, SeededRng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
    std::swap(idx[i - 1], idx[j]);
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, int line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("bad numeric field '" + s + "'", line);
  }
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

LogitsRecord record_from_json(const nlohmann::json& j, int line) {
  if (!j.is_object()) throw ParseError("expected a JSON object", line);
  LogitsRecord rec;
  try {
    rec.sample_id = j.at("sample_id").get<std::string>();
    rec.membership = membership_from_string(j.at("membership").get<std::string>());
    rec.true_label = j.at("true_label").get<int>();
    rec.logits = j.at("logits").get<Vec>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad record: ") + e.what(), line);
  }
  return rec;
}

void validate_record(const LogitsRecord& rec, int k, int line) {
  if (static_cast<int>(rec.logits.size()) != k) {
    throw SchemaError("line " + std::to_string(line) + ": record has " +
                      std::to_string(rec.logits.size()) +
                      " logits, file declares k=" + std::to_string(k));
  }
  if (rec.true_label < 0 || rec.true_label >= k) {
    throw ParseError("true_label out of range", line);
  }
  for (double v : rec.logits) {
    if (!std::isfinite(v)) throw ParseError("non-finite logit", line);
  }
}

}  // namespace

const char* membership_name(Membership m) {
  return m == Membership::kMember ? "member" : "nonmember";
}

Membership membership_from_string(const std::string& s) {
  if (s == "member") return Membership::kMember;
  if (s == "nonmember") return Membership::kNonmember;
  throw InvalidInputError("unknown membership value '" + s + "'");
}

Dataset generate_blobs(int num_classes, int per_class, int feature_dim,
                       double spread, std::uint64_t seed) {
  if (num_classes < 2) throw InvalidParameterError("need at least 2 classes");
  if (per_class < 1) throw InvalidParameterError("per_class must be >= 1");
  if (feature_dim < 1) throw InvalidParameterError("feature_dim must be >= 1");
  if (!(spread > 0.0)) throw InvalidParameterError("spread must be positive");

  Dataset ds;
  ds.num_classes = num_classes;
  ds.feature_dim = feature_dim;
  ds.examples.reserve(static_cast<std::size_t>(num_classes) * per_class);
  for (int c = 0; c < num_classes; ++c) {
    // Class mean sits on axis c % d; classes beyond the dimension count step
    // further out along the reused axis so means stay unit-separated.
    Vec mean(feature_dim, 0.0);
    mean[c % feature_dim] = 1.0 + static_cast<double>(c / feature_dim);
    SeededRng rng(seed, static_cast<std::uint64_t>(c));
    for (int j = 0; j < per_class; ++j) {
      LabeledExample ex;
      ex.label = c;
      ex.features.resize(feature_dim);
      for (int i = 0; i < feature_dim; ++i) {
        ex.features[i] = mean[i] + rng.next_gaussian(spread * spread);
      }
      ds.examples.push_back(std::move(ex));
    }
  }
  return ds;
}

SplitPlan split_target_shadow(const Dataset& dataset, double target_fraction,
                              double train_fraction_within_target,
                              std::uint64_t seed) {
  if (!(target_fraction > 0.0 && target_fraction < 1.0) ||
      !(train_fraction_within_target > 0.0 &&
        train_fraction_within_target < 1.0)) {
    throw InvalidParameterError("split fractions must lie in (0, 1)");
  }
  const std::size_t n = dataset.size();
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  SeededRng rng(seed, 0);
  shuffle_indices(idx, rng);

  const auto n_target = static_cast<std::size_t>(
      std::llround(target_fraction * static_cast<double>(n)));
  const auto n_train = static_cast<std::size_t>(std::llround(
      train_fraction_within_target * static_cast<double>(n_target)));
  if (n_train == 0 || n_train == n_target || n_target == n) {
    throw InvalidParameterError("split fractions produce an empty partition");
  }

  SplitPlan plan;
  plan.seed = seed;
  plan.target_train.assign(idx.begin(), idx.begin() + n_train);
  plan.target_test.assign(idx.begin() + n_train, idx.begin() + n_target);
  plan.shadow_pool.assign(idx.begin() + n_target, idx.end());
  return plan;
}

LogitsFile load_logits_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  LogitsFile file;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  bool jsonl = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::size_t start = line.find_first_not_of("# ");
      file.metadata.push_back(start == std::string::npos ? ""
                                                         : line.substr(start));
      continue;
    }
    if (!header_seen && !jsonl) {
      if (line[0] == '{') {
        jsonl = true;
      } else {
        // CSV header declares k through its logit_* columns.
        auto cols = split_csv(line);
        if (cols.size() < 5 || cols[0] != "sample_id" ||
            cols[1] != "membership" || cols[2] != "true_label") {
          throw SchemaError("line " + std::to_string(line_no) +
                            ": unrecognized header");
        }
        for (std::size_t i = 3; i < cols.size(); ++i) {
          if (cols[i] != "logit_" + std::to_string(i - 3)) {
            throw SchemaError("line " + std::to_string(line_no) +
                              ": bad logit column '" + cols[i] + "'");
          }
        }
        file.num_classes = static_cast<int>(cols.size() - 3);
        header_seen = true;
        continue;
      }
    }

    LogitsRecord rec;
    if (jsonl) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
      }
      rec = record_from_json(j, line_no);
      if (file.num_classes == 0) {
        if (rec.logits.size() < 2) throw ParseError("need k >= 2 logits", line_no);
        file.num_classes = static_cast<int>(rec.logits.size());
      }
    } else {
      auto cols = split_csv(line);
      if (cols.size() != static_cast<std::size_t>(file.num_classes) + 3) {
        throw SchemaError("line " + std::to_string(line_no) + ": expected " +
                          std::to_string(file.num_classes + 3) +
                          " fields, got " + std::to_string(cols.size()));
      }
      rec.sample_id = cols[0];
      try {
        rec.membership = membership_from_string(cols[1]);
      } catch (const InvalidInputError& e) {
        throw ParseError(e.what(), line_no);
      }
      rec.true_label = static_cast<int>(parse_double(cols[2], line_no));
      rec.logits.reserve(file.num_classes);
      for (int i = 0; i < file.num_classes; ++i) {
        rec.logits.push_back(parse_double(cols[3 + static_cast<std::size_t>(i)], line_no));
      }
    }
    validate_record(rec, file.num_classes, line_no);
    file.records.push_back(std::move(rec));
  }

  if (file.records.empty()) throw SchemaError("no records in " + path);
  return file;
}

void save_logits_file(const std::string& path, int num_classes,
                      const std::vector<LogitsRecord>& records,
                      const std::vector<std::string>& metadata) {
  if (num_classes < 2) throw InvalidParameterError("need k >= 2");
  for (std::size_t i = 0; i < records.size(); ++i) {
    validate_record(records[i], num_classes, static_cast<int>(i + 1));
  }
  std::ofstream out(path, std::ios::binary);  // binary keeps LF endings
  if (!out) throw IoError("cannot write " + path);
  for (const auto& m : metadata) out << "# " << m << "\n";
  out << "sample_id,membership,true_label";
  for (int i = 0; i < num_classes; ++i) out << ",logit_" << i;
  out << "\n";
  for (const auto& rec : records) {
    out << rec.sample_id << ',' << membership_name(rec.membership) << ','
        << rec.true_label;
    for (double v : rec.logits) out << ',' << format_double(v);
    out << "\n";
  }
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace mia
