#include "mia/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "json.hpp"

namespace mia {

namespace {

double check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw InvalidInputError(std::string(what) + " must lie in [0, 1]");
  }
  return v;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

MidputReport compute_midput(const EvalReport& no_def,
                            const EvalReport& defended) {
  for (const EvalReport* r : {&no_def, &defended}) {
    check_unit(r->test_accuracy, "test_accuracy");
    check_unit(r->asr_confidence, "asr_confidence");
    check_unit(r->asr_loss, "asr_loss");
    check_unit(r->asr_shadow, "asr_shadow");
  }

  MidputReport m;
  m.defense = defended.defense;
  m.delta_acc = no_def.test_accuracy - defended.test_accuracy;
  m.delta_conf = no_def.asr_confidence - defended.asr_confidence;
  m.delta_loss = no_def.asr_loss - defended.asr_loss;
  m.delta_shadow = no_def.asr_shadow - defended.asr_shadow;
  m.midput_conf = m.delta_conf - m.delta_acc;
  m.midput_loss = m.delta_loss - m.delta_acc;
  m.midput_shadow = m.delta_shadow - m.delta_acc;
  m.midput_overall =
      (m.delta_conf + m.delta_loss + m.delta_shadow) / 3.0 - m.delta_acc;

  for (double v : {m.midput_conf, m.midput_loss, m.midput_shadow, m.midput_overall}) {
    if (v < -1.0 || v > 1.0) {
      std::cerr << "warning: MIDPUT value " << v
                << " outside the nominal [-1, 1] range\n";
    }
  }
  return m;
}

double leakage_kl(const std::vector<ProbVector>& member_probs,
                  const std::vector<ProbVector>& nonmember_probs,
                  int num_bins) {
  if (member_probs.empty() || nonmember_probs.empty()) {
    throw InvalidParameterError("leakage_kl needs non-empty pools");
  }
  if (num_bins < 2) throw InvalidParameterError("num_bins must be >= 2");

  auto histogram = [num_bins](const std::vector<ProbVector>& probs) {
    Vec counts(static_cast<std::size_t>(num_bins), 1.0);  // Laplace +1
    for (const auto& p : probs) {
      const double pmax =
          *std::max_element(p.values().begin(), p.values().end());
      int bin = static_cast<int>(pmax * num_bins);
      bin = std::clamp(bin, 0, num_bins - 1);
      counts[static_cast<std::size_t>(bin)] += 1.0;
    }
    double total = 0.0;
    for (double c : counts) total += c;
    for (double& c : counts) c /= total;
    return counts;
  };

  return kl_divergence(ProbVector(histogram(member_probs)),
                       ProbVector(histogram(nonmember_probs)));
}

std::string eval_reports_csv(const std::vector<EvalReport>& reports) {
  std::ostringstream out;
  out << "defense,test_accuracy,asr_confidence,asr_loss,asr_shadow\n";
  for (const auto& r : reports) {
    out << r.defense << ',' << fmt(r.test_accuracy) << ','
        << fmt(r.asr_confidence) << ',' << fmt(r.asr_loss) << ','
        << fmt(r.asr_shadow) << "\n";
  }
  return out.str();
}

std::string midput_reports_csv(const std::vector<MidputReport>& reports) {
  std::ostringstream out;
  out << "defense,delta_acc,delta_conf,delta_loss,delta_shadow,"
         "midput_conf,midput_loss,midput_shadow,midput_overall\n";
  for (const auto& r : reports) {
    out << r.defense << ',' << fmt(r.delta_acc) << ',' << fmt(r.delta_conf)
        << ',' << fmt(r.delta_loss) << ',' << fmt(r.delta_shadow) << ','
        << fmt(r.midput_conf) << ',' << fmt(r.midput_loss) << ','
        << fmt(r.midput_shadow) << ',' << fmt(r.midput_overall) << "\n";
  }
  return out.str();
}

std::string eval_report_to_json(const EvalReport& r) {
  nlohmann::json j{{"defense", r.defense},
                   {"test_accuracy", r.test_accuracy},
                   {"asr_confidence", r.asr_confidence},
                   {"asr_loss", r.asr_loss},
                   {"asr_shadow", r.asr_shadow}};
  return j.dump(2);
}

std::string midput_report_to_json(const MidputReport& r) {
  nlohmann::json j{{"defense", r.defense},
                   {"delta_acc", r.delta_acc},
                   {"delta_conf", r.delta_conf},
                   {"delta_loss", r.delta_loss},
                   {"delta_shadow", r.delta_shadow},
                   {"midput_conf", r.midput_conf},
                   {"midput_loss", r.midput_loss},
                   {"midput_shadow", r.midput_shadow},
                   {"midput_overall", r.midput_overall}};
  return j.dump(2);
}

std::vector<EvalReport> eval_reports_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::vector<EvalReport> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line_no == 1 || line.rfind("defense,", 0) == 0) continue;
    std::istringstream ls(line);
    EvalReport r;
    std::string field;
    try {
      std::getline(ls, r.defense, ',');
      std::getline(ls, field, ',');
      r.test_accuracy = std::stod(field);
      std::getline(ls, field, ',');
      r.asr_confidence = std::stod(field);
      std::getline(ls, field, ',');
      r.asr_loss = std::stod(field);
      std::getline(ls, field, ',');
      r.asr_shadow = std::stod(field);
    } catch (const std::exception&) {
      throw ParseError("bad eval report row", line_no);
    }
    out.push_back(std::move(r));
  }
  if (out.empty()) throw SchemaError("no eval report rows");
  return out;
}

}  // namespace mia
