#include "mia/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mia {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t mix(std::uint64_t x) {
  std::uint64_t s = x;
  return splitmix64(s);
}

}  // namespace

LogitVector::LogitVector(Vec logits) : logits_(std::move(logits)) {
  if (logits_.size() < 2) {
    throw InvalidInputError("LogitVector needs at least 2 classes");
  }
  for (double v : logits_) {
    if (!std::isfinite(v)) {
      throw InvalidInputError("LogitVector entry is not finite");
    }
  }
}

ProbVector::ProbVector(Vec probs) : probs_(std::move(probs)) {
  if (probs_.size() < 2) {
    throw InvalidInputError("ProbVector needs at least 2 classes");
  }
  double sum = 0.0;
  for (double v : probs_) {
    if (!(v >= 0.0)) {
      throw InvalidInputError("ProbVector entry is negative or NaN");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw InvalidInputError("ProbVector does not sum to 1");
  }
}

SeededRng::SeededRng(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed), stream_id_(stream_id) {
  state_ = mix(master_seed) ^ mix(stream_id * 0xD1B54A32D192ED03ULL + 1);
}

std::uint64_t SeededRng::next_u64() { return splitmix64(state_); }

double SeededRng::next_uniform() {
  // 53-bit mantissa, shifted into (0, 1) so log() is always safe.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double SeededRng::next_gaussian(double variance) {
  if (variance < 0.0) {
    throw InvalidParameterError("gaussian variance must be non-negative");
  }
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  const double z =
      std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  return std::sqrt(variance) * z;
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t salt) {
  std::uint64_t s = master_seed ^ (salt * 0x9E3779B97F4A7C15ULL);
  return splitmix64(s);
}

ProbVector softmax(const LogitVector& z, double temperature) {
  if (!(temperature > 0.0)) {
    throw InvalidParameterError("softmax temperature must be positive");
  }
  const Vec& v = z.values();
  const double zmax = *std::max_element(v.begin(), v.end());
  Vec out(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp((v[i] - zmax) / temperature);
    sum += out[i];
  }
  for (double& e : out) e /= sum;
  return ProbVector(std::move(out));
}

double shannon_entropy(const ProbVector& p) {
  double h = 0.0;
  for (double v : p.values()) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return std::max(h, 0.0);
}

double kl_divergence(const ProbVector& p, const ProbVector& q) {
  if (p.size() != q.size()) {
    throw InvalidInputError("kl_divergence requires equal-length vectors");
  }
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) {
      if (q[i] <= 0.0) {
        throw DivergenceUndefinedError(
            "kl_divergence undefined: p has mass where q is zero");
      }
      d += p[i] * std::log(p[i] / q[i]);
    }
  }
  return std::max(d, 0.0);
}

double cross_entropy_loss(const ProbVector& p, int true_label) {
  if (true_label < 0 || static_cast<std::size_t>(true_label) >= p.size()) {
    throw InvalidLabelError("cross_entropy_loss label out of range");
  }
  return -std::log(std::max(p[static_cast<std::size_t>(true_label)], kProbFloor));
}

}  // namespace mia
