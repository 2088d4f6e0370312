#ifndef MIA_NUMERICS_HPP
#define MIA_NUMERICS_HPP

#include <cstdint>
#include <vector>

#include "mia/errors.hpp"

namespace mia {

using Vec = std::vector<double>;

// Unnormalized score vector over k >= 2 classes. Entries must be finite.
class LogitVector {
 public:
  explicit LogitVector(Vec logits);

  const Vec& values() const { return logits_; }
  std::size_t size() const { return logits_.size(); }
  double operator[](std::size_t i) const { return logits_[i]; }

 private:
  Vec logits_;
};

// Probability vector over k >= 2 classes: non-negative, sums to 1 within 1e-9.
class ProbVector {
 public:
  explicit ProbVector(Vec probs);

  const Vec& values() const { return probs_; }
  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }

 private:
  Vec probs_;
};

// Counter-based deterministic random stream. Identical (master_seed,
// stream_id) pairs produce identical draw sequences regardless of how many
// other streams exist or which thread consumes them, so per-sample streams
// make parallel and serial execution output-identical.
class SeededRng {
 public:
  SeededRng(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64();
  // Uniform draw in the open interval (0, 1).
  double next_uniform();
  // Zero-mean normal draw with the given variance (Box-Muller over two
  // uniforms; always consumes exactly two u64s). variance == 0 yields 0.0.
  double next_gaussian(double variance);

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::uint64_t state_;
};

// Stable sub-seed derivation for independent components of a run.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t salt);

// Temperature softmax: exp(z_i/T) / sum_j exp(z_j/T), computed with
// max-subtraction. Preserves the argmax of z for any T > 0.
ProbVector softmax(const LogitVector& z, double temperature);

// -sum p_i ln p_i in nats, with 0 ln 0 = 0. Result lies in [0, ln k].
double shannon_entropy(const ProbVector& p);

// sum p_i ln(p_i / q_i) in nats. Throws DivergenceUndefinedError when some
// p_i > 0 has q_i = 0.
double kl_divergence(const ProbVector& p, const ProbVector& q);

// -ln p(true_label); probabilities below 1e-12 are floored to 1e-12.
double cross_entropy_loss(const ProbVector& p, int true_label);

inline constexpr double kProbFloor = 1e-12;

}  // namespace mia

#endif  // MIA_NUMERICS_HPP
