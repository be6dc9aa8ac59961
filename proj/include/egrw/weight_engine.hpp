#pragma once

// Exponentiated-gradient example reweighting.
//
// Normalized weights live on the probability simplex and are passed around as
// plain vectors. Training-time weights are kept unnormalized in a WeightStore,
// in log domain: with r = 1 the multiplicative updates shrink every weight
// each epoch and would underflow a linear-domain store after a few hundred
// steps, while every consumer only needs ratios within a batch.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace egrw {

using ExampleId = std::size_t;

struct EgStepParams {
  double eta_w = 0.0;
  /// Regularizer exponent: 1 is plain EG, 0 resets to uniform.
  double r = 1.0;
  /// Upper bound on any normalized weight inside the active set.
  std::optional<double> cap;

  /// Throws std::invalid_argument unless 0 <= r <= 1, eta_w >= 0 and, when a
  /// cap is present, 0 < cap <= 1 and cap * active_size >= 1.
  void validate(std::size_t active_size) const;
};

struct LossEntry {
  ExampleId id;
  double loss;
};

/// Losses for a set of examples. Ids are unique and losses finite; both are
/// checked on construction.
struct LossVector {
  std::vector<LossEntry> entries;

  LossVector() = default;
  explicit LossVector(std::vector<LossEntry> e);
  LossVector(std::span<const ExampleId> ids, std::span<const double> losses);

  std::size_t size() const { return entries.size(); }
};

/// Per-example log-importance values. A fresh store holds 0 everywhere
/// (unnormalized weight 1 for every example).
class WeightStore {
 public:
  explicit WeightStore(std::size_t n) : log_weights_(n, 0.0) {}

  std::size_t size() const { return log_weights_.size(); }
  double log_weight(ExampleId id) const { return log_weights_.at(id); }
  std::span<const double> log_weights() const { return log_weights_; }

  /// Replaces all values (e.g. when restoring a snapshot). Length must match
  /// and every value must be finite.
  void assign(std::span<const double> log_weights);

  /// Normalizes the whole store onto the simplex.
  std::vector<double> normalized() const;

 private:
  friend void egu_batch_update(WeightStore&, const LossVector&, const EgStepParams&);
  std::vector<double> log_weights_;
};

/// Generalized KL divergence sum p log(p/q) - p + q, with 0 log 0 = 0.
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// w * exp(-eta * losses), renormalized.
std::vector<double> eg_update(std::span<const double> w, std::span<const double> losses,
                              double eta_w);

/// (w * exp(-eta * losses))^r, renormalized. r = 1 is eg_update, r = 0 is uniform.
std::vector<double> regularized_eg_update(std::span<const double> w,
                                          std::span<const double> losses, double eta_w,
                                          double r);

/// In-place unnormalized update on the batch members only:
///   log_w <- r * (log_w - eta_w * loss).
/// Duplicate ids and out-of-range ids are rejected before anything changes.
void egu_batch_update(WeightStore& store, const LossVector& batch_losses,
                      const EgStepParams& params);

/// Stored weights of `batch_ids` divided by their sum, in batch order.
std::vector<double> batch_normalized_weights(const WeightStore& store,
                                             std::span<const ExampleId> batch_ids);

/// KL projection of a simplex vector onto { p in simplex : p_i <= cap }.
///
/// Sort descending, then pin the smallest number of leading entries to `cap`
/// such that proportionally rescaling the rest to the remaining mass keeps
/// every free entry at or below `cap`. Inputs already inside the capped
/// simplex come back unchanged.
std::vector<double> capped_projection(std::span<const double> w, double cap);

/// Throws std::invalid_argument unless `w` is nonnegative and sums to 1 within `tol`.
void check_simplex(std::span<const double> w, double tol = 1e-9);

}  // namespace egrw
