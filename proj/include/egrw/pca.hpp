#pragma once

// Robust PCA by alternating a weighted subspace fit with EG reweighting of
// the training examples.

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "egrw/dataset.hpp"
#include "egrw/schedules.hpp"
#include "egrw/weight_engine.hpp"

namespace egrw {

/// Mean vector and orthonormal d x k basis.
struct Subspace {
  Eigen::VectorXd mean;
  Eigen::MatrixXd basis;

  Eigen::Index dim() const { return mean.size(); }
  Eigen::Index rank() const { return basis.cols(); }
  /// U U^T, which is unique even when the basis is not.
  Eigen::MatrixXd projector() const { return basis * basis.transpose(); }
};

enum class PcaVariant { vanilla, egr, capped_egr, regularized_egr };

std::string_view to_string(PcaVariant v);
PcaVariant parse_pca_variant(std::string_view name);

struct PcaRunConfig {
  Eigen::Index k = 25;
  int iterations = 100;
  /// eta_w is ignored here: the rate comes from `schedule` each iteration.
  /// r is used by regularized_egr only, cap by capped_egr only.
  EgStepParams eg;
  PowerDecaySchedule schedule;
  PcaVariant variant = PcaVariant::regularized_egr;

  void validate() const;
};

/// || (x - m) - U U^T (x - m) ||^2
double reconstruction_loss(const Subspace& sub, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Losses of every row of X.
Eigen::VectorXd reconstruction_losses(const Subspace& sub, const Eigen::Ref<const RowMatrix>& X);

/// m = sum_i w_i x_i; U = top-k eigenvectors of sum_i w_i (x_i - m)(x_i - m)^T.
///
/// When n < d the eigenproblem is solved on the n x n Gram matrix and mapped
/// back. Directions with (numerically) zero variance are filled by a
/// deterministic orthonormal completion, so k may exceed the data rank.
Subspace weighted_pca_fit(const Eigen::Ref<const RowMatrix>& X, std::span<const double> w,
                          Eigen::Index k);

/// Per-iteration view of the alternating solver, for tracing and tests.
struct EgrPcaStep {
  int iteration;  // 1-based
  const Subspace& fit;
  std::span<const double> weights_before;
  const Eigen::VectorXd& losses;
  double rate;
  std::span<const double> weights_after;
};

struct EgrPcaResult {
  Subspace subspace;
  std::vector<double> weights;
};

/// Alternates (a) weighted_pca_fit, (b) per-example reconstruction losses and
/// (c) an EG step on the weights with rate eta0 / t^alpha (r-regularized or
/// capped per variant). The returned subspace is refit on the final weights.
/// `vanilla` performs one uniform-weight fit.
EgrPcaResult egr_pca(const Eigen::Ref<const RowMatrix>& X_train, const PcaRunConfig& cfg,
                     const std::function<void(const EgrPcaStep&)>& observer = {});

/// Mean reconstruction loss over the rows of X_test.
double evaluate_subspace(const Subspace& sub, const Eigen::Ref<const RowMatrix>& X_test);

/// n points m + B z + noise_std * e, with B a random orthonormal d x rank
/// basis, z ~ N(0, signal_std^2 I) and e ~ N(0, I).
LabeledDataset synthetic_low_rank(std::size_t n, std::size_t d, std::size_t rank,
                                  double signal_std, double noise_std, std::uint64_t seed);

}  // namespace egrw
