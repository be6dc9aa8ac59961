#include "egrw/pca.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "egrw/rng.hpp"

namespace egrw {

std::string_view to_string(PcaVariant v) {
  switch (v) {
    case PcaVariant::vanilla: return "vanilla";
    case PcaVariant::egr: return "egr";
    case PcaVariant::capped_egr: return "capped_egr";
    case PcaVariant::regularized_egr: return "regularized_egr";
  }
  return "?";
}

PcaVariant parse_pca_variant(std::string_view name) {
  if (name == "vanilla") return PcaVariant::vanilla;
  if (name == "egr") return PcaVariant::egr;
  if (name == "capped_egr" || name == "capped") return PcaVariant::capped_egr;
  if (name == "regularized_egr" || name == "regularized") return PcaVariant::regularized_egr;
  throw std::invalid_argument("unknown PCA variant '" + std::string(name) + "'");
}

void PcaRunConfig::validate() const {
  if (k < 0) throw std::invalid_argument("pca: k must be nonnegative");
  if (iterations < 1) throw std::invalid_argument("pca: iterations must be >= 1");
  schedule.validate();
  if (!(eg.r >= 0.0 && eg.r <= 1.0)) throw std::invalid_argument("pca: r must lie in [0, 1]");
  if (variant == PcaVariant::capped_egr && !eg.cap) {
    throw std::invalid_argument("pca: capped_egr needs a cap (eg.cap)");
  }
  if (variant == PcaVariant::regularized_egr && !(eg.r < 1.0)) {
    throw std::invalid_argument("pca: regularized_egr needs r < 1 (eg.r)");
  }
}

double reconstruction_loss(const Subspace& sub, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != sub.dim() || sub.basis.rows() != sub.dim()) {
    throw std::invalid_argument("reconstruction_loss: dimension mismatch");
  }
  const Eigen::VectorXd centered = x - sub.mean;
  const Eigen::VectorXd coeff = sub.basis.transpose() * centered;
  return (centered - sub.basis * coeff).squaredNorm();
}

Eigen::VectorXd reconstruction_losses(const Subspace& sub, const Eigen::Ref<const RowMatrix>& X) {
  if (X.cols() != sub.dim()) throw std::invalid_argument("reconstruction_losses: dimension mismatch");
  const RowMatrix centered = X.rowwise() - sub.mean.transpose();
  const Eigen::MatrixXd coeff = centered * sub.basis;
  return (centered - coeff * sub.basis.transpose()).rowwise().squaredNorm();
}

namespace {

// Orthonormalizes the leading columns in order (modified Gram-Schmidt, two
// passes), dropping numerically dependent ones, then completes to `k` columns
// with standard basis vectors taken in index order.
Eigen::MatrixXd orthonormal_with_completion(const Eigen::MatrixXd& candidates, Eigen::Index k) {
  const Eigen::Index d = candidates.rows();
  Eigen::MatrixXd basis(d, k);
  Eigen::Index filled = 0;

  auto try_add = [&](Eigen::VectorXd v) {
    const double norm0 = v.norm();
    if (norm0 == 0.0) return;
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < filled; ++j) v -= basis.col(j).dot(v) * basis.col(j);
    }
    const double norm = v.norm();
    if (norm <= 1e-8 * norm0) return;
    basis.col(filled++) = v / norm;
  };

  for (Eigen::Index j = 0; j < candidates.cols() && filled < k; ++j) try_add(candidates.col(j));
  for (Eigen::Index j = 0; j < d && filled < k; ++j) try_add(Eigen::VectorXd::Unit(d, j));
  if (filled < k) throw std::logic_error("orthonormal completion failed");
  return basis;
}

void check_fit_inputs(const Eigen::Ref<const RowMatrix>& X, std::span<const double> w, Eigen::Index k) {
  if (X.rows() == 0) throw std::invalid_argument("weighted_pca_fit: no examples");
  if (static_cast<Eigen::Index>(w.size()) != X.rows()) {
    throw std::invalid_argument("weighted_pca_fit: weight count differs from example count");
  }
  check_simplex(w);
  if (k < 0 || k > X.cols()) {
    throw std::invalid_argument("weighted_pca_fit: k = " + std::to_string(k) + " outside [0, d = " +
                                std::to_string(X.cols()) + "]");
  }
}

// Fit on data whose rows are already shifted by some fixed offset; `gram` is
// X X^T of those rows when the snapshot route is taken (n < d), else empty.
Subspace fit_impl(const Eigen::Ref<const RowMatrix>& X, const Eigen::MatrixXd& gram,
                  std::span<const double> w, Eigen::Index k) {
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  const Eigen::Map<const Eigen::VectorXd> wv(w.data(), n);

  Subspace sub;
  sub.mean = X.transpose() * wv;
  if (k == 0) {
    sub.basis.resize(d, 0);
    return sub;
  }
  const Eigen::VectorXd sqrt_w = wv.cwiseSqrt();

  if (n < d) {
    // Snapshot route: A = diag(sqrt w) (X - 1 m^T), K = A A^T, u = A^T v / sqrt(lambda).
    const Eigen::VectorXd c = X * sub.mean;
    const double mm = sub.mean.squaredNorm();
    Eigen::MatrixXd K = gram;
    K.colwise() -= c;
    K.rowwise() -= c.transpose();
    K.array() += mm;
    K = sqrt_w.asDiagonal() * K * sqrt_w.asDiagonal();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
    if (eig.info() != Eigen::Success) throw std::runtime_error("weighted_pca_fit: eigen-solver failed");
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    const double floor = std::max(lambda(n - 1), 0.0) * 1e-12;

    Eigen::MatrixXd candidates(d, std::min(k, n));
    Eigen::Index used = 0;
    for (Eigen::Index j = n - 1; j >= 0 && used < candidates.cols(); --j) {
      if (!(lambda(j) > floor) || lambda(j) <= 0.0) break;
      // A^T v without forming A.
      const Eigen::VectorXd sv = sqrt_w.cwiseProduct(eig.eigenvectors().col(j));
      Eigen::VectorXd u = X.transpose() * sv - sub.mean * sv.sum();
      candidates.col(used++) = u / std::sqrt(lambda(j));
    }
    sub.basis = orthonormal_with_completion(candidates.leftCols(used), k);
  } else {
    const RowMatrix A = sqrt_w.asDiagonal() * (X.rowwise() - sub.mean.transpose());
    const Eigen::MatrixXd scatter = A.transpose() * A;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scatter);
    if (eig.info() != Eigen::Success) throw std::runtime_error("weighted_pca_fit: eigen-solver failed");
    // Ascending order; take the last k reversed.
    sub.basis = eig.eigenvectors().rightCols(k).rowwise().reverse();
  }
  return sub;
}

}  // namespace

Subspace weighted_pca_fit(const Eigen::Ref<const RowMatrix>& X, std::span<const double> w, Eigen::Index k) {
  check_fit_inputs(X, w, k);
  const Eigen::RowVectorXd offset = X.colwise().mean();
  const RowMatrix shifted = X.rowwise() - offset;
  Eigen::MatrixXd gram;
  if (shifted.rows() < shifted.cols()) gram = shifted * shifted.transpose();
  Subspace sub = fit_impl(shifted, gram, w, k);
  sub.mean += offset.transpose();
  return sub;
}

EgrPcaResult egr_pca(const Eigen::Ref<const RowMatrix>& X_train, const PcaRunConfig& cfg,
                     const std::function<void(const EgrPcaStep&)>& observer) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(X_train.rows());
  if (n < 2) throw std::invalid_argument("egr_pca: need at least 2 training examples");
  if (cfg.variant == PcaVariant::capped_egr) cfg.eg.validate(n);

  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  check_fit_inputs(X_train, w, cfg.k);

  // Work on column-centered data; the subspace fit is translation-equivariant
  // and this keeps the snapshot Gram matrix well conditioned.
  const Eigen::RowVectorXd offset = X_train.colwise().mean();
  const RowMatrix X = X_train.rowwise() - offset;
  Eigen::MatrixXd gram;
  if (X.rows() < X.cols()) gram = X * X.transpose();

  auto finish = [&](Subspace sub) {
    sub.mean += offset.transpose();
    return EgrPcaResult{std::move(sub), w};
  };

  if (cfg.variant == PcaVariant::vanilla) return finish(fit_impl(X, gram, w, cfg.k));

  const double r = cfg.variant == PcaVariant::regularized_egr ? cfg.eg.r : 1.0;
  for (int t = 1; t <= cfg.iterations; ++t) {
    const Subspace fit = fit_impl(X, gram, w, cfg.k);
    const Eigen::VectorXd losses = reconstruction_losses(fit, X);
    const double rate = power_decay_rate(cfg.schedule, t);
    std::vector<double> next =
        regularized_eg_update(w, std::span<const double>(losses.data(), n), rate, r);
    if (cfg.variant == PcaVariant::capped_egr) next = capped_projection(next, *cfg.eg.cap);
    if (observer) {
      Subspace shown = fit;
      shown.mean += offset.transpose();
      observer(EgrPcaStep{t, shown, w, losses, rate, next});
    }
    w = std::move(next);
  }
  return finish(fit_impl(X, gram, w, cfg.k));
}

double evaluate_subspace(const Subspace& sub, const Eigen::Ref<const RowMatrix>& X_test) {
  if (X_test.rows() == 0) throw std::invalid_argument("evaluate_subspace: empty test set");
  return reconstruction_losses(sub, X_test).mean();
}

LabeledDataset synthetic_low_rank(std::size_t n, std::size_t d, std::size_t rank, double signal_std,
                                  double noise_std, std::uint64_t seed) {
  if (rank > d) throw std::invalid_argument("synthetic_low_rank: rank exceeds dimension");
  Rng rng(seed);
  const auto D = static_cast<Eigen::Index>(d);
  const auto R = static_cast<Eigen::Index>(rank);

  Eigen::MatrixXd gaussian(D, R);
  for (Eigen::Index j = 0; j < R; ++j)
    for (Eigen::Index i = 0; i < D; ++i) gaussian(i, j) = rng.normal();
  const Eigen::MatrixXd basis = orthonormal_with_completion(gaussian, R);
  Eigen::VectorXd mean(D);
  for (Eigen::Index i = 0; i < D; ++i) mean(i) = rng.normal();

  LabeledDataset ds;
  ds.features.resize(static_cast<Eigen::Index>(n), D);
  for (Eigen::Index row = 0; row < static_cast<Eigen::Index>(n); ++row) {
    Eigen::VectorXd z(R);
    for (Eigen::Index j = 0; j < R; ++j) z(j) = signal_std * rng.normal();
    Eigen::VectorXd x = mean + basis * z;
    for (Eigen::Index i = 0; i < D; ++i) x(i) += noise_std * rng.normal();
    ds.features.row(row) = x.transpose();
  }
  return ds;
}

}  // namespace egrw
