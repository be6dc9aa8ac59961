#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "egrw/pca.hpp"
#include "egrw/rng.hpp"
#include "../support/oracles.hpp"

using namespace egrw;
using doctest::Approx;

namespace {

RowMatrix random_matrix(Eigen::Index n, Eigen::Index d, Rng& rng) {
  RowMatrix X(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) X(i, j) = rng.normal() * (1.0 + static_cast<double>(j));
  return X;
}

double weighted_loss(const Subspace& s, const RowMatrix& X, const std::vector<double>& w) {
  const Eigen::VectorXd l = reconstruction_losses(s, X);
  double t = 0.0;
  for (Eigen::Index i = 0; i < l.size(); ++i) t += w[static_cast<std::size_t>(i)] * l(i);
  return t;
}

Subspace random_subspace(Eigen::Index d, Eigen::Index k, Rng& rng) {
  Eigen::MatrixXd G(d, k);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < k; ++j) G(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Subspace s;
  s.basis = qr.householderQ() * Eigen::MatrixXd::Identity(d, k);
  s.mean = Eigen::VectorXd(d);
  for (Eigen::Index i = 0; i < d; ++i) s.mean(i) = rng.normal();
  return s;
}

const RowMatrix& hand_example() {
  static const RowMatrix X = (RowMatrix(3, 2) << 1, 0, -1, 0, 0, 3).finished();
  return X;
}

}  // namespace

TEST_CASE("reconstruction_loss worked values") {
  Subspace s{Eigen::Vector2d(0, 0), (Eigen::MatrixXd(2, 1) << 1, 0).finished()};
  CHECK(reconstruction_loss(s, Eigen::Vector2d(0, 3)) == Approx(9.0));
  CHECK(reconstruction_loss(s, Eigen::Vector2d(0, 0)) == 0.0);
  Subspace full{Eigen::Vector2d(1, 1), Eigen::MatrixXd::Identity(2, 2)};
  CHECK(reconstruction_loss(full, Eigen::Vector2d(-4, 7)) == Approx(0.0));
  CHECK_THROWS(reconstruction_loss(s, Eigen::Vector3d(0, 0, 0)));
}

TEST_CASE("weighted_pca_fit hand example") {
  const std::vector<double> w{0.5, 0.5, 0.0};
  const auto a = weighted_pca_fit(hand_example(), w, 1);
  CHECK(a.mean.norm() == Approx(0.0));
  CHECK(std::abs(a.basis(0, 0)) == Approx(1.0));
  CHECK(a.basis(1, 0) == Approx(0.0));

  const std::vector<double> u(3, 1.0 / 3.0);
  const auto b = weighted_pca_fit(hand_example(), u, 1);
  CHECK(b.mean(0) == Approx(0.0));
  CHECK(b.mean(1) == Approx(1.0));
  CHECK(b.basis(0, 0) == Approx(0.0));
  CHECK(std::abs(b.basis(1, 0)) == Approx(1.0));
}

TEST_CASE("single point fit is degenerate but exact") {
  RowMatrix X(1, 3);
  X << 2, -1, 5;
  const std::vector<double> w{1.0};
  for (Eigen::Index k = 0; k <= 3; ++k) {
    const auto s = weighted_pca_fit(X, w, k);
    CHECK(s.rank() == k);
    CHECK((s.basis.transpose() * s.basis - Eigen::MatrixXd::Identity(k, k)).norm() < 1e-12);
    CHECK(reconstruction_loss(s, X.row(0).transpose()) == Approx(0.0));
  }
}

TEST_CASE("evaluate_subspace worked value") {
  Subspace s{Eigen::Vector2d(0, 0), (Eigen::MatrixXd(2, 1) << 1, 0).finished()};
  RowMatrix T(2, 2);
  T << 0, 3, 0, 1;
  CHECK(evaluate_subspace(s, T) == Approx(5.0));
  RowMatrix M(1, 2);
  M << 0, 0;
  CHECK(evaluate_subspace(s, M) == 0.0);
  CHECK_THROWS(evaluate_subspace(s, RowMatrix(0, 2)));
}

TEST_CASE("fit beats random subspaces on the weighted loss") {
  Rng rng(31);
  for (int inst = 0; inst < 30; ++inst) {
    const auto n = static_cast<Eigen::Index>(2 + rng.below(19));
    const auto d = static_cast<Eigen::Index>(1 + rng.below(6));
    const auto k = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(std::min(n - 1, d)) + 1));
    const RowMatrix X = random_matrix(n, d, rng);
    const auto w = oracle::random_simplex(static_cast<std::size_t>(n), rng);
    const double best = weighted_loss(weighted_pca_fit(X, w, k), X, w);
    for (int c = 0; c < 200; ++c) {
      REQUIRE(best <= weighted_loss(random_subspace(d, k, rng), X, w) + 1e-10);
    }
  }
}

TEST_CASE("uniform weights reproduce the SVD projector") {
  Rng rng(37);
  for (int inst = 0; inst < 50; ++inst) {
    const auto n = static_cast<Eigen::Index>(3 + rng.below(30));
    const auto d = static_cast<Eigen::Index>(2 + rng.below(12));
    const auto k = static_cast<Eigen::Index>(1 + rng.below(static_cast<std::uint64_t>(std::min(n - 1, d))));
    const RowMatrix X = random_matrix(n, d, rng);
    const std::vector<double> u(static_cast<std::size_t>(n), 1.0 / static_cast<double>(n));
    const auto s = weighted_pca_fit(X, u, k);
    REQUIRE((s.projector() - oracle::svd_projector(X, k)).norm() < 1e-8);
  }
}

TEST_CASE("snapshot route when n < d matches the SVD projector") {
  Rng rng(41);
  const RowMatrix X = random_matrix(8, 40, rng);
  const std::vector<double> u(8, 1.0 / 8.0);
  const auto s = weighted_pca_fit(X, u, 5);
  CHECK((s.projector() - oracle::svd_projector(X, 5)).norm() < 1e-8);
}

TEST_CASE("scale covariance") {
  Rng rng(43);
  for (int inst = 0; inst < 30; ++inst) {
    const RowMatrix X = random_matrix(12, 5, rng);
    const auto w = oracle::random_simplex(12, rng);
    const double c = rng.uniform(0.1, 10.0);
    const RowMatrix Y = c * X;
    const auto a = weighted_pca_fit(X, w, 2);
    const auto b = weighted_pca_fit(Y, w, 2);
    REQUIRE((a.projector() - b.projector()).norm() < 1e-8);
    const Eigen::VectorXd la = reconstruction_losses(a, X);
    const Eigen::VectorXd lb = reconstruction_losses(b, Y);
    REQUIRE((lb - c * c * la).norm() <= 1e-8 * (1.0 + lb.norm()));
  }
}

TEST_CASE("egr_pca degenerate variants") {
  Rng rng(47);
  const RowMatrix X = random_matrix(25, 6, rng);
  const std::vector<double> u(25, 1.0 / 25.0);
  const auto direct = weighted_pca_fit(X, u, 2);

  PcaRunConfig cfg;
  cfg.k = 2;
  cfg.iterations = 10;
  cfg.variant = PcaVariant::vanilla;
  const auto v = egr_pca(X, cfg);
  CHECK((v.subspace.projector() - direct.projector()).norm() < 1e-10);
  CHECK((v.subspace.mean - direct.mean).norm() < 1e-12);

  cfg.variant = PcaVariant::egr;
  cfg.schedule.eta0 = 0.0;
  const auto e = egr_pca(X, cfg);
  CHECK((e.subspace.projector() - direct.projector()).norm() < 1e-10);
  for (double w : e.weights) CHECK(w == Approx(1.0 / 25.0));
}

TEST_CASE("parameter step never increases the weighted loss") {
  Rng rng(53);
  const RowMatrix X = random_matrix(40, 6, rng);
  for (PcaVariant variant : {PcaVariant::egr, PcaVariant::regularized_egr, PcaVariant::capped_egr}) {
    PcaRunConfig cfg;
    cfg.k = 2;
    cfg.iterations = 20;
    cfg.variant = variant;
    cfg.schedule = {0.3, 0.7};
    cfg.eg.r = variant == PcaVariant::regularized_egr ? 0.7 : 1.0;
    if (variant == PcaVariant::capped_egr) cfg.eg.cap = 0.05;
    std::optional<Subspace> previous;
    int steps = 0;
    egr_pca(X, cfg, [&](const EgrPcaStep& step) {
      const std::vector<double> w(step.weights_before.begin(), step.weights_before.end());
      if (previous) REQUIRE(weighted_loss(step.fit, X, w) <= weighted_loss(*previous, X, w) + 1e-10);
      previous = step.fit;
      ++steps;
      check_simplex(step.weights_after);
      if (variant == PcaVariant::capped_egr) {
        for (double v : step.weights_after) REQUIRE(v <= 0.05 + 1e-12);
      }
    });
    CHECK(steps == 20);
  }
}

TEST_CASE("corrupted points lose weight on a synthetic instance") {
  // 100 clean points on a rank-2 subspace of R^10 plus 50 with additive
  // Gaussian noise of norm about 5x the signal.
  const double signal = 3.0;
  LabeledDataset ds = synthetic_low_rank(150, 10, 2, signal, 0.0, 2024);
  Rng rng(99);
  const double sigma = 5.0 * signal * std::sqrt(2.0) / std::sqrt(10.0);
  for (Eigen::Index i = 100; i < 150; ++i)
    for (Eigen::Index j = 0; j < 10; ++j) ds.features(i, j) += sigma * rng.normal();

  PcaRunConfig cfg;
  cfg.k = 2;
  cfg.iterations = 50;
  cfg.variant = PcaVariant::regularized_egr;
  cfg.schedule = {0.1, 0.8};
  cfg.eg.r = 0.5;
  const auto res = egr_pca(ds.features, cfg);
  double clean = 0.0, noisy = 0.0;
  for (std::size_t i = 0; i < 150; ++i) (i < 100 ? clean : noisy) += res.weights[i];
  clean /= 100.0;
  noisy /= 50.0;
  CHECK(noisy < 0.5 * clean);
}

TEST_CASE("config validation") {
  PcaRunConfig cfg;
  cfg.variant = PcaVariant::capped_egr;
  CHECK_THROWS(cfg.validate());
  cfg.eg.cap = 0.1;
  CHECK_NOTHROW(cfg.validate());
  cfg.variant = PcaVariant::regularized_egr;
  cfg.eg.r = 1.0;
  CHECK_THROWS(cfg.validate());
  CHECK(parse_pca_variant("capped") == PcaVariant::capped_egr);
  CHECK_THROWS(parse_pca_variant("nope"));
}
