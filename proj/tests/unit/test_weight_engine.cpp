#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "egrw/rng.hpp"
#include "egrw/weight_engine.hpp"
#include "../support/oracles.hpp"

using namespace egrw;
using doctest::Approx;

namespace {

std::vector<double> random_losses(std::size_t n, Rng& rng, double scale = 3.0) {
  std::vector<double> l(n);
  for (auto& v : l) v = scale * rng.uniform();
  return l;
}

std::vector<double> uniform(std::size_t n) { return std::vector<double>(n, 1.0 / static_cast<double>(n)); }

}  // namespace

TEST_CASE("kl_divergence worked values") {
  std::vector<double> p{0.3, 0.7};
  CHECK(kl_divergence(p, p) == Approx(0.0));
  std::vector<double> a{1.0, 0.0}, b{0.5, 0.5};
  CHECK(kl_divergence(a, b) == Approx(0.693147).epsilon(1e-6));
  std::vector<double> c{2.0, 0.0}, d{1.0, 1.0};
  CHECK(kl_divergence(c, d) == Approx(1.386294).epsilon(1e-6));
}

TEST_CASE("kl_divergence rejects mismatched or negative input") {
  std::vector<double> a{0.5, 0.5}, b{1.0};
  CHECK_THROWS_AS(kl_divergence(a, b), std::invalid_argument);
  std::vector<double> neg{-0.1, 1.1};
  CHECK_THROWS(kl_divergence(neg, a));
}

TEST_CASE("eg_update worked values") {
  const auto w4 = uniform(4);
  std::vector<double> same{1.5, 1.5, 1.5, 1.5};
  CHECK(oracle::max_abs_diff(eg_update(w4, same, 0.7), w4) < 1e-15);

  std::vector<double> w{0.1, 0.6, 0.3}, l{3.0, -1.0, 2.0};
  CHECK(oracle::max_abs_diff(eg_update(w, l, 0.0), w) < 1e-15);

  std::vector<double> half{0.5, 0.5}, l2{0.0, std::log(4.0)};
  const auto out = eg_update(half, l2, 0.5);
  CHECK(out[0] == Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(out[1] == Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("eg_update input validation") {
  std::vector<double> w{0.5, 0.4}, l{0.0, 0.0};
  CHECK_THROWS_AS(eg_update(w, l, 0.1), std::invalid_argument);
  std::vector<double> ok{0.5, 0.5}, bad{0.0, NAN};
  CHECK_THROWS_AS(eg_update(ok, bad, 0.1), std::invalid_argument);
  std::vector<double> short_l{0.0};
  CHECK_THROWS_AS(eg_update(ok, short_l, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(eg_update(ok, l, -1.0), std::invalid_argument);
}

TEST_CASE("regularized_eg_update worked values") {
  Rng rng(7);
  const auto w = oracle::random_simplex(6, rng);
  const auto l = random_losses(6, rng);
  CHECK(oracle::max_abs_diff(regularized_eg_update(w, l, 0.4, 1.0), eg_update(w, l, 0.4)) < 1e-15);
  CHECK(oracle::max_abs_diff(regularized_eg_update(w, l, 0.4, 0.0), uniform(6)) < 1e-15);

  std::vector<double> w2{2.0 / 3.0, 1.0 / 3.0}, zero{0.0, 0.0};
  const auto out = regularized_eg_update(w2, zero, 0.3, 0.5);
  CHECK(out[0] == Approx(2.0 - std::sqrt(2.0)).epsilon(1e-12));
  CHECK(out[1] == Approx(std::sqrt(2.0) - 1.0).epsilon(1e-12));
  CHECK_THROWS_AS(regularized_eg_update(w2, zero, 0.3, 1.5), std::invalid_argument);
}

TEST_CASE("two-step equivalence: EG equals EGU then normalization") {
  Rng rng(11);
  for (int inst = 0; inst < 1000; ++inst) {
    const std::size_t n = 1 + rng.below(12);
    const auto w = oracle::random_simplex(n, rng);
    const auto l = random_losses(n, rng, 5.0);
    const double eta = 2.0 * rng.uniform();
    std::vector<double> manual(n);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) z += (manual[i] = w[i] * std::exp(-eta * l[i]));
    for (auto& v : manual) v /= z;
    REQUIRE(oracle::max_abs_diff(eg_update(w, l, eta), manual) <= 1e-12);
  }
}

TEST_CASE("shift invariance of the loss vector") {
  Rng rng(13);
  for (int inst = 0; inst < 500; ++inst) {
    const std::size_t n = 2 + rng.below(8);
    const auto w = oracle::random_simplex(n, rng);
    const auto l = random_losses(n, rng);
    auto shifted = l;
    const double c = rng.uniform(-50.0, 50.0);
    for (auto& v : shifted) v += c;
    const double eta = rng.uniform();
    const double r = rng.uniform();
    REQUIRE(oracle::max_abs_diff(eg_update(w, l, eta), eg_update(w, shifted, eta)) <= 1e-12);
    REQUIRE(oracle::max_abs_diff(regularized_eg_update(w, l, eta, r), regularized_eg_update(w, shifted, eta, r)) <=
            1e-12);
  }
}

TEST_CASE("monotonicity: lower loss gains relative weight") {
  Rng rng(17);
  for (int inst = 0; inst < 300; ++inst) {
    const std::size_t n = 2 + rng.below(6);
    const auto w = oracle::random_simplex(n, rng);
    const auto l = random_losses(n, rng);
    const double eta = 0.05 + rng.uniform();
    const auto out = eg_update(w, l, eta);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (l[i] < l[j]) REQUIRE(out[i] / out[j] > w[i] / w[j]);
  }
}

TEST_CASE("regularizer contraction toward uniform") {
  Rng rng(19);
  for (int inst = 0; inst < 300; ++inst) {
    const std::size_t n = 2 + rng.below(8);
    const auto w = oracle::random_simplex(n, rng);
    const auto l = random_losses(n, rng);
    const double eta = rng.uniform();
    const auto u = uniform(n);
    const double k1 = kl_divergence(regularized_eg_update(w, l, eta, 1.0), u);
    const double k5 = kl_divergence(regularized_eg_update(w, l, eta, 0.5), u);
    const double k0 = kl_divergence(regularized_eg_update(w, l, eta, 0.0), u);
    REQUIRE(k5 <= k1 + 1e-15);
    REQUIRE(k0 <= k5 + 1e-15);
    REQUIRE(k0 == Approx(0.0));
  }
}

TEST_CASE("egu_batch_update worked values") {
  SUBCASE("r = 0 resets batch members") {
    WeightStore store(3);
    std::vector<double> init{-1.0, 2.0, 0.5};
    store.assign(init);
    std::vector<ExampleId> ids{0, 2};
    std::vector<double> l{4.0, 1.0};
    egu_batch_update(store, LossVector(ids, l), EgStepParams{0.7, 0.0, {}});
    CHECK(store.log_weight(0) == 0.0);
    CHECK(store.log_weight(1) == 2.0);
    CHECK(store.log_weight(2) == 0.0);
  }
  SUBCASE("r = 1, eta = 0 leaves the store unchanged") {
    WeightStore store(2);
    std::vector<double> init{-0.3, 0.8};
    store.assign(init);
    std::vector<ExampleId> ids{0, 1};
    std::vector<double> l{4.0, 1.0};
    egu_batch_update(store, LossVector(ids, l), EgStepParams{0.0, 1.0, {}});
    CHECK(store.log_weight(0) == -0.3);
    CHECK(store.log_weight(1) == 0.8);
  }
  SUBCASE("closed form") {
    WeightStore store(2);
    std::vector<ExampleId> ids{0, 1};
    std::vector<double> l{0.0, std::log(4.0)};
    egu_batch_update(store, LossVector(ids, l), EgStepParams{0.5, 0.5, {}});
    CHECK(store.log_weight(0) == Approx(0.0));
    CHECK(store.log_weight(1) == Approx(-0.346574).epsilon(1e-6));
  }
}

TEST_CASE("egu_batch_update rejects bad batches without side effects") {
  WeightStore store(3);
  std::vector<ExampleId> dup{1, 1};
  std::vector<double> l2{1.0, 2.0};
  CHECK_THROWS_AS(LossVector(dup, l2), std::invalid_argument);

  std::vector<ExampleId> out_of_range{0, 5};
  CHECK_THROWS_AS(egu_batch_update(store, LossVector(out_of_range, l2), EgStepParams{0.5, 1.0, {}}),
                  std::out_of_range);
  for (std::size_t i = 0; i < 3; ++i) CHECK(store.log_weight(i) == 0.0);

  std::vector<double> nan_loss{1.0, NAN};
  std::vector<ExampleId> ids{0, 1};
  CHECK_THROWS_AS(LossVector(ids, nan_loss), std::invalid_argument);
  CHECK_THROWS_AS(egu_batch_update(store, LossVector(ids, l2), EgStepParams{0.5, 2.0, {}}), std::invalid_argument);
}

TEST_CASE("batch_normalized_weights worked values") {
  WeightStore store(4);
  std::vector<double> eq{3.0, 3.0, 3.0, 3.0};
  store.assign(eq);
  std::vector<ExampleId> ids{0, 1, 2};
  for (double v : batch_normalized_weights(store, ids)) CHECK(v == 1.0 / 3.0);

  std::vector<double> lw{0.0, std::log(3.0), -1000.0, -1000.0 + std::log(3.0)};
  store.assign(lw);
  std::vector<ExampleId> a{0, 1}, b{2, 3};
  const auto pa = batch_normalized_weights(store, a);
  const auto pb = batch_normalized_weights(store, b);
  CHECK(pa[0] == Approx(0.25).epsilon(1e-12));
  CHECK(pa[1] == Approx(0.75).epsilon(1e-12));
  CHECK(pb[0] == Approx(0.25).epsilon(1e-12));
  CHECK(pb[1] == Approx(0.75).epsilon(1e-12));

  std::vector<ExampleId> empty;
  CHECK_THROWS_AS(batch_normalized_weights(store, empty), std::invalid_argument);
}

TEST_CASE("EGU on the full index set then normalization reproduces regularized EG") {
  Rng rng(23);
  for (int inst = 0; inst < 300; ++inst) {
    const std::size_t n = 1 + rng.below(10);
    const auto l = random_losses(n, rng);
    const double eta = rng.uniform();
    const double r = rng.uniform();
    WeightStore store(n);
    std::vector<ExampleId> ids(n);
    std::iota(ids.begin(), ids.end(), ExampleId{0});
    egu_batch_update(store, LossVector(ids, l), EgStepParams{eta, r, {}});
    const auto from_store = batch_normalized_weights(store, ids);
    REQUIRE(oracle::max_abs_diff(from_store, regularized_eg_update(uniform(n), l, eta, r)) <= 1e-12);
  }
}

TEST_CASE("capped_projection worked values") {
  std::vector<double> inside{0.2, 0.3, 0.5};
  CHECK(capped_projection(inside, 0.6) == inside);

  std::vector<double> w{0.7, 0.2, 0.1};
  const auto p = capped_projection(w, 0.5);
  CHECK(p[0] == Approx(0.5).epsilon(1e-12));
  CHECK(p[1] == Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(p[2] == Approx(1.0 / 6.0).epsilon(1e-12));

  std::vector<double> skew{0.9, 0.05, 0.03, 0.02};
  for (double v : capped_projection(skew, 0.25)) CHECK(v == Approx(0.25));

  CHECK_THROWS_AS(capped_projection(w, 0.2), std::invalid_argument);
}

TEST_CASE("capped_projection matches the active-set oracle for n <= 5") {
  Rng rng(29);
  for (int inst = 0; inst < 2000; ++inst) {
    const std::size_t n = 1 + rng.below(5);
    auto w = oracle::random_simplex(n, rng);
    // Sharpen some instances so several entries get pinned.
    if (inst % 2 == 0) w = eg_update(w, random_losses(n, rng, 4.0), 1.0);
    const double cap = rng.uniform(1.0 / static_cast<double>(n), 1.0);
    const auto got = capped_projection(w, cap);
    const auto want = oracle::brute_capped_projection(w, cap);
    REQUIRE(want.size() == n);
    REQUIRE(oracle::max_abs_diff(got, want) <= 1e-8);
  }
}

TEST_CASE("WeightStore basics") {
  WeightStore store(3);
  for (double v : store.normalized()) CHECK(v == Approx(1.0 / 3.0));
  std::vector<double> bad{0.0, INFINITY, 1.0};
  CHECK_THROWS_AS(store.assign(bad), std::invalid_argument);
  std::vector<double> short_v{0.0};
  CHECK_THROWS_AS(store.assign(short_v), std::invalid_argument);
}

TEST_CASE("EgStepParams validation") {
  CHECK_NOTHROW(EgStepParams{0.1, 0.5, {}}.validate(10));
  CHECK_THROWS(EgStepParams{-0.1, 0.5, {}}.validate(10));
  CHECK_THROWS(EgStepParams{0.1, -0.5, {}}.validate(10));
  CHECK_THROWS(EgStepParams{0.1, 1.0, 0.05}.validate(10));
  CHECK_NOTHROW(EgStepParams{0.1, 1.0, 0.1}.validate(10));
}
