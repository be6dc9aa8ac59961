#include "egrw/weight_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace egrw {

namespace {

void require_finite(std::span<const double> v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw std::invalid_argument(std::string(what) + ": non-finite value at index " +
                                  std::to_string(i));
    }
  }
}

// exp(a_i - max a) / sum. Entries at -inf map to 0. The max entry maps to
// exactly 1 before division, so equal inputs give exactly 1/n.
std::vector<double> normalize_log_domain(std::span<const double> a) {
  double top = -std::numeric_limits<double>::infinity();
  for (double x : a) top = std::max(top, x);
  if (!std::isfinite(top)) {
    throw std::domain_error("normalize: no finite log-weight to normalize against");
  }
  std::vector<double> out(a.size());
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = std::exp(a[i] - top);
    total += out[i];
  }
  for (double& x : out) x /= total;
  return out;
}

}  // namespace

void check_simplex(std::span<const double> w, double tol) {
  if (w.empty()) throw std::invalid_argument("weights: empty vector");
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(w[i] >= 0.0) || !std::isfinite(w[i])) {
      throw std::invalid_argument("weights: entry " + std::to_string(i) +
                                  " is negative or non-finite");
    }
    total += w[i];
  }
  if (std::abs(total - 1.0) > tol) {
    throw std::invalid_argument("weights: sum " + std::to_string(total) + " is not 1");
  }
}

void EgStepParams::validate(std::size_t active_size) const {
  if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("eg: r must lie in [0, 1]");
  if (!(eta_w >= 0.0) || !std::isfinite(eta_w)) {
    throw std::invalid_argument("eg: eta_w must be finite and nonnegative");
  }
  if (cap) {
    if (!(*cap > 0.0 && *cap <= 1.0)) throw std::invalid_argument("eg: cap must lie in (0, 1]");
    if (*cap * static_cast<double>(active_size) < 1.0 - 1e-12) {
      throw std::invalid_argument("eg: cap * active set size < 1, capped simplex is empty");
    }
  }
}

LossVector::LossVector(std::vector<LossEntry> e) : entries(std::move(e)) {
  std::unordered_set<ExampleId> seen;
  seen.reserve(entries.size());
  for (const auto& [id, loss] : entries) {
    if (!std::isfinite(loss)) {
      throw std::invalid_argument("losses: non-finite loss for example " + std::to_string(id));
    }
    if (!seen.insert(id).second) {
      throw std::invalid_argument("losses: duplicate example id " + std::to_string(id));
    }
  }
}

LossVector::LossVector(std::span<const ExampleId> ids, std::span<const double> losses)
    : LossVector([&] {
        if (ids.size() != losses.size()) {
          throw std::invalid_argument("losses: id and loss counts differ");
        }
        std::vector<LossEntry> e(ids.size());
        for (std::size_t i = 0; i < ids.size(); ++i) e[i] = {ids[i], losses[i]};
        return e;
      }()) {}

void WeightStore::assign(std::span<const double> log_weights) {
  if (log_weights.size() != log_weights_.size()) {
    throw std::invalid_argument("weight store: expected " + std::to_string(log_weights_.size()) +
                                " log-weights, got " + std::to_string(log_weights.size()));
  }
  require_finite(log_weights, "weight store");
  std::copy(log_weights.begin(), log_weights.end(), log_weights_.begin());
}

std::vector<double> WeightStore::normalized() const {
  if (log_weights_.empty()) return {};
  return normalize_log_domain(log_weights_);
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(q[i] > 0.0)) {
      throw std::invalid_argument("kl_divergence: q[" + std::to_string(i) + "] is not positive");
    }
    if (p[i] < 0.0) {
      throw std::invalid_argument("kl_divergence: p[" + std::to_string(i) + "] is negative");
    }
    if (p[i] > 0.0) total += p[i] * std::log(p[i] / q[i]);
    total += q[i] - p[i];
  }
  return std::max(total, 0.0);
}

std::vector<double> regularized_eg_update(std::span<const double> w,
                                          std::span<const double> losses, double eta_w,
                                          double r) {
  check_simplex(w);
  if (losses.size() != w.size()) throw std::invalid_argument("eg_update: length mismatch");
  require_finite(losses, "eg_update losses");
  if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("eg_update: r must lie in [0, 1]");
  if (!(eta_w >= 0.0) || !std::isfinite(eta_w)) {
    throw std::invalid_argument("eg_update: eta_w must be finite and nonnegative");
  }

  const std::size_t n = w.size();
  if (r == 0.0) return std::vector<double>(n, 1.0 / static_cast<double>(n));

  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = w[i] > 0.0 ? r * (std::log(w[i]) - eta_w * losses[i])
                      : -std::numeric_limits<double>::infinity();
  }
  return normalize_log_domain(a);
}

std::vector<double> eg_update(std::span<const double> w, std::span<const double> losses,
                              double eta_w) {
  return regularized_eg_update(w, losses, eta_w, 1.0);
}

void egu_batch_update(WeightStore& store, const LossVector& batch_losses,
                      const EgStepParams& params) {
  params.validate(batch_losses.size());
  std::unordered_set<ExampleId> seen;
  seen.reserve(batch_losses.size());
  for (const auto& [id, loss] : batch_losses.entries) {
    if (id >= store.size()) {
      throw std::out_of_range("egu_batch_update: example id " + std::to_string(id) +
                              " out of range");
    }
    if (!seen.insert(id).second) {
      throw std::invalid_argument("egu_batch_update: duplicate example id " + std::to_string(id));
    }
    if (!std::isfinite(loss)) {
      throw std::invalid_argument("egu_batch_update: non-finite loss for example " +
                                  std::to_string(id));
    }
  }

  auto& lw = store.log_weights_;
  std::vector<double> updated(batch_losses.size());
  for (std::size_t i = 0; i < updated.size(); ++i) {
    const auto& [id, loss] = batch_losses.entries[i];
    updated[i] = params.r * (lw[id] - params.eta_w * loss);
    if (!std::isfinite(updated[i])) {
      throw std::domain_error("egu_batch_update: log-weight of example " + std::to_string(id) +
                              " left the finite range");
    }
  }
  for (std::size_t i = 0; i < updated.size(); ++i) lw[batch_losses.entries[i].id] = updated[i];
}

std::vector<double> batch_normalized_weights(const WeightStore& store,
                                             std::span<const ExampleId> batch_ids) {
  if (batch_ids.empty()) throw std::invalid_argument("batch_normalized_weights: empty batch");
  std::vector<double> a(batch_ids.size());
  for (std::size_t i = 0; i < batch_ids.size(); ++i) {
    if (batch_ids[i] >= store.size()) {
      throw std::out_of_range("batch_normalized_weights: example id " +
                              std::to_string(batch_ids[i]) + " out of range");
    }
    a[i] = store.log_weight(batch_ids[i]);
  }
  return normalize_log_domain(a);
}

std::vector<double> capped_projection(std::span<const double> w, double cap) {
  check_simplex(w);
  const std::size_t n = w.size();
  if (!(cap > 0.0 && cap <= 1.0)) throw std::invalid_argument("capped_projection: cap must lie in (0, 1]");
  if (cap * static_cast<double>(n) < 1.0 - 1e-12) {
    throw std::invalid_argument("capped_projection: cap * n < 1, capped simplex is empty");
  }

  if (*std::max_element(w.begin(), w.end()) <= cap) return {w.begin(), w.end()};

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });

  // suffix[p] = mass of the entries not pinned when the leading p are.
  std::vector<double> suffix(n + 1, 0.0);
  for (std::size_t p = n; p-- > 0;) suffix[p] = suffix[p + 1] + w[order[p]];

  std::vector<double> out(n, 0.0);
  for (std::size_t pinned = 1; pinned < n; ++pinned) {
    const double remaining = 1.0 - static_cast<double>(pinned) * cap;
    if (remaining <= 0.0) break;
    const double rest = suffix[pinned];
    if (rest <= 0.0) continue;
    const double scale = remaining / rest;
    if (w[order[pinned]] * scale <= cap) {
      for (std::size_t j = 0; j < pinned; ++j) out[order[j]] = cap;
      for (std::size_t j = pinned; j < n; ++j) out[order[j]] = w[order[j]] * scale;
      return out;
    }
  }
  // cap * n == 1: uniform is the only feasible point.
  if (std::abs(cap * static_cast<double>(n) - 1.0) <= 1e-12) {
    return std::vector<double>(n, 1.0 / static_cast<double>(n));
  }
  throw std::domain_error(
      "capped_projection: fewer than 1/cap examples carry positive weight, projection undefined");
}

}  // namespace egrw
