#include "egrw/trainer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "egrw/rng.hpp"

namespace egrw {

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::softmax_linear ? "softmax" : "mlp";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "softmax" || name == "softmax_linear") return ModelKind::softmax_linear;
  if (name == "mlp" || name == "mlp_one_hidden") return ModelKind::mlp_one_hidden;
  throw std::invalid_argument("unknown model '" + std::string(name) + "'");
}

std::string_view to_string(LossSource s) {
  return s == LossSource::training_loss ? "training" : "laplacian";
}

LossSource parse_loss_source(std::string_view name) {
  if (name == "training" || name == "training_loss") return LossSource::training_loss;
  if (name == "laplacian" || name == "pseudo" || name == "pseudo_loss") return LossSource::pseudo_loss;
  throw std::invalid_argument("unknown loss source '" + std::string(name) + "'");
}

namespace {

using RowMap = Eigen::Map<RowMatrix>;
using ConstRowMap = Eigen::Map<const RowMatrix>;

}  // namespace

ClassifierModel::ClassifierModel(ModelKind kind, Eigen::Index d, Eigen::Index h, Eigen::Index k)
    : kind_(kind), input_dim_(d), hidden_(h), num_classes_(k) {
  if (d < 1 || k < 2) throw std::invalid_argument("model: need input_dim >= 1 and at least 2 classes");
  const Eigen::Index size = kind == ModelKind::softmax_linear ? k * d + k : h * d + h + k * h + k;
  theta_ = Eigen::VectorXd::Zero(size);
}

ClassifierModel ClassifierModel::softmax_linear(Eigen::Index input_dim, Eigen::Index num_classes) {
  return ClassifierModel(ModelKind::softmax_linear, input_dim, 0, num_classes);
}

ClassifierModel ClassifierModel::mlp_one_hidden(Eigen::Index input_dim, Eigen::Index hidden,
                                                Eigen::Index num_classes) {
  if (hidden < 1) throw std::invalid_argument("model: hidden width must be >= 1");
  return ClassifierModel(ModelKind::mlp_one_hidden, input_dim, hidden, num_classes);
}

void ClassifierModel::initialize(std::uint64_t seed) {
  Rng rng(seed);
  theta_.setZero();
  auto fill = [&](Eigen::Index offset, Eigen::Index count, Eigen::Index fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Eigen::Index i = 0; i < count; ++i) theta_(offset + i) = rng.uniform(-bound, bound);
  };
  const Eigen::Index d = input_dim_, h = hidden_, k = num_classes_;
  if (kind_ == ModelKind::softmax_linear) {
    fill(0, k * d, d);
  } else {
    fill(0, h * d, d);
    fill(h * d + h, k * h, h);
  }
}

Eigen::MatrixXd ClassifierModel::logits(const Eigen::Ref<const RowMatrix>& X) const {
  if (X.cols() != input_dim_) throw std::invalid_argument("model: input dimension mismatch");
  const Eigen::Index d = input_dim_, h = hidden_, k = num_classes_;
  const double* p = theta_.data();
  if (kind_ == ModelKind::softmax_linear) {
    const ConstRowMap W(p, k, d);
    const Eigen::Map<const Eigen::VectorXd> b(p + k * d, k);
    Eigen::MatrixXd Z = X * W.transpose();
    Z.rowwise() += b.transpose();
    return Z;
  }
  const ConstRowMap W1(p, h, d);
  const Eigen::Map<const Eigen::VectorXd> b1(p + h * d, h);
  const ConstRowMap W2(p + h * d + h, k, h);
  const Eigen::Map<const Eigen::VectorXd> b2(p + h * d + h + k * h, k);
  Eigen::MatrixXd H = X * W1.transpose();
  H.rowwise() += b1.transpose();
  H = H.cwiseMax(0.0);
  Eigen::MatrixXd Z = H * W2.transpose();
  Z.rowwise() += b2.transpose();
  return Z;
}

Eigen::VectorXd ClassifierModel::losses_and_gradient(const Eigen::Ref<const RowMatrix>& X,
                                                     std::span<const int> labels,
                                                     std::span<const double> weights,
                                                     Eigen::VectorXd* grad) const {
  const Eigen::Index n = X.rows();
  if (X.cols() != input_dim_) throw std::invalid_argument("model: input dimension mismatch");
  if (static_cast<Eigen::Index>(labels.size()) != n) throw std::invalid_argument("model: label count mismatch");
  if (grad && static_cast<Eigen::Index>(weights.size()) != n) {
    throw std::invalid_argument("model: weight count mismatch");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (labels[static_cast<std::size_t>(i)] < 0 || labels[static_cast<std::size_t>(i)] >= num_classes_) {
      throw std::invalid_argument("model: label " + std::to_string(labels[static_cast<std::size_t>(i)]) +
                                  " out of range at row " + std::to_string(i));
    }
  }

  const Eigen::Index d = input_dim_, h = hidden_, k = num_classes_;
  const double* p = theta_.data();

  // Forward. H is only used by the MLP.
  Eigen::MatrixXd H_pre, H, Z;
  if (kind_ == ModelKind::softmax_linear) {
    Z = logits(X);
  } else {
    const ConstRowMap W1(p, h, d);
    const Eigen::Map<const Eigen::VectorXd> b1(p + h * d, h);
    const ConstRowMap W2(p + h * d + h, k, h);
    const Eigen::Map<const Eigen::VectorXd> b2(p + h * d + h + k * h, k);
    H_pre = X * W1.transpose();
    H_pre.rowwise() += b1.transpose();
    H = H_pre.cwiseMax(0.0);
    Z = H * W2.transpose();
    Z.rowwise() += b2.transpose();
  }

  // Max-shifted log-sum-exp per row; Z becomes softmax probabilities.
  Eigen::VectorXd losses(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double top = Z.row(i).maxCoeff();
    const double lse = top + std::log((Z.row(i).array() - top).exp().sum());
    const int y = labels[static_cast<std::size_t>(i)];
    losses(i) = lse - Z(i, y);
    if (!std::isfinite(losses(i))) throw std::domain_error("model: non-finite loss at row " + std::to_string(i));
    if (grad) Z.row(i) = (Z.row(i).array() - lse).exp().matrix();
  }
  if (!grad) return losses;

  // dL/dZ = w_i (softmax - onehot)
  Eigen::MatrixXd& G = Z;
  for (Eigen::Index i = 0; i < n; ++i) {
    G(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
    G.row(i) *= weights[static_cast<std::size_t>(i)];
  }

  grad->setZero(theta_.size());
  double* g = grad->data();
  if (kind_ == ModelKind::softmax_linear) {
    RowMap(g, k, d).noalias() = G.transpose() * X;
    Eigen::Map<Eigen::VectorXd>(g + k * d, k) = G.colwise().sum().transpose();
  } else {
    const ConstRowMap W2(p + h * d + h, k, h);
    RowMap(g + h * d + h, k, h).noalias() = G.transpose() * H;
    Eigen::Map<Eigen::VectorXd>(g + h * d + h + k * h, k) = G.colwise().sum().transpose();
    Eigen::MatrixXd dH = G * W2;
    dH.array() *= (H_pre.array() > 0.0).cast<double>();
    RowMap(g, h, d).noalias() = dH.transpose() * X;
    Eigen::Map<Eigen::VectorXd>(g + h * d, h) = dH.colwise().sum().transpose();
  }
  return losses;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (!(eta_theta >= 0.0) || !std::isfinite(eta_theta)) throw std::invalid_argument("train: eta_theta must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("train: momentum must lie in [0, 1)");
  if (model == ModelKind::mlp_one_hidden && hidden < 1) throw std::invalid_argument("train: hidden must be >= 1");
  schedule.validate();
  eg.validate(batch_size);
}

Eigen::VectorXd per_example_loss(const ClassifierModel& model, const Eigen::Ref<const RowMatrix>& X,
                                 std::span<const int> labels) {
  return model.losses_and_gradient(X, labels, {}, nullptr);
}

void weighted_gradient_step(ClassifierModel& model, const Eigen::Ref<const RowMatrix>& X,
                            std::span<const int> labels, std::span<const double> batch_weights,
                            double eta_theta, double momentum, MomentumState& state) {
  check_simplex(batch_weights);
  if (state.velocity.size() != model.parameters().size()) {
    throw std::invalid_argument("weighted_gradient_step: momentum buffer shape mismatch");
  }
  Eigen::VectorXd grad;
  model.losses_and_gradient(X, labels, batch_weights, &grad);
  if (!grad.allFinite()) throw std::domain_error("weighted_gradient_step: non-finite gradient");
  state.velocity = momentum * state.velocity + grad;
  model.parameters() -= eta_theta * state.velocity;
}

double evaluate(const ClassifierModel& model, const LabeledDataset& test) {
  if (test.size() == 0) throw std::invalid_argument("evaluate: empty test set");
  if (!test.has_labels()) throw std::invalid_argument("evaluate: test set has no labels");
  constexpr Eigen::Index kChunk = 4096;
  std::size_t correct = 0;
  for (Eigen::Index start = 0; start < test.features.rows(); start += kChunk) {
    const Eigen::Index rows = std::min(kChunk, test.features.rows() - start);
    const Eigen::MatrixXd Z = model.logits(test.features.middleRows(start, rows));
    for (Eigen::Index i = 0; i < rows; ++i) {
      Eigen::Index best = 0;
      for (Eigen::Index j = 1; j < Z.cols(); ++j) {
        if (Z(i, j) > Z(i, best)) best = j;
      }
      if (best == test.labels[static_cast<std::size_t>(start + i)]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

namespace {

ClassifierModel make_model(const TrainConfig& cfg, Eigen::Index d, Eigen::Index k) {
  return cfg.model == ModelKind::softmax_linear ? ClassifierModel::softmax_linear(d, k)
                                                : ClassifierModel::mlp_one_hidden(d, cfg.hidden, k);
}

Eigen::VectorXd full_losses(const ClassifierModel& model, const LabeledDataset& ds) {
  constexpr Eigen::Index kChunk = 4096;
  Eigen::VectorXd out(ds.features.rows());
  for (Eigen::Index start = 0; start < ds.features.rows(); start += kChunk) {
    const Eigen::Index rows = std::min(kChunk, ds.features.rows() - start);
    out.segment(start, rows) = per_example_loss(
        model, ds.features.middleRows(start, rows),
        std::span<const int>(ds.labels).subspan(static_cast<std::size_t>(start), static_cast<std::size_t>(rows)));
  }
  return out;
}

void record_epoch(ExperimentReport& report, std::int64_t epoch, double rate, const ClassifierModel& model,
                  const WeightStore& store, const LabeledDataset& train, const LabeledDataset* test) {
  report.add(epoch, "train", "eg_rate", rate, "all");
  if (test) report.add(epoch, "test", "accuracy", evaluate(model, *test), "all");

  const Eigen::VectorXd losses = full_losses(model, train);
  report.add(epoch, "train", "mean_loss", losses.mean(), "all");
  if (!train.noise_mask) return;

  const auto normalized = store.normalized();
  const auto log_w = store.log_weights();
  double loss_sum[2] = {0, 0}, weight_sum[2] = {0, 0}, log_sum[2] = {0, 0};
  std::size_t count[2] = {0, 0};
  for (std::size_t i = 0; i < train.size(); ++i) {
    const int g = (*train.noise_mask)[i] ? 1 : 0;
    loss_sum[g] += losses(static_cast<Eigen::Index>(i));
    weight_sum[g] += normalized[i];
    log_sum[g] += log_w[i];
    ++count[g];
  }
  const char* names[2] = {"clean", "noisy"};
  for (int g = 0; g < 2; ++g) {
    if (count[g] == 0) continue;
    const auto c = static_cast<double>(count[g]);
    report.add(epoch, "train", "mean_loss", loss_sum[g] / c, names[g]);
    report.add(epoch, "train", "mean_weight", weight_sum[g] / c, names[g]);
    report.add(epoch, "train", "mean_log_weight", log_sum[g] / c, names[g]);
  }
}

}  // namespace

TrainResult train(const LabeledDataset& train_set, const TrainConfig& cfg, const LabeledDataset* test) {
  cfg.validate();
  train_set.validate();
  const std::size_t n = train_set.size();
  if (n == 0) throw std::invalid_argument("train: empty training set");
  if (!train_set.has_labels()) throw std::invalid_argument("train: training set has no labels");
  if (cfg.loss_source == LossSource::pseudo_loss && !train_set.pseudo_loss) {
    throw std::invalid_argument("train: loss_source = pseudo_loss but no pseudo-loss column is cached");
  }
  if (cfg.eg.cap) {
    const std::size_t tail = n % cfg.batch_size;
    if (tail != 0) cfg.eg.validate(tail);
  }
  if (test && test->dim() != train_set.dim()) throw std::invalid_argument("train: test dimension differs");

  TrainResult result{make_model(cfg, static_cast<Eigen::Index>(train_set.dim()), train_set.num_classes),
                     WeightStore(n), {}};
  result.model.initialize(substream_seed(cfg.seed, 1));
  MomentumState momentum(result.model);
  Rng shuffle_rng(substream_seed(cfg.seed, 2));

  std::vector<ExampleId> ids;
  std::vector<int> batch_labels;
  RowMatrix batch;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double rate = warmup_decay_rate(cfg.schedule, epoch);
    const EgStepParams step{rate, cfg.eg.r, cfg.eg.cap};
    const auto perm = random_permutation(n, shuffle_rng);

    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t size = std::min(cfg.batch_size, n - start);
      ids.assign(perm.begin() + static_cast<std::ptrdiff_t>(start),
                 perm.begin() + static_cast<std::ptrdiff_t>(start + size));
      batch.resize(static_cast<Eigen::Index>(size), train_set.features.cols());
      batch_labels.resize(size);
      for (std::size_t b = 0; b < size; ++b) {
        batch.row(static_cast<Eigen::Index>(b)) = train_set.features.row(static_cast<Eigen::Index>(ids[b]));
        batch_labels[b] = train_set.labels[ids[b]];
      }

      std::vector<double> losses(size);
      if (cfg.loss_source == LossSource::training_loss) {
        const Eigen::VectorXd l = per_example_loss(result.model, batch, batch_labels);
        for (std::size_t b = 0; b < size; ++b) losses[b] = l(static_cast<Eigen::Index>(b));
      } else {
        for (std::size_t b = 0; b < size; ++b) losses[b] = (*train_set.pseudo_loss)[ids[b]];
      }
      egu_batch_update(result.weights, LossVector(ids, losses), step);

      std::vector<double> batch_weights = batch_normalized_weights(result.weights, ids);
      if (cfg.eg.cap) batch_weights = capped_projection(batch_weights, *cfg.eg.cap);
      weighted_gradient_step(result.model, batch, batch_labels, batch_weights, cfg.eta_theta, cfg.momentum,
                             momentum);
    }
    record_epoch(result.report, epoch, rate, result.model, result.weights, train_set, test);
  }
  return result;
}

}  // namespace egrw
