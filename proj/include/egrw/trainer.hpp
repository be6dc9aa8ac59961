#pragma once

// Weighted mini-batch SGD with heavy-ball momentum, interleaved with
// exponentiated-gradient updates of per-example weights.
//
// Per batch, in this order:
//   1. losses at the current parameters (training loss or cached pseudo-loss)
//   2. egu_batch_update with the epoch's warm-up/decay rate
//   3. batch-normalized weights, optionally capped
//   4. momentum step on the weighted training-loss gradient

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "egrw/dataset.hpp"
#include "egrw/report.hpp"
#include "egrw/schedules.hpp"
#include "egrw/weight_engine.hpp"

namespace egrw {

enum class ModelKind { softmax_linear, mlp_one_hidden };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

/// Softmax classifier, either linear or with one ReLU hidden layer. All
/// parameters live in one flat vector:
///   linear: W (K x d, row-major), b (K)
///   mlp:    W1 (h x d), b1 (h), W2 (K x h), b2 (K)
class ClassifierModel {
 public:
  static ClassifierModel softmax_linear(Eigen::Index input_dim, Eigen::Index num_classes);
  static ClassifierModel mlp_one_hidden(Eigen::Index input_dim, Eigen::Index hidden, Eigen::Index num_classes);

  /// Weights ~ Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)); biases 0.
  void initialize(std::uint64_t seed);

  ModelKind kind() const { return kind_; }
  Eigen::Index input_dim() const { return input_dim_; }
  Eigen::Index hidden_dim() const { return hidden_; }
  Eigen::Index num_classes() const { return num_classes_; }

  Eigen::VectorXd& parameters() { return theta_; }
  const Eigen::VectorXd& parameters() const { return theta_; }

  /// n x K logits for the rows of X.
  Eigen::MatrixXd logits(const Eigen::Ref<const RowMatrix>& X) const;

  /// Per-example cross-entropy losses; if `grad` is given, it receives the
  /// gradient of sum_i weights[i] * loss_i with respect to the parameters.
  Eigen::VectorXd losses_and_gradient(const Eigen::Ref<const RowMatrix>& X, std::span<const int> labels,
                                      std::span<const double> weights, Eigen::VectorXd* grad) const;

  bool operator==(const ClassifierModel&) const = default;

 private:
  ClassifierModel(ModelKind kind, Eigen::Index d, Eigen::Index h, Eigen::Index k);

  ModelKind kind_;
  Eigen::Index input_dim_;
  Eigen::Index hidden_;
  Eigen::Index num_classes_;
  Eigen::VectorXd theta_;
};

struct MomentumState {
  Eigen::VectorXd velocity;

  explicit MomentumState(const ClassifierModel& model)
      : velocity(Eigen::VectorXd::Zero(model.parameters().size())) {}
};

enum class LossSource { training_loss, pseudo_loss };

std::string_view to_string(LossSource s);
LossSource parse_loss_source(std::string_view name);

struct TrainConfig {
  int epochs = 30;
  std::size_t batch_size = 1000;
  double eta_theta = 0.1;
  double momentum = 0.9;
  ModelKind model = ModelKind::softmax_linear;
  Eigen::Index hidden = 128;
  /// eta_w is taken from `schedule` each epoch; r and cap from here.
  EgStepParams eg;
  WarmupDecaySchedule schedule;
  LossSource loss_source = LossSource::training_loss;
  std::uint64_t seed = 0;

  void validate() const;
};

/// -log softmax(logits(x_i))[y_i] for each example.
Eigen::VectorXd per_example_loss(const ClassifierModel& model, const Eigen::Ref<const RowMatrix>& X,
                                 std::span<const int> labels);

/// g = sum_i w_i grad loss_i; v <- momentum v + g; theta <- theta - eta_theta v.
void weighted_gradient_step(ClassifierModel& model, const Eigen::Ref<const RowMatrix>& X,
                            std::span<const int> labels, std::span<const double> batch_weights,
                            double eta_theta, double momentum, MomentumState& state);

/// Fraction of rows whose argmax logit (lowest index on ties) equals the label.
double evaluate(const ClassifierModel& model, const LabeledDataset& test);

struct TrainResult {
  ClassifierModel model;
  WeightStore weights;
  ExperimentReport report;
};

/// Runs the reweighted training loop. With a test set, the report gets
/// per-epoch test accuracy; with a noise mask on `train`, it gets mean
/// training loss, mean normalized weight and mean log-weight for the "clean"
/// and "noisy" groups. loss_source = pseudo_loss requires train.pseudo_loss.
TrainResult train(const LabeledDataset& train, const TrainConfig& cfg,
                  const LabeledDataset* test = nullptr);

}  // namespace egrw
