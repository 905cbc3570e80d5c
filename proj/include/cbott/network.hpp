#pragma once

#include "cbott/common.hpp"
#include "cbott/dataset.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace cbott {

// Numerically stable column-wise softmax (max subtraction).
template <typename Derived>
Matrix softmax_columns(const Eigen::MatrixBase<Derived>& logits) {
  Matrix shifted = logits.rowwise() - logits.colwise().maxCoeff();
  Matrix expd = shifted.array().exp().matrix();
  Vector inv_sums = expd.colwise().sum().cwiseInverse().transpose();
  return expd * inv_sums.asDiagonal();
}

template <typename Derived>
Matrix relu(const Eigen::MatrixBase<Derived>& m) {
  return m.array().max(Scalar(0)).matrix();
}

// Trunk-plus-two-heads network: trainable embedding table, flatten, one
// rectified hidden layer, softmax heads over terms and over hours.
struct ModelParams {
  // Hyperparameters recorded for shape checks.
  TokenId vocab_size = 0;
  int embedding_dim = 0;
  int hidden_dim = 0;
  int window_size = 0;
  std::uint64_t vocab_hash = 0;

  Matrix embeddings;     // V x d
  Matrix hidden_weight;  // h x (w-1)d
  Vector hidden_bias;    // h
  Matrix term_weight;    // V x h
  Vector term_bias;      // V
  Matrix hour_weight;    // 24 x h
  Vector hour_bias;      // 24

  int context_len() const { return window_size - 1; }
  int feature_dim() const { return context_len() * embedding_dim; }
  bool shapes_consistent() const;
};

struct TrainConfig {
  int epochs = 30;
  int patience = 5;
  double min_delta = 1e-4;
  double learning_rate = 0.05;
  int batch_size = 32;
  std::uint64_t seed = 1;
  int hidden_dim = 128;
  int embedding_dim = 64;

  void validate() const;
};

struct ForwardOutput {
  Vector term_probs;  // V
  Vector hour_probs;  // 24
  // Cached intermediates for backprop.
  Vector features;            // (w-1)d flattened embeddings
  Vector hidden_pre;          // h, pre-activation
  Vector hidden;              // h, post-ReLU
};

// Dense gradients of the mean batch loss w.r.t. every parameter. Embedding
// rows not referenced by the batch are zero.
struct Gradients {
  Matrix embeddings;
  Matrix hidden_weight;
  Vector hidden_bias;
  Matrix term_weight;
  Vector term_bias;
  Matrix hour_weight;
  Vector hour_bias;
};

// Seeded uniform init scaled by 1/sqrt(fan-in); biases zero.
ModelParams init_model(TokenId vocab_size, int embedding_dim, int hidden_dim,
                       int window_size, std::uint64_t seed);

ForwardOutput forward(const ModelParams& model, const TrainingWindow& window);

// -log p_term[target] - log p_hour[target]; probabilities clamped at 1e-12.
Scalar loss(const ForwardOutput& output, TokenId target_term, int target_hour);

// Mean loss over the batch plus its gradients, computed with batched
// matrix products (columns = windows).
Scalar compute_gradients(const ModelParams& model,
                         std::span<const TrainingWindow> batch, Gradients& grads);

// One SGD step on the batch; returns the mean batch loss. Throws on a
// non-finite loss.
Scalar train_step(ModelParams& model, std::span<const TrainingWindow> batch,
                  double learning_rate);

struct TrainHistory {
  std::vector<Scalar> epoch_losses;
  int epochs_run = 0;
  bool stopped_early = false;
};

// Stop once the best loss has gone `patience` consecutive epochs without
// improving by more than min_delta.
class EarlyStopper {
 public:
  EarlyStopper(double min_delta, int patience) : min_delta_(min_delta), patience_(patience) {}

  // Feed one epoch loss; returns true when training should stop.
  bool update(double epoch_loss) {
    if (best_ - epoch_loss > min_delta_) {
      best_ = epoch_loss;
      stale_ = 0;
      return false;
    }
    return ++stale_ >= patience_;
  }

 private:
  double min_delta_;
  int patience_;
  double best_ = std::numeric_limits<double>::infinity();
  int stale_ = 0;
};

// Up to config.epochs seeded-shuffled passes; stops once the best loss has
// not improved by more than min_delta for `patience` consecutive epochs.
// The model keeps the last-epoch weights.
TrainHistory train(ModelParams& model, const HostDataset& dataset, const TrainConfig& config);

// Versioned JSON checkpoint; load verifies shapes and the vocabulary hash.
void save_model(const ModelParams& model, const std::string& path);
ModelParams load_model(const std::string& path);

}  // namespace cbott
