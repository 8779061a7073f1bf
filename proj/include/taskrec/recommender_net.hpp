#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "taskrec/corpus.hpp"
#include "taskrec/lstm.hpp"
#include "taskrec/recommender.hpp"
#include "taskrec/topics.hpp"

namespace taskrec::neural {

using corpus::CommandSequence;

/// vanilla: embedding only. task: embedding + task distribution.
/// jtc: embedding + the net's own running estimate of the full-sequence task
/// distribution, produced by a task sub-network fed the prefix distributions.
enum class Variant { vanilla, task, jtc };

std::string to_string(Variant v);
Variant parse_variant(const std::string& s);

struct NetConfig {
  Variant variant = Variant::vanilla;
  std::size_t vocab_size = 0;
  std::size_t K = 0;
  std::size_t embed_dim = 32;
  std::size_t hidden_dim = 64;
  std::size_t layers = 2;
  std::size_t task_layers = 1;
  double lr = 1e-3;
  std::size_t max_epochs = 50;
  std::size_t patience = 5;
  std::size_t batch_size = 32;
  double grad_clip = 5.0;
  double init_scale = 0.08;
  double forget_bias = 1.0;
  double kl_weight = 1.0;
  std::uint64_t seed = 1;

  std::size_t side_width() const { return variant == Variant::vanilla ? 0 : K; }
  void validate() const;
  nlohmann::json to_json() const;
  static NetConfig from_json(const nlohmann::json& j);
};

/// One sequence with the side information the variant consumes.
struct NetExample {
  std::vector<CommandId> commands;
  Matrix side;         // K x T; column t is the side input at step t (empty for vanilla)
  Vector target_task;  // K; full-sequence distribution (jtc training only)
};

struct ForwardResult {
  std::vector<Matrix> probs;       // per step, |C| x B
  std::vector<Matrix> task_probs;  // jtc only, per step, K x B
};

struct LossTerms {
  double total = 0.0;
  double nll = 0.0;
  double kl = 0.0;
};

class RecommenderNet : public Recommender {
 public:
  RecommenderNet(const NetConfig& cfg, std::shared_ptr<const topics::BitermModel> btm = nullptr);

  RecommenderNet(const RecommenderNet&) = default;
  RecommenderNet& operator=(const RecommenderNet&) = default;

  const NetConfig& config() const { return cfg_; }
  const std::shared_ptr<const topics::BitermModel>& btm() const { return btm_; }

  std::string name() const override;
  std::size_t vocab_size() const override { return cfg_.vocab_size; }

  TensorList tensors();

  /// Training-mode example: task variant sees the full-sequence distribution
  /// at every step; jtc sees running prefix distributions and targets the
  /// full-sequence distribution.
  NetExample training_example(std::span<const CommandId> commands) const;
  /// Inference-mode example for a prefix: nothing past the prefix is read.
  NetExample inference_example(std::span<const CommandId> prefix) const;

  /// Batch forward; all examples must have the same length.
  ForwardResult forward(const std::vector<const NetExample*>& batch) const;

  /// Mean over sequences of the mean next-command NLL over steps 0..T-2,
  /// plus kl_weight * mean KL(target || estimate) for jtc.
  LossTerms loss(const std::vector<const NetExample*>& batch) const;
  /// Same value; accumulates gradients into the tensors (caller zeroes).
  LossTerms loss_and_grad(const std::vector<const NetExample*>& batch);

  std::vector<double> predict(std::span<const CommandId> prefix) const override;
  std::vector<std::vector<double>> predict_steps(std::span<const CommandId> commands) const override;
  /// predict_steps for many sequences at once.
  std::vector<std::vector<std::vector<double>>> predict_steps_batch(
      const std::vector<std::span<const CommandId>>& seqs) const;

  std::string vocab_hash;

  Tensor embedding;  // E x |C|, column per command
  LstmStack main;
  Tensor out_w;      // |C| x H
  Tensor out_b;      // |C| x 1
  LstmStack task_stack;
  Tensor task_w;     // K x H
  Tensor task_b;     // K x 1

 private:
  struct Trace;
  LossTerms run(const std::vector<const NetExample*>& batch, Trace* trace, ForwardResult* result) const;

  NetConfig cfg_;
  std::shared_ptr<const topics::BitermModel> btm_;
};

/// KL(p || q) = sum p log(p / q), 0 log 0 = 0, q clamped below at 1e-12.
double kl_divergence(std::span<const double> p, std::span<const double> q);

struct EpochMetrics {
  std::size_t epoch = 0;
  double loss = 0.0;
  double nll = 0.0;
  double kl = 0.0;
  double val_top1 = 0.0;
};

struct TrainReport {
  double initial_loss = 0.0;
  std::vector<EpochMetrics> epochs;
  std::size_t stopped_epoch = 0;
  std::size_t best_epoch = 0;
  double best_val_top1 = 0.0;
};

using MetricsSink = std::function<void(const nlohmann::json&)>;

/// Teacher-forced Adam training with early stopping on validation Top-1.
/// The returned net holds the parameters of the best validation epoch.
TrainReport train(RecommenderNet& net, const std::vector<CommandSequence>& train_set,
                  const std::vector<CommandSequence>& val_set, const MetricsSink& sink = {});

/// Checks the recommender's analytic gradients on `batch`.
GradCheckResult gradient_check(RecommenderNet& net, const std::vector<CommandSequence>& batch, double epsilon = 1e-4,
                               std::size_t min_coordinates = 200, std::uint64_t seed = 0);

}  // namespace taskrec::neural
