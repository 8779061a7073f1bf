#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "taskrec/corpus.hpp"
#include "taskrec/forest.hpp"
#include "taskrec/lstm.hpp"

namespace taskrec::help {

using corpus::CommandSequence;
using corpus::HelpExample;
using neural::Matrix;
using neural::Tensor;
using neural::TensorList;

/// Fixed |C| x dim Gaussian code book; row i is the code of command i.
struct ProjectionMatrix {
  Matrix codes;
  std::uint64_t seed = 0;

  std::size_t vocab_size() const { return static_cast<std::size_t>(codes.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(codes.cols()); }
};

/// Entries drawn i.i.d. from Normal(0, 1/dim).
ProjectionMatrix make_projection(std::size_t vocab_size, std::size_t dim, std::uint64_t seed);

/// Element-wise mean and max of the per-step vectors (code, then the gap when
/// `use_time`), followed by the length: 2 * (dim + 1) + 1 values with time,
/// 2 * dim + 1 without.
std::vector<double> featurize_rf(const CommandSequence& seq, const ProjectionMatrix& proj, bool use_time = true);

/// Random-forest help detector over pooled projected features.
struct HelpForest {
  ProjectionMatrix projection;
  bool use_time = true;
  RandomForest forest;
  std::string vocab_hash;

  double score(const CommandSequence& seq) const;

  nlohmann::json to_json() const;
  static HelpForest from_json(const nlohmann::json& j);
};

HelpForest fit_help_forest(const std::vector<HelpExample>& examples, std::size_t vocab_size, bool use_time,
                           const ForestConfig& forest_cfg, std::size_t proj_dim = 8, std::uint64_t proj_seed = 1);

struct HelpConfig {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 8;
  std::size_t hidden_dim = 32;
  std::size_t layers = 1;
  bool use_time = true;
  bool log_time = false;  // feed log1p(gap) instead of raw seconds
  double lr = 1e-3;
  std::size_t max_epochs = 60;
  std::size_t patience = 20;
  std::size_t batch_size = 8;
  double grad_clip = 5.0;
  double init_scale = 0.08;
  double forget_bias = 1.0;
  std::size_t k = 8;
  double threshold = 0.5;
  std::uint64_t seed = 1;

  std::size_t input_width() const { return embed_dim + (use_time ? 1 : 0); }
  void validate() const;
  nlohmann::json to_json() const;
  static HelpConfig from_json(const nlohmann::json& j);
};

/// Recurrent help classifier: embedding (plus gap) -> LSTM -> 2-way head.
/// Class 1 is "help".
class HelpLstm {
 public:
  explicit HelpLstm(const HelpConfig& cfg);

  const HelpConfig& config() const { return cfg_; }
  TensorList tensors();

  /// Input column for one step.
  Matrix step_input(CommandId c, double gap) const;
  /// P(help) from a top-layer hidden state (one column).
  double head(const Matrix& h) const;

  /// Training-mode probability: the whole sequence is unrolled and only the
  /// final hidden state reaches the head.
  double final_probability(const CommandSequence& seq) const;

  /// Mean cross-entropy of the final step over `batch`.
  double loss(const std::vector<const HelpExample*>& batch) const;
  /// Same value; accumulates gradients (caller zeroes).
  double loss_and_grad(const std::vector<const HelpExample*>& batch);

  std::string vocab_hash;

  Tensor embedding;  // E x |C|
  neural::LstmStack stack;
  Tensor out_w;      // 2 x H
  Tensor out_b;      // 2 x 1

 private:
  HelpConfig cfg_;
};

/// Per-stream recurrent state for online scoring; one per stream.
class HelpStream {
 public:
  explicit HelpStream(const HelpLstm& model);

  /// Feeds one step and returns P(help) after it.
  double push(CommandId c, double gap);
  std::size_t steps() const { return steps_; }

 private:
  const HelpLstm* model_;
  std::vector<neural::LstmState> state_;
  std::vector<neural::LstmStepCache> scratch_;
  std::size_t steps_ = 0;
};

struct HelpPrediction {
  std::vector<double> probs;  // probs[j] is P(help) at step k + j
  bool alarm = false;
  std::optional<std::size_t> first_alarm_index;  // step index, not offset into probs
};

/// Streams `seq` through the model; steps before `k` produce no output.
HelpPrediction predict_help_online(const HelpLstm& model, const CommandSequence& seq, std::size_t k,
                                   double threshold);

/// Sequence-level score: the largest online probability from step k on
/// (the final-step probability when the sequence is too short to emit any).
double help_score(const HelpLstm& model, const CommandSequence& seq, std::size_t k);

struct HelpEpoch {
  std::size_t epoch = 0;
  double loss = 0.0;
  double val_auroc = 0.0;
  double val_loss = 0.0;
};

struct HelpTrainReport {
  double initial_loss = 0.0;
  std::vector<HelpEpoch> epochs;
  std::size_t best_epoch = 0;
  double best_val_auroc = 0.0;
};

using HelpSink = std::function<void(const nlohmann::json&)>;

/// Adam on the final-step loss with stratified batches (each batch gets at
/// least one positive while positives last) and early stopping on validation
/// AU-ROC. With an empty validation set the last epoch is kept.
HelpTrainReport train_help_lstm(HelpLstm& model, const std::vector<HelpExample>& train,
                                const std::vector<HelpExample>& val, const HelpSink& sink = {});

/// Splits off a validation share, stratified by label.
std::pair<std::vector<HelpExample>, std::vector<HelpExample>> stratified_split(const std::vector<HelpExample>& examples,
                                                                               double val_fraction,
                                                                               std::uint64_t seed);

neural::GradCheckResult gradient_check(HelpLstm& model, const std::vector<HelpExample>& batch, double epsilon = 1e-4,
                                       std::size_t min_coordinates = 200, std::uint64_t seed = 0);

}  // namespace taskrec::help
