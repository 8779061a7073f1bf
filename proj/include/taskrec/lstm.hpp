#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "taskrec/common.hpp"

namespace taskrec::neural {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A trainable tensor with its gradient and Adam moments.
struct Tensor {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix m;
  Matrix v;

  Tensor() = default;
  Tensor(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)),
        value(Matrix::Zero(rows, cols)),
        grad(Matrix::Zero(rows, cols)),
        m(Matrix::Zero(rows, cols)),
        v(Matrix::Zero(rows, cols)) {}

  Eigen::Index size() const { return value.size(); }
};

using TensorList = std::vector<Tensor*>;

void zero_grads(const TensorList& tensors);
double grad_norm(const TensorList& tensors);
/// Rescales gradients so their global L2 norm is at most `max_norm`.
void clip_grads(const TensorList& tensors, double max_norm);
void init_uniform(Tensor& t, double scale, Rng& rng);

class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}
  void step(const TensorList& tensors);
  std::uint64_t steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::uint64_t t_ = 0;
};

Matrix sigmoid(const Matrix& x);
/// Column-wise softmax with max subtraction.
Matrix softmax_columns(const Matrix& logits);

/// Values saved by one forward step of one layer (columns are batch entries).
struct LstmStepCache {
  Matrix xh;      // [x; h_prev]
  Matrix i, f, g, o;
  Matrix c_prev, c, tanh_c, h;
};

struct LstmState {
  Matrix h;
  Matrix c;
};

/// One LSTM layer; gates stacked as [input; forget; candidate; output].
class LstmLayer {
 public:
  LstmLayer() = default;
  LstmLayer(std::string prefix, std::size_t input, std::size_t hidden);

  std::size_t input_size() const { return input_; }
  std::size_t hidden_size() const { return hidden_; }

  void init(double scale, double forget_bias, Rng& rng);

  /// Advances `state` by one step and records the intermediates in `cache`.
  void step(const Matrix& x, LstmState& state, LstmStepCache& cache) const;

  /// Backward through one step. `dh`/`dc` hold the gradient w.r.t. this
  /// step's h and c on entry and w.r.t. the previous step's h and c on exit.
  /// Returns the gradient w.r.t. x.
  Matrix step_backward(const LstmStepCache& cache, Matrix& dh, Matrix& dc);

  Tensor weights;  // 4H x (in + H)
  Tensor bias;     // 4H x 1

 private:
  std::size_t input_ = 0;
  std::size_t hidden_ = 0;
};

/// Per-step, per-layer caches of one unrolled forward pass.
using StackTrace = std::vector<std::vector<LstmStepCache>>;

/// Stack of LSTM layers unrolled over a whole sequence.
class LstmStack {
 public:
  LstmStack() = default;
  LstmStack(const std::string& prefix, std::size_t input, std::size_t hidden, std::size_t layers);

  std::size_t input_size() const { return layers_.empty() ? 0 : layers_.front().input_size(); }
  std::size_t hidden_size() const { return layers_.empty() ? 0 : layers_.front().hidden_size(); }
  std::size_t num_layers() const { return layers_.size(); }
  LstmLayer& layer(std::size_t l) { return layers_[l]; }
  const LstmLayer& layer(std::size_t l) const { return layers_[l]; }

  void init(double scale, double forget_bias, Rng& rng);
  void append_tensors(TensorList& out);

  std::vector<LstmState> zero_state(Eigen::Index batch) const;

  /// One time step through all layers; `caches` receives one entry per layer.
  /// Returns the top layer's hidden state.
  const Matrix& step(const Matrix& x, std::vector<LstmState>& state, std::vector<LstmStepCache>& caches) const;

  /// Unrolls over `inputs` (one matrix per step, input x batch) from a zero
  /// state, recording intermediates in `trace`. Returns the top hidden state
  /// per step.
  std::vector<Matrix> forward(const std::vector<Matrix>& inputs, StackTrace& trace) const;

  /// BPTT over a recorded forward pass. `d_top[t]` is dLoss/dh_top at step t.
  /// Accumulates parameter gradients; returns dLoss/dx per step.
  std::vector<Matrix> backward(const StackTrace& trace, const std::vector<Matrix>& d_top);

 private:
  std::vector<LstmLayer> layers_;
};

/// Central-difference check of analytic gradients.
struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;
  std::string worst_tensor;
};

/// `loss` evaluates the objective; `loss_and_grad` additionally leaves the
/// analytic gradient in each tensor's grad (after zeroing).
GradCheckResult gradient_check(const TensorList& tensors, const std::function<double()>& loss,
                               const std::function<double()>& loss_and_grad, double epsilon,
                               std::size_t min_coordinates, std::uint64_t seed);

/// Row-major raw parameter values plus shapes, for persistence.
nlohmann::json tensor_shapes(const TensorList& tensors);
std::vector<double> flatten_values(const TensorList& tensors);
void unflatten_values(const TensorList& tensors, const std::vector<double>& values);

}  // namespace taskrec::neural
