#include "taskrec/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace taskrec::neural {

void zero_grads(const TensorList& tensors) {
  for (Tensor* t : tensors) t->grad.setZero();
}

double grad_norm(const TensorList& tensors) {
  double sq = 0.0;
  for (const Tensor* t : tensors) sq += t->grad.squaredNorm();
  return std::sqrt(sq);
}

void clip_grads(const TensorList& tensors, double max_norm) {
  if (!(max_norm > 0.0)) return;
  const double norm = grad_norm(tensors);
  if (norm <= max_norm) return;
  const double scale = max_norm / norm;
  for (Tensor* t : tensors) t->grad *= scale;
}

void init_uniform(Tensor& t, double scale, Rng& rng) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (Eigen::Index r = 0; r < t.value.rows(); ++r) {
    for (Eigen::Index c = 0; c < t.value.cols(); ++c) t.value(r, c) = dist(rng);
  }
}

void Adam::step(const TensorList& tensors) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (Tensor* t : tensors) {
    t->m = beta1_ * t->m + (1.0 - beta1_) * t->grad;
    t->v = beta2_ * t->v + (1.0 - beta2_) * t->grad.cwiseProduct(t->grad);
    t->value.array() -= lr_ * (t->m.array() / c1) / ((t->v.array() / c2).sqrt() + eps_);
  }
}

Matrix sigmoid(const Matrix& x) { return (1.0 + (-x.array()).exp()).inverse().matrix(); }

Matrix softmax_columns(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index b = 0; b < logits.cols(); ++b) {
    const double mx = logits.col(b).maxCoeff();
    out.col(b) = (logits.col(b).array() - mx).exp().matrix();
    out.col(b) /= out.col(b).sum();
  }
  return out;
}

// ---------------------------------------------------------------------------

LstmLayer::LstmLayer(std::string prefix, std::size_t input, std::size_t hidden)
    : weights(prefix + ".W", static_cast<Eigen::Index>(4 * hidden), static_cast<Eigen::Index>(input + hidden)),
      bias(prefix + ".b", static_cast<Eigen::Index>(4 * hidden), 1),
      input_(input),
      hidden_(hidden) {}

void LstmLayer::init(double scale, double forget_bias, Rng& rng) {
  init_uniform(weights, scale, rng);
  bias.value.setZero();
  bias.value.middleRows(static_cast<Eigen::Index>(hidden_), static_cast<Eigen::Index>(hidden_)).setConstant(forget_bias);
}

void LstmLayer::step(const Matrix& x, LstmState& state, LstmStepCache& cache) const {
  const auto H = static_cast<Eigen::Index>(hidden_);
  const auto in = static_cast<Eigen::Index>(input_);
  const Eigen::Index B = x.cols();
  cache.xh.resize(in + H, B);
  cache.xh.topRows(in) = x;
  cache.xh.bottomRows(H) = state.h;
  Matrix z = weights.value * cache.xh;
  z.colwise() += bias.value.col(0);
  cache.i = sigmoid(z.topRows(H));
  cache.f = sigmoid(z.middleRows(H, H));
  cache.g = z.middleRows(2 * H, H).array().tanh().matrix();
  cache.o = sigmoid(z.bottomRows(H));
  cache.c_prev = state.c;
  cache.c = cache.f.cwiseProduct(cache.c_prev) + cache.i.cwiseProduct(cache.g);
  cache.tanh_c = cache.c.array().tanh().matrix();
  cache.h = cache.o.cwiseProduct(cache.tanh_c);
  state.h = cache.h;
  state.c = cache.c;
}

Matrix LstmLayer::step_backward(const LstmStepCache& cache, Matrix& dh, Matrix& dc) {
  const auto H = static_cast<Eigen::Index>(hidden_);
  const auto in = static_cast<Eigen::Index>(input_);
  const auto ones = Matrix::Ones(H, cache.h.cols()).array();

  const Matrix dc_total =
      dc + (dh.array() * cache.o.array() * (ones - cache.tanh_c.array().square())).matrix();
  Matrix dz(4 * H, cache.h.cols());
  dz.topRows(H) = (dc_total.array() * cache.g.array() * cache.i.array() * (ones - cache.i.array())).matrix();
  dz.middleRows(H, H) = (dc_total.array() * cache.c_prev.array() * cache.f.array() * (ones - cache.f.array())).matrix();
  dz.middleRows(2 * H, H) = (dc_total.array() * cache.i.array() * (ones - cache.g.array().square())).matrix();
  dz.bottomRows(H) = (dh.array() * cache.tanh_c.array() * cache.o.array() * (ones - cache.o.array())).matrix();

  weights.grad.noalias() += dz * cache.xh.transpose();
  bias.grad.col(0) += dz.rowwise().sum();
  const Matrix dxh = weights.value.transpose() * dz;
  dh = dxh.bottomRows(H);
  dc = dc_total.cwiseProduct(cache.f);
  return dxh.topRows(in);
}

// ---------------------------------------------------------------------------

LstmStack::LstmStack(const std::string& prefix, std::size_t input, std::size_t hidden, std::size_t layers) {
  if (input == 0 || hidden == 0 || layers == 0) throw ValidationError("LSTM dimensions must be positive");
  layers_.reserve(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    layers_.emplace_back(prefix + ".l" + std::to_string(l), l == 0 ? input : hidden, hidden);
  }
}

void LstmStack::init(double scale, double forget_bias, Rng& rng) {
  for (auto& layer : layers_) layer.init(scale, forget_bias, rng);
}

void LstmStack::append_tensors(TensorList& out) {
  for (auto& layer : layers_) {
    out.push_back(&layer.weights);
    out.push_back(&layer.bias);
  }
}

std::vector<LstmState> LstmStack::zero_state(Eigen::Index batch) const {
  std::vector<LstmState> s(layers_.size());
  for (auto& st : s) {
    st.h = Matrix::Zero(static_cast<Eigen::Index>(hidden_size()), batch);
    st.c = Matrix::Zero(static_cast<Eigen::Index>(hidden_size()), batch);
  }
  return s;
}

const Matrix& LstmStack::step(const Matrix& x, std::vector<LstmState>& state,
                              std::vector<LstmStepCache>& caches) const {
  caches.resize(layers_.size());
  const Matrix* input = &x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    layers_[l].step(*input, state[l], caches[l]);
    input = &caches[l].h;
  }
  return caches.back().h;
}

std::vector<Matrix> LstmStack::forward(const std::vector<Matrix>& inputs, StackTrace& trace) const {
  trace.assign(inputs.size(), {});
  std::vector<Matrix> out;
  out.reserve(inputs.size());
  if (inputs.empty()) return out;
  auto state = zero_state(inputs.front().cols());
  for (std::size_t t = 0; t < inputs.size(); ++t) out.push_back(step(inputs[t], state, trace[t]));
  return out;
}

std::vector<Matrix> LstmStack::backward(const StackTrace& trace, const std::vector<Matrix>& d_top) {
  const std::size_t T = trace.size();
  if (d_top.size() != T) throw ValidationError("backward called with mismatched step count");
  std::vector<Matrix> dx(T);
  if (T == 0) return dx;
  const Eigen::Index B = trace.front().front().h.cols();
  const auto H = static_cast<Eigen::Index>(hidden_size());
  std::vector<Matrix> dh(layers_.size(), Matrix::Zero(H, B));
  std::vector<Matrix> dc(layers_.size(), Matrix::Zero(H, B));
  for (std::size_t t = T; t-- > 0;) {
    Matrix from_above = d_top[t];
    for (std::size_t l = layers_.size(); l-- > 0;) {
      dh[l] += from_above;
      from_above = layers_[l].step_backward(trace[t][l], dh[l], dc[l]);
    }
    dx[t] = std::move(from_above);
  }
  return dx;
}

// ---------------------------------------------------------------------------

GradCheckResult gradient_check(const TensorList& tensors, const std::function<double()>& loss,
                               const std::function<double()>& loss_and_grad, double epsilon,
                               std::size_t min_coordinates, std::uint64_t seed) {
  if (!std::isfinite(loss_and_grad())) throw ValidationError("loss is not finite");
  std::vector<Matrix> analytic;
  analytic.reserve(tensors.size());
  for (const Tensor* t : tensors) analytic.push_back(t->grad);

  // Every tensor contributes; small tensors are checked exhaustively.
  auto rng = make_rng(seed, 0x67636b);
  std::vector<std::vector<Eigen::Index>> picks(tensors.size());
  std::vector<std::vector<Eigen::Index>> pools(tensors.size());
  const std::size_t per = (min_coordinates + tensors.size() - 1) / std::max<std::size_t>(tensors.size(), 1);
  std::size_t total = 0;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    pools[i].resize(static_cast<std::size_t>(tensors[i]->size()));
    std::iota(pools[i].begin(), pools[i].end(), Eigen::Index{0});
    std::shuffle(pools[i].begin(), pools[i].end(), rng);
    std::size_t take = std::min(per, pools[i].size());
    picks[i].assign(pools[i].begin(), pools[i].begin() + static_cast<std::ptrdiff_t>(take));
    pools[i].erase(pools[i].begin(), pools[i].begin() + static_cast<std::ptrdiff_t>(take));
    total += take;
  }
  for (bool added = true; total < min_coordinates && added;) {
    added = false;
    for (std::size_t i = 0; i < tensors.size() && total < min_coordinates; ++i) {
      if (pools[i].empty()) continue;
      picks[i].push_back(pools[i].back());
      pools[i].pop_back();
      ++total;
      added = true;
    }
  }

  GradCheckResult result;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    Tensor& t = *tensors[i];
    for (Eigen::Index idx : picks[i]) {
      double& w = t.value.data()[idx];
      const double saved = w;
      w = saved + epsilon;
      const double up = loss();
      w = saved - epsilon;
      const double down = loss();
      w = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) throw ValidationError("loss is not finite");
      const double numeric = (up - down) / (2.0 * epsilon);
      const double a = analytic[i].data()[idx];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      if (rel > result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst_tensor = t.name;
      }
      ++result.coordinates;
    }
  }
  return result;
}

nlohmann::json tensor_shapes(const TensorList& tensors) {
  auto arr = nlohmann::json::array();
  for (const Tensor* t : tensors) arr.push_back({{"name", t->name}, {"rows", t->value.rows()}, {"cols", t->value.cols()}});
  return arr;
}

std::vector<double> flatten_values(const TensorList& tensors) {
  std::vector<double> out;
  for (const Tensor* t : tensors) {
    for (Eigen::Index r = 0; r < t->value.rows(); ++r) {
      for (Eigen::Index c = 0; c < t->value.cols(); ++c) out.push_back(t->value(r, c));
    }
  }
  return out;
}

void unflatten_values(const TensorList& tensors, const std::vector<double>& values) {
  std::size_t pos = 0;
  for (Tensor* t : tensors) {
    if (pos + static_cast<std::size_t>(t->size()) > values.size()) throw ValidationError("parameter payload too short");
    for (Eigen::Index r = 0; r < t->value.rows(); ++r) {
      for (Eigen::Index c = 0; c < t->value.cols(); ++c) t->value(r, c) = values[pos++];
    }
  }
  if (pos != values.size()) throw ValidationError("parameter payload has trailing values");
}

}  // namespace taskrec::neural
