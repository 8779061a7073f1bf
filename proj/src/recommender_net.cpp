#include "taskrec/recommender_net.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "taskrec/eval.hpp"

namespace taskrec::neural {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::vanilla: return "vanilla";
    case Variant::task: return "task";
    case Variant::jtc: return "jtc";
  }
  return "?";
}

Variant parse_variant(const std::string& s) {
  if (s == "vanilla" || s == "vrnn") return Variant::vanilla;
  if (s == "task" || s == "taskrnn") return Variant::task;
  if (s == "jtc" || s == "jtcrnn") return Variant::jtc;
  throw ValidationError("unknown network variant '" + s + "'");
}

void NetConfig::validate() const {
  if (vocab_size == 0) throw ValidationError("vocab_size must be positive");
  if (embed_dim == 0 || hidden_dim == 0 || layers == 0 || task_layers == 0) {
    throw ValidationError("network dimensions must be positive");
  }
  if (variant != Variant::vanilla && K == 0) throw ValidationError("task-aware variants need K >= 1");
  if (!(lr > 0.0)) throw ValidationError("learning rate must be positive");
  if (batch_size == 0) throw ValidationError("batch_size must be positive");
  if (max_epochs == 0) throw ValidationError("max_epochs must be positive");
}

nlohmann::json NetConfig::to_json() const {
  return nlohmann::json{{"variant", to_string(variant)},
                        {"vocab_size", vocab_size},
                        {"K", K},
                        {"embed_dim", embed_dim},
                        {"hidden_dim", hidden_dim},
                        {"layers", layers},
                        {"task_layers", task_layers},
                        {"lr", lr},
                        {"max_epochs", max_epochs},
                        {"patience", patience},
                        {"batch_size", batch_size},
                        {"grad_clip", grad_clip},
                        {"init_scale", init_scale},
                        {"forget_bias", forget_bias},
                        {"kl_weight", kl_weight},
                        {"seed", seed}};
}

NetConfig NetConfig::from_json(const nlohmann::json& j) {
  NetConfig c;
  c.variant = parse_variant(j.at("variant").get<std::string>());
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.K = j.value("K", c.K);
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
  c.layers = j.value("layers", c.layers);
  c.task_layers = j.value("task_layers", c.task_layers);
  c.lr = j.value("lr", c.lr);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.patience = j.value("patience", c.patience);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.grad_clip = j.value("grad_clip", c.grad_clip);
  c.init_scale = j.value("init_scale", c.init_scale);
  c.forget_bias = j.value("forget_bias", c.forget_bias);
  c.kl_weight = j.value("kl_weight", c.kl_weight);
  c.seed = j.value("seed", c.seed);
  return c;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ValidationError("KL divergence dimension mismatch");
  double kl = 0.0;
  for (std::size_t z = 0; z < p.size(); ++z) {
    if (p[z] <= 0.0) continue;
    kl += p[z] * std::log(p[z] / std::max(q[z], 1e-12));
  }
  return std::max(kl, 0.0);
}

// ---------------------------------------------------------------------------

RecommenderNet::RecommenderNet(const NetConfig& cfg, std::shared_ptr<const topics::BitermModel> btm)
    : cfg_(cfg), btm_(std::move(btm)) {
  cfg_.validate();
  if (cfg_.variant != Variant::vanilla) {
    if (!btm_) throw ValidationError("task-aware variants need a fitted topic model");
    if (btm_->K() != cfg_.K) {
      throw ValidationError("topic model has K=" + std::to_string(btm_->K()) + " but the network expects K=" +
                            std::to_string(cfg_.K));
    }
    if (btm_->vocab_size != cfg_.vocab_size) throw ValidationError("topic model vocabulary size differs");
  }
  const auto E = static_cast<Eigen::Index>(cfg_.embed_dim);
  const auto C = static_cast<Eigen::Index>(cfg_.vocab_size);
  const auto H = static_cast<Eigen::Index>(cfg_.hidden_dim);
  const auto K = static_cast<Eigen::Index>(cfg_.K);

  embedding = Tensor("embedding", E, C);
  main = LstmStack("main", cfg_.embed_dim + cfg_.side_width(), cfg_.hidden_dim, cfg_.layers);
  out_w = Tensor("out.W", C, H);
  out_b = Tensor("out.b", C, 1);
  if (cfg_.variant == Variant::jtc) {
    task_stack = LstmStack("task", cfg_.embed_dim + cfg_.K, cfg_.hidden_dim, cfg_.task_layers);
    task_w = Tensor("task.W", K, H);
    task_b = Tensor("task.b", K, 1);
  }

  auto rng = make_rng(cfg_.seed, 0x6e6574);
  init_uniform(embedding, cfg_.init_scale, rng);
  main.init(cfg_.init_scale, cfg_.forget_bias, rng);
  init_uniform(out_w, cfg_.init_scale, rng);
  if (cfg_.variant == Variant::jtc) {
    task_stack.init(cfg_.init_scale, cfg_.forget_bias, rng);
    init_uniform(task_w, cfg_.init_scale, rng);
  }
}

std::string RecommenderNet::name() const {
  switch (cfg_.variant) {
    case Variant::vanilla: return "vRNN";
    case Variant::task: return "TaskRNN";
    case Variant::jtc: return "JTC-RNN";
  }
  return "?";
}

TensorList RecommenderNet::tensors() {
  TensorList out{&embedding};
  main.append_tensors(out);
  out.push_back(&out_w);
  out.push_back(&out_b);
  if (cfg_.variant == Variant::jtc) {
    task_stack.append_tensors(out);
    out.push_back(&task_w);
    out.push_back(&task_b);
  }
  return out;
}

namespace {

Matrix replicate(const std::vector<double>& p, std::size_t T) {
  Matrix m(static_cast<Eigen::Index>(p.size()), static_cast<Eigen::Index>(T));
  for (Eigen::Index t = 0; t < m.cols(); ++t) {
    for (Eigen::Index z = 0; z < m.rows(); ++z) m(z, t) = p[static_cast<std::size_t>(z)];
  }
  return m;
}

Matrix stack_columns(const std::vector<topics::TaskDistribution>& dists) {
  const auto K = static_cast<Eigen::Index>(dists.empty() ? 0 : dists.front().size());
  Matrix m(K, static_cast<Eigen::Index>(dists.size()));
  for (std::size_t t = 0; t < dists.size(); ++t) {
    for (Eigen::Index z = 0; z < K; ++z) m(z, static_cast<Eigen::Index>(t)) = dists[t].p[static_cast<std::size_t>(z)];
  }
  return m;
}

}  // namespace

NetExample RecommenderNet::training_example(std::span<const CommandId> commands) const {
  NetExample ex;
  ex.commands.assign(commands.begin(), commands.end());
  if (cfg_.variant == Variant::task) {
    ex.side = replicate(topics::infer_task_distribution(*btm_, commands).p, commands.size());
  } else if (cfg_.variant == Variant::jtc) {
    auto dists = topics::prefix_distributions(*btm_, commands);
    ex.side = stack_columns(dists);
    ex.target_task = Eigen::Map<const Vector>(dists.back().p.data(), static_cast<Eigen::Index>(cfg_.K));
  }
  return ex;
}

NetExample RecommenderNet::inference_example(std::span<const CommandId> prefix) const {
  NetExample ex;
  ex.commands.assign(prefix.begin(), prefix.end());
  if (cfg_.variant == Variant::task) {
    ex.side = replicate(topics::infer_task_distribution(*btm_, prefix).p, prefix.size());
  } else if (cfg_.variant == Variant::jtc) {
    ex.side = stack_columns(topics::prefix_distributions(*btm_, prefix));
  }
  return ex;
}

struct RecommenderNet::Trace {
  std::size_t T = 0;
  Eigen::Index B = 0;
  StackTrace main;
  std::vector<Matrix> main_h;
  StackTrace task;
  std::vector<Matrix> task_h;
  std::vector<Matrix> task_probs;
  std::vector<Matrix> probs;
};

LossTerms RecommenderNet::run(const std::vector<const NetExample*>& batch, Trace* trace,
                              ForwardResult* result) const {
  if (batch.empty()) throw ValidationError("empty batch");
  const std::size_t T = batch.front()->commands.size();
  if (T == 0) throw ValidationError("cannot run the network on an empty prefix");
  const auto B = static_cast<Eigen::Index>(batch.size());
  const auto E = static_cast<Eigen::Index>(cfg_.embed_dim);
  const auto K = static_cast<Eigen::Index>(cfg_.K);
  for (const NetExample* ex : batch) {
    if (ex->commands.size() != T) throw ValidationError("batch sequences differ in length");
    for (CommandId c : ex->commands) {
      if (c >= cfg_.vocab_size) throw ValidationError("command id outside vocabulary");
    }
    if (cfg_.variant != Variant::vanilla &&
        (ex->side.rows() != K || ex->side.cols() != static_cast<Eigen::Index>(T))) {
      throw ValidationError("side input must be K x T");
    }
  }

  std::vector<Matrix> emb(T, Matrix(E, B));
  for (std::size_t t = 0; t < T; ++t) {
    for (Eigen::Index b = 0; b < B; ++b) emb[t].col(b) = embedding.value.col(batch[b]->commands[t]);
  }
  auto side_at = [&](std::size_t t) {
    Matrix s(K, B);
    for (Eigen::Index b = 0; b < B; ++b) s.col(b) = batch[b]->side.col(static_cast<Eigen::Index>(t));
    return s;
  };

  Trace local;
  Trace& tr = trace ? *trace : local;
  tr.T = T;
  tr.B = B;

  std::vector<Matrix> inputs(T);
  if (cfg_.variant == Variant::jtc) {
    std::vector<Matrix> task_inputs(T, Matrix(E + K, B));
    for (std::size_t t = 0; t < T; ++t) {
      task_inputs[t].topRows(E) = emb[t];
      task_inputs[t].bottomRows(K) = side_at(t);
    }
    tr.task_h = task_stack.forward(task_inputs, tr.task);
    tr.task_probs.resize(T);
    for (std::size_t t = 0; t < T; ++t) {
      Matrix logits = task_w.value * tr.task_h[t];
      logits.colwise() += task_b.value.col(0);
      tr.task_probs[t] = softmax_columns(logits);
    }
  }
  for (std::size_t t = 0; t < T; ++t) {
    switch (cfg_.variant) {
      case Variant::vanilla:
        inputs[t] = emb[t];
        break;
      case Variant::task:
        inputs[t].resize(E + K, B);
        inputs[t].topRows(E) = emb[t];
        inputs[t].bottomRows(K) = side_at(t);
        break;
      case Variant::jtc:
        inputs[t].resize(E + K, B);
        inputs[t].topRows(E) = emb[t];
        inputs[t].bottomRows(K) = tr.task_probs[t];
        break;
    }
  }
  tr.main_h = main.forward(inputs, tr.main);

  // Accumulated in extended precision so that finite-difference checks
  // resolve small gradients.
  long double nll = 0.0L, kl = 0.0L;
  const std::size_t steps = T - 1;
  tr.probs.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    Matrix logits = out_w.value * tr.main_h[t];
    logits.colwise() += out_b.value.col(0);
    tr.probs[t] = softmax_columns(logits);
    if (t + 1 < T) {
      for (Eigen::Index b = 0; b < B; ++b) {
        const double mx = logits.col(b).maxCoeff();
        long double sum = 0.0L;
        for (Eigen::Index c = 0; c < logits.rows(); ++c) sum += std::exp(static_cast<long double>(logits(c, b) - mx));
        nll += static_cast<long double>(mx) + std::log(sum) - logits(batch[b]->commands[t + 1], b);
      }
      if (cfg_.variant == Variant::jtc) {
        for (Eigen::Index b = 0; b < B; ++b) {
          const Vector& p = batch[b]->target_task;
          if (p.size() != K) continue;  // inference examples carry no target
          for (Eigen::Index z = 0; z < K; ++z) {
            if (p(z) <= 0.0) continue;
            kl += static_cast<long double>(p(z)) *
                  std::log(static_cast<long double>(p(z)) / std::max(tr.task_probs[t](z, b), 1e-12));
          }
        }
      }
    }
  }
  if (steps > 0) {
    const long double norm = static_cast<long double>(steps) * static_cast<long double>(B);
    nll /= norm;
    kl /= norm;
  }
  LossTerms terms;
  terms.nll = static_cast<double>(nll);
  terms.kl = static_cast<double>(kl);
  terms.total = static_cast<double>(nll + (cfg_.variant == Variant::jtc ? cfg_.kl_weight * kl : 0.0L));

  if (result) {
    result->probs = tr.probs;
    if (cfg_.variant == Variant::jtc) result->task_probs = tr.task_probs;
  }
  return terms;
}

ForwardResult RecommenderNet::forward(const std::vector<const NetExample*>& batch) const {
  ForwardResult r;
  run(batch, nullptr, &r);
  return r;
}

LossTerms RecommenderNet::loss(const std::vector<const NetExample*>& batch) const { return run(batch, nullptr, nullptr); }

LossTerms RecommenderNet::loss_and_grad(const std::vector<const NetExample*>& batch) {
  Trace tr;
  const LossTerms terms = run(batch, &tr, nullptr);
  const std::size_t T = tr.T;
  const Eigen::Index B = tr.B;
  const auto E = static_cast<Eigen::Index>(cfg_.embed_dim);
  const auto K = static_cast<Eigen::Index>(cfg_.K);
  const auto H = static_cast<Eigen::Index>(cfg_.hidden_dim);
  if (T < 2) return terms;
  const double scale = 1.0 / (static_cast<double>(T - 1) * static_cast<double>(B));

  std::vector<Matrix> d_main_h(T, Matrix::Zero(H, B));
  for (std::size_t t = 0; t + 1 < T; ++t) {
    Matrix dlogits = tr.probs[t];
    for (Eigen::Index b = 0; b < B; ++b) dlogits(batch[b]->commands[t + 1], b) -= 1.0;
    dlogits *= scale;
    out_w.grad.noalias() += dlogits * tr.main_h[t].transpose();
    out_b.grad.col(0) += dlogits.rowwise().sum();
    d_main_h[t].noalias() = out_w.value.transpose() * dlogits;
  }
  std::vector<Matrix> dx = main.backward(tr.main, d_main_h);
  for (std::size_t t = 0; t < T; ++t) {
    for (Eigen::Index b = 0; b < B; ++b) embedding.grad.col(batch[b]->commands[t]) += dx[t].col(b).head(E);
  }

  if (cfg_.variant == Variant::jtc) {
    std::vector<Matrix> d_task_h(T, Matrix::Zero(H, B));
    for (std::size_t t = 0; t < T; ++t) {
      const Matrix& q = tr.task_probs[t];
      const Matrix dq = dx[t].bottomRows(K);
      // Softmax backward, column by column.
      Matrix dlogits(K, B);
      for (Eigen::Index b = 0; b < B; ++b) {
        const double dot = q.col(b).dot(dq.col(b));
        dlogits.col(b) = q.col(b).cwiseProduct(dq.col(b) - Vector::Constant(K, dot));
      }
      if (t + 1 < T) {
        for (Eigen::Index b = 0; b < B; ++b) {
          const Vector& p = batch[b]->target_task;
          if (p.size() != K) continue;
          // d/dlogits of -sum p log softmax(logits) = q * sum(p) - p.
          dlogits.col(b) += cfg_.kl_weight * scale * (q.col(b) * p.sum() - p);
        }
      }
      task_w.grad.noalias() += dlogits * tr.task_h[t].transpose();
      task_b.grad.col(0) += dlogits.rowwise().sum();
      d_task_h[t].noalias() = task_w.value.transpose() * dlogits;
    }
    std::vector<Matrix> du = task_stack.backward(tr.task, d_task_h);
    for (std::size_t t = 0; t < T; ++t) {
      for (Eigen::Index b = 0; b < B; ++b) embedding.grad.col(batch[b]->commands[t]) += du[t].col(b).head(E);
    }
  }
  return terms;
}

std::vector<double> RecommenderNet::predict(std::span<const CommandId> prefix) const {
  if (prefix.empty()) throw ValidationError("network recommenders need at least one command");
  NetExample ex = inference_example(prefix);
  auto r = forward({&ex});
  const Matrix& last = r.probs.back();
  return std::vector<double>(last.data(), last.data() + last.rows());
}

std::vector<std::vector<double>> RecommenderNet::predict_steps(std::span<const CommandId> commands) const {
  return predict_steps_batch({commands}).front();
}

std::vector<std::vector<std::vector<double>>> RecommenderNet::predict_steps_batch(
    const std::vector<std::span<const CommandId>>& seqs) const {
  constexpr std::size_t kChunk = 256;
  std::vector<std::vector<std::vector<double>>> out(seqs.size());
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    if (seqs[i].size() >= 2) out[i].resize(seqs[i].size() - 1);
  }
  auto column = [](const Matrix& m, Eigen::Index b) {
    return std::vector<double>(m.col(b).data(), m.col(b).data() + m.rows());
  };

  if (cfg_.variant == Variant::task) {
    // The task input must be recomputed for every prefix, so each
    // evaluation point is its own forward pass.
    std::size_t longest = 0;
    for (const auto& s : seqs) longest = std::max(longest, s.size());
    for (std::size_t t = 0; t + 1 < longest; ++t) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < seqs.size(); ++i) {
        if (seqs[i].size() >= t + 2) members.push_back(i);
      }
      for (std::size_t start = 0; start < members.size(); start += kChunk) {
        const std::size_t stop = std::min(members.size(), start + kChunk);
        std::vector<NetExample> examples;
        examples.reserve(stop - start);
        for (std::size_t m = start; m < stop; ++m) examples.push_back(inference_example(seqs[members[m]].first(t + 1)));
        std::vector<const NetExample*> ptrs;
        for (const auto& e : examples) ptrs.push_back(&e);
        auto r = forward(ptrs);
        for (std::size_t m = start; m < stop; ++m) {
          out[members[m]][t] = column(r.probs.back(), static_cast<Eigen::Index>(m - start));
        }
      }
    }
    return out;
  }

  // vanilla and jtc are causal per step, so one pass covers every prefix.
  std::map<std::size_t, std::vector<std::size_t>> by_length;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    if (seqs[i].size() >= 2) by_length[seqs[i].size()].push_back(i);
  }
  for (const auto& [len, members] : by_length) {
    for (std::size_t start = 0; start < members.size(); start += kChunk) {
      const std::size_t stop = std::min(members.size(), start + kChunk);
      std::vector<NetExample> examples;
      examples.reserve(stop - start);
      for (std::size_t m = start; m < stop; ++m) examples.push_back(inference_example(seqs[members[m]]));
      std::vector<const NetExample*> ptrs;
      for (const auto& e : examples) ptrs.push_back(&e);
      auto r = forward(ptrs);
      for (std::size_t m = start; m < stop; ++m) {
        for (std::size_t t = 0; t + 1 < len; ++t) {
          out[members[m]][t] = column(r.probs[t], static_cast<Eigen::Index>(m - start));
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::vector<std::size_t>> make_batches(const std::vector<NetExample>& examples, std::size_t batch_size,
                                                   Rng& rng) {
  std::map<std::size_t, std::vector<std::size_t>> by_length;
  for (std::size_t i = 0; i < examples.size(); ++i) by_length[examples[i].commands.size()].push_back(i);
  std::vector<std::vector<std::size_t>> batches;
  for (auto& [len, idx] : by_length) {
    if (len < 2) continue;
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t s = 0; s < idx.size(); s += batch_size) {
      batches.emplace_back(idx.begin() + static_cast<std::ptrdiff_t>(s),
                           idx.begin() + static_cast<std::ptrdiff_t>(std::min(idx.size(), s + batch_size)));
    }
  }
  std::shuffle(batches.begin(), batches.end(), rng);
  return batches;
}

LossTerms mean_loss(const RecommenderNet& net, const std::vector<NetExample>& examples) {
  Rng rng = make_rng(0);
  auto batches = make_batches(examples, 256, rng);
  LossTerms sum;
  std::size_t n = 0;
  for (const auto& b : batches) {
    std::vector<const NetExample*> ptrs;
    for (std::size_t i : b) ptrs.push_back(&examples[i]);
    auto l = net.loss(ptrs);
    const auto w = static_cast<double>(b.size());
    sum.total += l.total * w;
    sum.nll += l.nll * w;
    sum.kl += l.kl * w;
    n += b.size();
  }
  if (n > 0) {
    sum.total /= static_cast<double>(n);
    sum.nll /= static_cast<double>(n);
    sum.kl /= static_cast<double>(n);
  }
  return sum;
}

}  // namespace

TrainReport train(RecommenderNet& net, const std::vector<CommandSequence>& train_set,
                  const std::vector<CommandSequence>& val_set, const MetricsSink& sink) {
  const NetConfig cfg = net.config();
  if (train_set.empty()) throw EmptyCorpusError("training set is empty");
  std::vector<NetExample> examples;
  examples.reserve(train_set.size());
  for (const auto& s : train_set) examples.push_back(net.training_example(s.commands));

  TrainReport report;
  report.initial_loss = mean_loss(net, examples).total;

  Adam adam(cfg.lr);
  RecommenderNet best = net;
  double best_val = -1.0;
  std::size_t bad_epochs = 0;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    auto rng = make_rng(cfg.seed, 0x1000 + epoch);
    auto batches = make_batches(examples, cfg.batch_size, rng);
    const TensorList params = net.tensors();
    EpochMetrics m;
    m.epoch = epoch;
    std::size_t seen = 0;
    for (const auto& b : batches) {
      std::vector<const NetExample*> ptrs;
      ptrs.reserve(b.size());
      for (std::size_t i : b) ptrs.push_back(&examples[i]);
      zero_grads(params);
      const LossTerms l = net.loss_and_grad(ptrs);
      clip_grads(params, cfg.grad_clip);
      adam.step(params);
      const auto w = static_cast<double>(b.size());
      m.loss += l.total * w;
      m.nll += l.nll * w;
      m.kl += l.kl * w;
      seen += b.size();
    }
    if (seen > 0) {
      m.loss /= static_cast<double>(seen);
      m.nll /= static_cast<double>(seen);
      m.kl /= static_cast<double>(seen);
    }
    m.val_top1 = val_set.empty() ? std::numeric_limits<double>::quiet_NaN()
                                 : eval::topk_accuracy(net, val_set, 1);
    report.epochs.push_back(m);
    report.stopped_epoch = epoch;
    if (sink) {
      nlohmann::json j{{"model", net.name()}, {"epoch", epoch}, {"loss", m.loss}, {"nll", m.nll}};
      if (cfg.variant == Variant::jtc) j["kl"] = m.kl;
      if (!val_set.empty()) j["val_top1"] = m.val_top1;
      sink(j);
    }
    if (val_set.empty()) {
      report.best_epoch = epoch;
      continue;
    }
    if (m.val_top1 > best_val) {
      best_val = m.val_top1;
      best = net;
      report.best_epoch = epoch;
      bad_epochs = 0;
    } else if (++bad_epochs >= cfg.patience) {
      break;
    }
  }
  if (!val_set.empty()) {
    net = best;
    report.best_val_top1 = best_val;
  }
  return report;
}

GradCheckResult gradient_check(RecommenderNet& net, const std::vector<CommandSequence>& batch, double epsilon,
                               std::size_t min_coordinates, std::uint64_t seed) {
  if (batch.empty()) throw ValidationError("gradient check needs at least one sequence");
  std::vector<NetExample> examples;
  for (const auto& s : batch) examples.push_back(net.training_example(s.commands));
  std::vector<const NetExample*> ptrs;
  for (const auto& e : examples) ptrs.push_back(&e);
  const TensorList params = net.tensors();
  return neural::gradient_check(
      params, [&] { return net.loss(ptrs).total; },
      [&] {
        zero_grads(params);
        return net.loss_and_grad(ptrs).total;
      },
      epsilon, min_coordinates, seed);
}

}  // namespace taskrec::neural
