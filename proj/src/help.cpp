#include "taskrec/help.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "taskrec/eval.hpp"

namespace taskrec::help {

ProjectionMatrix make_projection(std::size_t vocab_size, std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw ValidationError("projection dimension must be at least 1");
  if (vocab_size == 0) throw ValidationError("projection needs a non-empty vocabulary");
  ProjectionMatrix p;
  p.seed = seed;
  p.codes.resize(static_cast<Eigen::Index>(vocab_size), static_cast<Eigen::Index>(dim));
  Rng rng = make_rng(seed, 0x70726f6a);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(dim)));
  for (Eigen::Index i = 0; i < p.codes.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.codes.cols(); ++j) p.codes(i, j) = normal(rng);
  }
  return p;
}

std::vector<double> featurize_rf(const CommandSequence& seq, const ProjectionMatrix& proj, bool use_time) {
  if (seq.commands.empty()) throw ValidationError("cannot featurize an empty sequence");
  const std::size_t dim = proj.dim();
  const std::size_t w = dim + (use_time ? 1 : 0);
  std::vector<double> sum(w, 0.0);
  std::vector<double> mx(w, -std::numeric_limits<double>::infinity());
  std::vector<double> step(w);
  for (std::size_t t = 0; t < seq.commands.size(); ++t) {
    const CommandId c = seq.commands[t];
    if (c >= proj.vocab_size()) throw ValidationError("command id outside the projection's vocabulary");
    for (std::size_t j = 0; j < dim; ++j) step[j] = proj.codes(c, static_cast<Eigen::Index>(j));
    if (use_time) step[dim] = seq.has_gaps() ? seq.gaps[t] : 0.0;
    for (std::size_t j = 0; j < w; ++j) {
      sum[j] += step[j];
      mx[j] = std::max(mx[j], step[j]);
    }
  }
  std::vector<double> out;
  out.reserve(2 * w + 1);
  const auto n = static_cast<double>(seq.commands.size());
  for (double s : sum) out.push_back(s / n);
  out.insert(out.end(), mx.begin(), mx.end());
  out.push_back(n);
  return out;
}

// ---------------------------------------------------------------------------

double HelpForest::score(const CommandSequence& seq) const {
  const auto x = featurize_rf(seq, projection, use_time);
  return forest.predict(x);
}

nlohmann::json HelpForest::to_json() const {
  return {{"format", "taskrec-help-rf"},
          {"vocab_hash", vocab_hash},
          {"use_time", use_time},
          {"projection", {{"vocab_size", projection.vocab_size()}, {"dim", projection.dim()}, {"seed", projection.seed}}},
          {"forest", forest.to_json()}};
}

HelpForest HelpForest::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "taskrec-help-rf") throw ValidationError("not a help forest file");
  HelpForest f;
  f.vocab_hash = j.value("vocab_hash", "");
  f.use_time = j.at("use_time").get<bool>();
  const auto& p = j.at("projection");
  f.projection = make_projection(p.at("vocab_size").get<std::size_t>(), p.at("dim").get<std::size_t>(),
                                 p.at("seed").get<std::uint64_t>());
  f.forest = RandomForest::from_json(j.at("forest"));
  if (f.forest.num_features() != 2 * (f.projection.dim() + (f.use_time ? 1 : 0)) + 1) {
    throw ValidationError("help forest feature width does not match its projection");
  }
  return f;
}

HelpForest fit_help_forest(const std::vector<HelpExample>& examples, std::size_t vocab_size, bool use_time,
                           const ForestConfig& forest_cfg, std::size_t proj_dim, std::uint64_t proj_seed) {
  HelpForest f;
  f.use_time = use_time;
  f.projection = make_projection(vocab_size, proj_dim, proj_seed);
  std::vector<std::vector<double>> X;
  std::vector<int> y;
  X.reserve(examples.size());
  for (const auto& ex : examples) {
    X.push_back(featurize_rf(ex.sequence, f.projection, use_time));
    y.push_back(ex.label == corpus::HelpLabel::help ? 1 : 0);
  }
  f.forest = RandomForest::fit(X, y, forest_cfg);
  return f;
}

// ---------------------------------------------------------------------------

void HelpConfig::validate() const {
  if (vocab_size == 0) throw ValidationError("vocab_size must be positive");
  if (embed_dim == 0 || hidden_dim == 0 || layers == 0) throw ValidationError("help network dimensions must be positive");
  if (!(lr > 0.0)) throw ValidationError("learning rate must be positive");
  if (batch_size == 0 || max_epochs == 0) throw ValidationError("batch_size and max_epochs must be positive");
}

nlohmann::json HelpConfig::to_json() const {
  return {{"vocab_size", vocab_size}, {"embed_dim", embed_dim},     {"hidden_dim", hidden_dim},
          {"layers", layers},         {"use_time", use_time},       {"log_time", log_time},
          {"lr", lr},                 {"max_epochs", max_epochs},   {"patience", patience},
          {"batch_size", batch_size}, {"grad_clip", grad_clip},     {"init_scale", init_scale},
          {"forget_bias", forget_bias}, {"k", k},                   {"threshold", threshold},
          {"seed", seed}};
}

HelpConfig HelpConfig::from_json(const nlohmann::json& j) {
  HelpConfig c;
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
  c.layers = j.value("layers", c.layers);
  c.use_time = j.value("use_time", c.use_time);
  c.log_time = j.value("log_time", c.log_time);
  c.lr = j.value("lr", c.lr);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.patience = j.value("patience", c.patience);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.grad_clip = j.value("grad_clip", c.grad_clip);
  c.init_scale = j.value("init_scale", c.init_scale);
  c.forget_bias = j.value("forget_bias", c.forget_bias);
  c.k = j.value("k", c.k);
  c.threshold = j.value("threshold", c.threshold);
  c.seed = j.value("seed", c.seed);
  return c;
}

HelpLstm::HelpLstm(const HelpConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  embedding = Tensor("help.embedding", static_cast<Eigen::Index>(cfg_.embed_dim),
                     static_cast<Eigen::Index>(cfg_.vocab_size));
  stack = neural::LstmStack("help", cfg_.input_width(), cfg_.hidden_dim, cfg_.layers);
  out_w = Tensor("help.out.W", 2, static_cast<Eigen::Index>(cfg_.hidden_dim));
  out_b = Tensor("help.out.b", 2, 1);
  Rng rng = make_rng(cfg_.seed, 0x68656c70);
  neural::init_uniform(embedding, cfg_.init_scale, rng);
  stack.init(cfg_.init_scale, cfg_.forget_bias, rng);
  neural::init_uniform(out_w, cfg_.init_scale, rng);
}

TensorList HelpLstm::tensors() {
  TensorList out{&embedding};
  stack.append_tensors(out);
  out.push_back(&out_w);
  out.push_back(&out_b);
  return out;
}

Matrix HelpLstm::step_input(CommandId c, double gap) const {
  if (c >= cfg_.vocab_size) throw ValidationError("command id outside vocabulary");
  const auto E = static_cast<Eigen::Index>(cfg_.embed_dim);
  Matrix x(static_cast<Eigen::Index>(cfg_.input_width()), 1);
  x.topRows(E) = embedding.value.col(c);
  if (cfg_.use_time) x(E, 0) = cfg_.log_time ? std::log1p(std::max(gap, 0.0)) : gap;
  return x;
}

double HelpLstm::head(const Matrix& h) const {
  Matrix logits = out_w.value * h;
  logits += out_b.value;
  return neural::softmax_columns(logits)(1, 0);
}

namespace {

double gap_at(const CommandSequence& s, std::size_t t) { return s.has_gaps() ? s.gaps[t] : 0.0; }

std::vector<Matrix> sequence_inputs(const HelpLstm& m, const CommandSequence& s) {
  std::vector<Matrix> xs;
  xs.reserve(s.commands.size());
  for (std::size_t t = 0; t < s.commands.size(); ++t) xs.push_back(m.step_input(s.commands[t], gap_at(s, t)));
  return xs;
}

int label_of(const HelpExample& ex) { return ex.label == corpus::HelpLabel::help ? 1 : 0; }

}  // namespace

double HelpLstm::final_probability(const CommandSequence& seq) const {
  if (seq.commands.empty()) throw ValidationError("cannot score an empty sequence");
  neural::StackTrace trace;
  const auto hs = stack.forward(sequence_inputs(*this, seq), trace);
  return head(hs.back());
}

double HelpLstm::loss(const std::vector<const HelpExample*>& batch) const {
  if (batch.empty()) throw ValidationError("empty batch");
  double total = 0.0;
  for (const HelpExample* ex : batch) {
    const double p = final_probability(ex->sequence);
    total -= std::log(std::max(label_of(*ex) ? p : 1.0 - p, 1e-300));
  }
  return total / static_cast<double>(batch.size());
}

double HelpLstm::loss_and_grad(const std::vector<const HelpExample*>& batch) {
  if (batch.empty()) throw ValidationError("empty batch");
  const auto E = static_cast<Eigen::Index>(cfg_.embed_dim);
  const auto H = static_cast<Eigen::Index>(cfg_.hidden_dim);
  const double scale = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const HelpExample* ex : batch) {
    const auto& seq = ex->sequence;
    if (seq.commands.empty()) throw ValidationError("cannot train on an empty sequence");
    neural::StackTrace trace;
    const auto hs = stack.forward(sequence_inputs(*this, seq), trace);
    Matrix logits = out_w.value * hs.back();
    logits += out_b.value;
    Matrix probs = neural::softmax_columns(logits);
    const int y = label_of(*ex);
    total -= std::log(std::max(probs(y, 0), 1e-300));

    Matrix dlogits = probs;
    dlogits(y, 0) -= 1.0;
    dlogits *= scale;
    out_w.grad.noalias() += dlogits * hs.back().transpose();
    out_b.grad += dlogits;
    std::vector<Matrix> d_top(hs.size(), Matrix::Zero(H, 1));
    d_top.back() = out_w.value.transpose() * dlogits;
    const auto dx = stack.backward(trace, d_top);
    for (std::size_t t = 0; t < seq.commands.size(); ++t) embedding.grad.col(seq.commands[t]) += dx[t].topRows(E);
  }
  return total * scale;
}

HelpStream::HelpStream(const HelpLstm& model) : model_(&model), state_(model.stack.zero_state(1)) {}

double HelpStream::push(CommandId c, double gap) {
  const Matrix& h = model_->stack.step(model_->step_input(c, gap), state_, scratch_);
  ++steps_;
  return model_->head(h);
}

HelpPrediction predict_help_online(const HelpLstm& model, const CommandSequence& seq, std::size_t k,
                                   double threshold) {
  if (seq.commands.size() < k) {
    throw ValidationError("stream has " + std::to_string(seq.commands.size()) + " commands; at least " +
                          std::to_string(k) + " are needed for context");
  }
  HelpPrediction pred;
  HelpStream stream(model);
  for (std::size_t t = 0; t < seq.commands.size(); ++t) {
    const double p = stream.push(seq.commands[t], gap_at(seq, t));
    if (t < k) continue;
    pred.probs.push_back(p);
    if (!pred.alarm && p >= threshold) {
      pred.alarm = true;
      pred.first_alarm_index = t;
    }
  }
  return pred;
}

double help_score(const HelpLstm& model, const CommandSequence& seq, std::size_t k) {
  if (seq.commands.empty()) throw ValidationError("cannot score an empty sequence");
  if (seq.commands.size() <= k) return model.final_probability(seq);
  const auto pred = predict_help_online(model, seq, k, 2.0);
  return *std::max_element(pred.probs.begin(), pred.probs.end());
}

// ---------------------------------------------------------------------------

std::pair<std::vector<HelpExample>, std::vector<HelpExample>> stratified_split(const std::vector<HelpExample>& examples,
                                                                               double val_fraction,
                                                                               std::uint64_t seed) {
  if (val_fraction < 0.0 || val_fraction >= 1.0) throw ValidationError("validation fraction must be in [0, 1)");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < examples.size(); ++i) (label_of(examples[i]) ? pos : neg).push_back(i);
  Rng rng = make_rng(seed, 0x76616c);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);
  std::vector<bool> to_val(examples.size(), false);
  for (const auto* group : {&pos, &neg}) {
    const auto n = static_cast<std::size_t>(std::lround(val_fraction * static_cast<double>(group->size())));
    for (std::size_t i = 0; i < n; ++i) to_val[(*group)[i]] = true;
  }
  std::pair<std::vector<HelpExample>, std::vector<HelpExample>> out;
  for (std::size_t i = 0; i < examples.size(); ++i) (to_val[i] ? out.second : out.first).push_back(examples[i]);
  return out;
}

namespace {

std::vector<std::vector<std::size_t>> stratified_batches(const std::vector<HelpExample>& examples,
                                                         std::size_t batch_size, Rng& rng) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < examples.size(); ++i) (label_of(examples[i]) ? pos : neg).push_back(i);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);
  std::size_t nb = (examples.size() + batch_size - 1) / batch_size;
  if (!pos.empty()) nb = std::min(nb, pos.size());
  nb = std::max<std::size_t>(nb, 1);
  std::vector<std::vector<std::size_t>> batches(nb);
  for (std::size_t i = 0; i < pos.size(); ++i) batches[i % nb].push_back(pos[i]);
  for (std::size_t i = 0; i < neg.size(); ++i) batches[i % nb].push_back(neg[i]);
  std::shuffle(batches.begin(), batches.end(), rng);
  return batches;
}

double validation_auroc(const HelpLstm& model, const std::vector<HelpExample>& val) {
  std::vector<double> scores;
  std::vector<int> labels;
  for (const auto& ex : val) {
    scores.push_back(help_score(model, ex.sequence, model.config().k));
    labels.push_back(label_of(ex));
  }
  return eval::auroc(scores, labels);
}

bool both_classes(const std::vector<HelpExample>& v) {
  bool p = false, n = false;
  for (const auto& ex : v) (label_of(ex) ? p : n) = true;
  return p && n;
}

}  // namespace

HelpTrainReport train_help_lstm(HelpLstm& model, const std::vector<HelpExample>& train,
                                const std::vector<HelpExample>& val, const HelpSink& sink) {
  if (train.empty()) throw EmptyCorpusError("help training set is empty");
  if (!both_classes(train)) throw InsufficientDataError("help training set needs both classes");
  const HelpConfig cfg = model.config();
  const bool use_val = both_classes(val);

  std::vector<const HelpExample*> all, val_ptrs;
  for (const auto& ex : train) all.push_back(&ex);
  for (const auto& ex : val) val_ptrs.push_back(&ex);
  HelpTrainReport report;
  report.initial_loss = model.loss(all);

  neural::Adam adam(cfg.lr);
  HelpLstm best = model;
  double best_auc = -1.0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  std::size_t bad = 0;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    Rng rng = make_rng(cfg.seed, 0x2000 + epoch);
    const TensorList params = model.tensors();
    double sum = 0.0;
    for (const auto& b : stratified_batches(train, cfg.batch_size, rng)) {
      std::vector<const HelpExample*> ptrs;
      for (std::size_t i : b) ptrs.push_back(&train[i]);
      neural::zero_grads(params);
      sum += model.loss_and_grad(ptrs) * static_cast<double>(b.size());
      neural::clip_grads(params, cfg.grad_clip);
      adam.step(params);
    }
    HelpEpoch e;
    e.epoch = epoch;
    e.loss = sum / static_cast<double>(train.size());
    e.val_auroc = use_val ? validation_auroc(model, val) : std::numeric_limits<double>::quiet_NaN();
    e.val_loss = use_val ? model.loss(val_ptrs) : std::numeric_limits<double>::quiet_NaN();
    report.epochs.push_back(e);
    if (sink) {
      nlohmann::json j{{"model", "help-lstm"}, {"epoch", epoch}, {"loss", e.loss}};
      if (use_val) {
        j["val_auroc"] = e.val_auroc;
        j["val_loss"] = e.val_loss;
      }
      sink(j);
    }
    if (!use_val) {
      report.best_epoch = epoch;
      continue;
    }
    // Equal AU-ROC counts as progress when the validation loss drops.
    if (e.val_auroc > best_auc || (e.val_auroc == best_auc && e.val_loss < best_val_loss)) {
      best_auc = e.val_auroc;
      best_val_loss = e.val_loss;
      best = model;
      report.best_epoch = epoch;
      bad = 0;
    } else if (++bad >= cfg.patience) {
      break;
    }
  }
  if (use_val) {
    model = best;
    report.best_val_auroc = best_auc;
  }
  return report;
}

neural::GradCheckResult gradient_check(HelpLstm& model, const std::vector<HelpExample>& batch, double epsilon,
                                       std::size_t min_coordinates, std::uint64_t seed) {
  if (batch.empty()) throw ValidationError("gradient check needs at least one sequence");
  std::vector<const HelpExample*> ptrs;
  for (const auto& ex : batch) ptrs.push_back(&ex);
  const TensorList params = model.tensors();
  return neural::gradient_check(
      params, [&] { return model.loss(ptrs); },
      [&] {
        neural::zero_grads(params);
        return model.loss_and_grad(ptrs);
      },
      epsilon, min_coordinates, seed);
}

}  // namespace taskrec::help
