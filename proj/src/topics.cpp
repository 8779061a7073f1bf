#include "taskrec/topics.hpp"

#include <algorithm>
#include <numeric>

namespace taskrec::topics {

void BtmConfig::validate() const {
  if (K < 1) throw ValidationError("K must be at least 1");
  if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
  if (!(beta > 0.0)) throw ValidationError("beta must be positive");
  if (iterations < 1) throw ValidationError("iterations must be at least 1");
}

std::vector<Biterm> extract_biterms(std::span<const CommandId> commands) {
  std::vector<Biterm> out;
  if (commands.size() < 2) return out;
  out.reserve(commands.size() * (commands.size() - 1) / 2);
  for (std::size_t i = 0; i < commands.size(); ++i) {
    for (std::size_t j = i + 1; j < commands.size(); ++j) out.emplace_back(commands[i], commands[j]);
  }
  return out;
}

BitermModel fit_btm(const std::vector<CommandSequence>& docs, std::size_t vocab_size, const BtmConfig& cfg,
                    const SweepObserver& observer) {
  cfg.validate();
  if (docs.empty()) throw EmptyCorpusError("cannot fit a topic model on an empty corpus");
  if (vocab_size == 0) throw ValidationError("vocabulary is empty");

  std::vector<Biterm> biterms;
  for (const auto& d : docs) {
    for (CommandId c : d.commands) {
      if (c >= vocab_size) throw ValidationError("command id " + std::to_string(c) + " outside vocabulary");
    }
    auto b = extract_biterms(d.commands);
    biterms.insert(biterms.end(), b.begin(), b.end());
  }
  if (biterms.empty()) throw EmptyCorpusError("corpus has no biterms (all documents shorter than 2)");

  const std::size_t K = cfg.K;
  const std::size_t M = vocab_size;
  const double Mbeta = static_cast<double>(M) * cfg.beta;

  BitermModel model;
  model.config = cfg;
  model.vocab_size = M;
  if (static_cast<double>(K) > static_cast<double>(M) * static_cast<double>(M)) {
    model.warnings.push_back("K exceeds |C|^2; the topic model is degenerate");
  }

  std::vector<std::size_t> n_z(K, 0);
  std::vector<std::size_t> n_wz(K * M, 0);
  std::vector<std::uint32_t> assign(biterms.size());

  auto rng = make_rng(cfg.seed, 0x62746d);
  std::uniform_int_distribution<std::size_t> init_topic(0, K - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (std::size_t i = 0; i < biterms.size(); ++i) {
    auto z = init_topic(rng);
    assign[i] = static_cast<std::uint32_t>(z);
    ++n_z[z];
    ++n_wz[z * M + biterms[i].w1];
    ++n_wz[z * M + biterms[i].w2];
  }

  std::vector<double> cumulative(K);
  for (std::size_t sweep = 1; sweep <= cfg.iterations; ++sweep) {
    for (std::size_t i = 0; i < biterms.size(); ++i) {
      const auto [w1, w2] = biterms[i];
      std::size_t z = assign[i];
      --n_z[z];
      --n_wz[z * M + w1];
      --n_wz[z * M + w2];

      // Exact collapsed conditional; the second word sees the first when w1 == w2.
      const double self = (w1 == w2) ? 1.0 : 0.0;
      double total = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        const double words = 2.0 * static_cast<double>(n_z[k]);
        const double p = (static_cast<double>(n_z[k]) + cfg.alpha) *
                         (static_cast<double>(n_wz[k * M + w1]) + cfg.beta) *
                         (static_cast<double>(n_wz[k * M + w2]) + cfg.beta + self) /
                         ((words + Mbeta) * (words + 1.0 + Mbeta));
        total += p;
        cumulative[k] = total;
      }
      const double u = unit(rng) * total;
      z = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
      if (z >= K) z = K - 1;

      assign[i] = static_cast<std::uint32_t>(z);
      ++n_z[z];
      ++n_wz[z * M + w1];
      ++n_wz[z * M + w2];
    }
    if (observer) observer(GibbsState{sweep, biterms.size(), &n_z, &n_wz});
  }

  const double B = static_cast<double>(biterms.size());
  model.theta.resize(K);
  model.phi.assign(K, std::vector<double>(M));
  for (std::size_t k = 0; k < K; ++k) {
    model.theta[k] = (static_cast<double>(n_z[k]) + cfg.alpha) / (B + static_cast<double>(K) * cfg.alpha);
    const double denom = 2.0 * static_cast<double>(n_z[k]) + Mbeta;
    for (std::size_t w = 0; w < M; ++w) {
      model.phi[k][w] = (static_cast<double>(n_wz[k * M + w]) + cfg.beta) / denom;
    }
  }
  return model;
}

namespace {

void check_ids(const BitermModel& model, std::span<const CommandId> commands) {
  for (CommandId c : commands) {
    if (c >= model.vocab_size) throw ValidationError("command id " + std::to_string(c) + " unknown to the topic model");
  }
}

// Adds P(z | (a, b)) to `acc`.
void accumulate_biterm(const BitermModel& model, CommandId a, CommandId b, std::vector<double>& scratch,
                       std::vector<double>& acc) {
  const std::size_t K = model.K();
  double norm = 0.0;
  for (std::size_t z = 0; z < K; ++z) {
    scratch[z] = model.theta[z] * model.phi[z][a] * model.phi[z][b];
    norm += scratch[z];
  }
  for (std::size_t z = 0; z < K; ++z) acc[z] += scratch[z] / norm;
}

TaskDistribution finish(const std::vector<double>& acc, std::size_t count) {
  TaskDistribution out{acc};
  for (auto& v : out.p) v /= static_cast<double>(count);
  return out;
}

}  // namespace

TaskDistribution infer_task_distribution(const BitermModel& model, std::span<const CommandId> prefix) {
  check_ids(model, prefix);
  if (prefix.size() < 2) return TaskDistribution{model.theta};
  const std::size_t K = model.K();
  std::vector<double> acc(K, 0.0), scratch(K);
  std::size_t count = 0;
  // Same accumulation order as prefix_distributions.
  for (std::size_t j = 1; j < prefix.size(); ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      accumulate_biterm(model, prefix[i], prefix[j], scratch, acc);
      ++count;
    }
  }
  return finish(acc, count);
}

std::vector<TaskDistribution> prefix_distributions(const BitermModel& model, std::span<const CommandId> commands) {
  check_ids(model, commands);
  const std::size_t K = model.K();
  std::vector<TaskDistribution> out;
  out.reserve(commands.size());
  std::vector<double> acc(K, 0.0), scratch(K);
  std::size_t count = 0;
  for (std::size_t j = 0; j < commands.size(); ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      accumulate_biterm(model, commands[i], commands[j], scratch, acc);
      ++count;
    }
    out.push_back(count == 0 ? TaskDistribution{model.theta} : finish(acc, count));
  }
  return out;
}

std::vector<std::pair<CommandId, double>> top_commands(const BitermModel& model, std::size_t z, std::size_t n) {
  if (z >= model.K()) throw ValidationError("topic index out of range");
  return top_n(model.phi[z], n);
}

nlohmann::json BitermModel::to_json() const {
  return nlohmann::json{{"format", "taskrec-btm"},
                        {"version", 1},
                        {"K", config.K},
                        {"alpha", config.alpha},
                        {"beta", config.beta},
                        {"iterations", config.iterations},
                        {"seed", config.seed},
                        {"vocab_size", vocab_size},
                        {"vocab_hash", vocab_hash},
                        {"phi", phi},
                        {"theta", theta}};
}

BitermModel BitermModel::from_json(const nlohmann::json& j) {
  BitermModel m;
  try {
    if (j.at("format").get<std::string>() != "taskrec-btm") throw ValidationError("not a topic model file");
    m.config.K = j.at("K").get<std::size_t>();
    m.config.alpha = j.at("alpha").get<double>();
    m.config.beta = j.at("beta").get<double>();
    m.config.iterations = j.at("iterations").get<std::size_t>();
    m.config.seed = j.at("seed").get<std::uint64_t>();
    m.vocab_size = j.at("vocab_size").get<std::size_t>();
    m.vocab_hash = j.at("vocab_hash").get<std::string>();
    m.phi = j.at("phi").get<std::vector<std::vector<double>>>();
    m.theta = j.at("theta").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed topic model: ") + e.what());
  }
  if (m.theta.size() != m.config.K || m.phi.size() != m.config.K) {
    throw ValidationError("topic model dimensions disagree with K");
  }
  for (const auto& row : m.phi) {
    if (row.size() != m.vocab_size) throw ValidationError("topic model phi row has wrong width");
  }
  return m;
}

}  // namespace taskrec::topics
