#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "taskrec/corpus.hpp"

namespace taskrec::topics {

using corpus::CommandSequence;

struct BtmConfig {
  std::size_t K = 14;
  double alpha = 0.001;
  double beta = 0.005;
  std::size_t iterations = 500;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Unordered command pair, stored with w1 <= w2.
struct Biterm {
  CommandId w1;
  CommandId w2;

  Biterm(CommandId a, CommandId b) : w1(std::min(a, b)), w2(std::max(a, b)) {}
  bool operator==(const Biterm&) const = default;
};

/// Point on the K-simplex.
struct TaskDistribution {
  std::vector<double> p;

  std::size_t size() const { return p.size(); }
  double operator[](std::size_t z) const { return p[z]; }
  std::size_t argmax() const { return taskrec::argmax(p); }
};

/// All pairs of distinct positions; the window is the whole document.
std::vector<Biterm> extract_biterms(std::span<const CommandId> commands);

struct BitermModel {
  BtmConfig config;
  std::size_t vocab_size = 0;
  std::string vocab_hash;
  std::vector<std::vector<double>> phi;  // K x |C|
  std::vector<double> theta;             // K
  std::vector<std::string> warnings;     // not persisted

  std::size_t K() const { return theta.size(); }

  nlohmann::json to_json() const;
  static BitermModel from_json(const nlohmann::json& j);
};

/// Counts of the collapsed Gibbs chain after a sweep.
struct GibbsState {
  std::size_t sweep = 0;
  std::size_t total_biterms = 0;
  const std::vector<std::size_t>* topic_biterms = nullptr;      // n_z
  const std::vector<std::size_t>* topic_word = nullptr;         // n_{w|z}, row-major K x |C|
};

using SweepObserver = std::function<void(const GibbsState&)>;

/// Collapsed Gibbs sampling over biterm topic assignments. Only the final
/// sweep's counts are read out.
BitermModel fit_btm(const std::vector<CommandSequence>& docs, std::size_t vocab_size, const BtmConfig& cfg,
                    const SweepObserver& observer = {});

/// Closed-form fold-in: mean over the prefix's biterms of P(z | b). Prefixes
/// shorter than 2 return theta.
TaskDistribution infer_task_distribution(const BitermModel& model, std::span<const CommandId> prefix);

/// Distribution of every prefix: entry t covers commands[0..t]. Entry t is
/// bitwise identical to infer_task_distribution on the same prefix.
std::vector<TaskDistribution> prefix_distributions(const BitermModel& model, std::span<const CommandId> commands);

/// Highest-phi commands of topic z, ties broken by lower id.
std::vector<std::pair<CommandId, double>> top_commands(const BitermModel& model, std::size_t z, std::size_t n = 20);

}  // namespace taskrec::topics
