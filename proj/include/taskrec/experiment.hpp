#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "taskrec/corpus.hpp"
#include "taskrec/eval.hpp"
#include "taskrec/forest.hpp"
#include "taskrec/help.hpp"
#include "taskrec/markov.hpp"
#include "taskrec/recommender_net.hpp"
#include "taskrec/synthetic.hpp"
#include "taskrec/topics.hpp"

namespace taskrec::experiment {

using Sink = std::function<void(const nlohmann::json&)>;

/// End-to-end next-command benchmark on a generated corpus.
struct RecommendationSetup {
  corpus::SyntheticSpec corpus;
  corpus::PrepareOptions prepare;
  topics::BtmConfig btm;
  markov::PstOptions pst;
  neural::NetConfig net;
  double val_fraction = 0.1;
  /// Any of FirstMM, PST, TaskPST, vRNN, TaskRNN, JTC-RNN.
  std::vector<std::string> models = eval::recommender_order();

  nlohmann::json to_json() const;
  static RecommendationSetup from_json(const nlohmann::json& j);
};

/// Generates the corpus under `seed`, splits by user, fits everything
/// requested and returns Top-1/Top-5 on the test split.
eval::TrialMetrics recommendation_trial(const RecommendationSetup& setup, std::uint64_t seed, const Sink& sink = {});

/// End-to-end help-detection benchmark on a generated corpus.
struct HelpSetup {
  corpus::SyntheticSpec corpus;
  corpus::PrepareOptions prepare;
  help::ForestConfig forest;
  help::HelpConfig lstm;
  std::size_t proj_dim = 8;
  double val_fraction = 0.1;
  double threshold = 0.5;
  std::vector<std::string> models = eval::help_order();

  HelpSetup();
  nlohmann::json to_json() const;
  static HelpSetup from_json(const nlohmann::json& j);
};

eval::TrialMetrics help_trial(const HelpSetup& setup, std::uint64_t seed, const Sink& sink = {});

/// Random hold-out of whole sequences.
std::pair<std::vector<corpus::CommandSequence>, std::vector<corpus::CommandSequence>> holdout(
    const std::vector<corpus::CommandSequence>& seqs, double fraction, std::uint64_t seed);

/// precision, recall and auroc of `scores` against `examples`.
std::map<std::string, double> help_metrics(const std::vector<double>& scores,
                                           const std::vector<corpus::HelpExample>& examples, double threshold);

}  // namespace taskrec::experiment
