#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "taskrec/corpus.hpp"
#include "taskrec/recommender.hpp"

namespace taskrec::eval {

using corpus::CommandSequence;

/// Fraction of evaluation points whose true next command ranks in the top k.
/// Points are every prefix end t in [t_min, size-2] of every sequence.
double topk_accuracy(const Recommender& model, const std::vector<CommandSequence>& test, std::size_t k,
                     std::size_t t_min = 1);

struct TopK {
  double top1 = 0.0;
  double top5 = 0.0;
  std::size_t points = 0;
};

/// Top-1 and Top-5 from one pass over the test set.
TopK topk_accuracies(const Recommender& model, const std::vector<CommandSequence>& test, std::size_t t_min = 1);

/// True when `truth` lands in the first k of `probs` ordered by descending
/// probability with ties going to the lower id.
bool in_top_k(std::span<const double> probs, CommandId truth, std::size_t k);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
};

/// Predicted positive when score >= threshold. Precision is 0 when nothing is
/// predicted positive.
PrecisionRecall precision_recall(std::span<const double> scores, std::span<const int> labels, double threshold);

/// Mann-Whitney estimate of P(score of a positive > score of a negative),
/// ties counting one half.
double auroc(std::span<const double> scores, std::span<const int> labels);

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
  std::vector<double> values;
};

Summary summarize(const std::vector<double>& values);

/// Metric name -> value, per model.
using TrialMetrics = std::map<std::string, std::map<std::string, double>>;

struct ReportRow {
  std::string model;
  std::map<std::string, Summary> metrics;
};

struct EvalReport {
  std::string kind;  // "recommendation" or "help"
  std::size_t runs = 0;
  std::string fingerprint;
  std::vector<ReportRow> rows;

  const ReportRow& row(const std::string& model) const;
  nlohmann::json to_json() const;
  /// Aligned text table: models as columns for recommendation reports,
  /// models as rows for help reports.
  std::string table() const;
};

/// Thrown when one trial fails; carries the seed that failed.
class TrialError : public Error {
 public:
  TrialError(std::uint64_t seed, const std::string& what)
      : Error("trial with seed " + std::to_string(seed) + " failed: " + what), seed_(seed) {}
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

/// Runs `trial(seed + i)` for i in [0, n) and aggregates every metric.
/// `model_order` fixes the row order; models not listed follow alphabetically.
EvalReport run_trials(const std::function<TrialMetrics(std::uint64_t)>& trial, std::size_t n, std::uint64_t seed,
                      const std::string& kind, const std::vector<std::string>& model_order = {},
                      const std::string& fingerprint = "");

/// Hash of a configuration and the bytes of the inputs it ran on.
std::string fingerprint(const nlohmann::json& config, const std::vector<std::string>& inputs = {});

/// Column order used for recommendation tables.
const std::vector<std::string>& recommender_order();
/// Row order used for help tables.
const std::vector<std::string>& help_order();

}  // namespace taskrec::eval
