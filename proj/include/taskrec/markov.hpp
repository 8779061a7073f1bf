#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "taskrec/corpus.hpp"
#include "taskrec/recommender.hpp"
#include "taskrec/topics.hpp"
#include "taskrec/vocabulary.hpp"

namespace taskrec::markov {

using corpus::CommandSequence;

/// (count + 1) / (total + |C|) for every command.
std::vector<double> laplace(std::span<const std::uint64_t> counts, std::uint64_t total);

class FirstOrderModel : public Recommender {
 public:
  FirstOrderModel() = default;
  explicit FirstOrderModel(std::size_t vocab_size);

  static FirstOrderModel fit(const std::vector<CommandSequence>& train, std::size_t vocab_size);

  std::string name() const override { return "FirstMM"; }
  std::size_t vocab_size() const override { return vocab_size_; }

  std::uint64_t count(CommandId from, CommandId to) const { return counts_[from * vocab_size_ + to]; }
  std::uint64_t row_total(CommandId from) const { return row_totals_[from]; }

  /// Laplace-smoothed transition row out of `last`.
  std::vector<double> predict_next(CommandId last) const;
  /// Uses the last command of `prefix`; an empty prefix gets the uniform distribution.
  std::vector<double> predict(std::span<const CommandId> prefix) const override;

  std::string vocab_hash;

  nlohmann::json to_json() const;
  static FirstOrderModel from_json(const nlohmann::json& j);

 private:
  std::size_t vocab_size_ = 0;
  std::vector<std::uint64_t> counts_;
  std::vector<std::uint64_t> row_totals_;
};

struct PstOptions {
  std::size_t max_depth = 10;
  /// A context becomes a node when it is followed by a next command at least
  /// this many times.
  std::uint64_t min_count = 7;
};

/// The one place the occurrence threshold is applied.
inline bool meets_threshold(std::uint64_t occurrences, std::uint64_t min_count) { return occurrences >= min_count; }

struct PstNode {
  std::vector<std::uint64_t> counts;  // next-command counts, size |C|
  std::uint64_t total = 0;
};

/// Variable-order context tree. Contexts are stored oldest-first, most recent
/// last; the empty context is the root and counts every position.
class SuffixTree : public Recommender {
 public:
  using Context = std::vector<CommandId>;

  static SuffixTree fit(const std::vector<CommandSequence>& train, std::size_t vocab_size, const PstOptions& opts);
  /// Root-only tree (every prediction uniform).
  static SuffixTree empty(std::size_t vocab_size, const PstOptions& opts);

  std::string name() const override { return "PST"; }
  std::size_t vocab_size() const override { return vocab_size_; }
  const PstOptions& options() const { return opts_; }

  const PstNode* find(std::span<const CommandId> context) const;
  const PstNode& root() const { return nodes_.at(Context{}); }
  const std::map<Context, PstNode>& nodes() const { return nodes_; }

  /// Context matched for `prefix`: its longest suffix (<= max_depth) that is a node.
  std::span<const CommandId> matched_context(std::span<const CommandId> prefix) const;
  std::vector<double> predict(std::span<const CommandId> prefix) const override;

  /// Indented text rendering, one node per line.
  std::string dump(const Vocabulary* vocab = nullptr, std::size_t top = 3) const;

  std::string vocab_hash;

  nlohmann::json to_json() const;
  static SuffixTree from_json(const nlohmann::json& j);

 private:
  std::size_t vocab_size_ = 0;
  PstOptions opts_;
  std::map<Context, PstNode> nodes_;
};

/// One PST per task; predictions mixed by the prefix's task distribution.
class TaskPstEnsemble : public Recommender {
 public:
  static TaskPstEnsemble fit(const std::vector<CommandSequence>& train, std::shared_ptr<const topics::BitermModel> btm,
                             const PstOptions& opts);

  std::string name() const override { return "TaskPST"; }
  std::size_t vocab_size() const override { return trees_.empty() ? 0 : trees_.front().vocab_size(); }

  const std::vector<SuffixTree>& trees() const { return trees_; }
  const topics::BitermModel& btm() const { return *btm_; }

  /// Mixture under explicit task weights.
  std::vector<double> predict_with(std::span<const CommandId> prefix, std::span<const double> weights) const;
  std::vector<double> predict(std::span<const CommandId> prefix) const override;

  std::string vocab_hash;

  nlohmann::json to_json() const;
  static TaskPstEnsemble from_json(const nlohmann::json& j);

 private:
  std::vector<SuffixTree> trees_;
  std::shared_ptr<const topics::BitermModel> btm_;
};

}  // namespace taskrec::markov
