#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "json.hpp"
#include "taskrec/corpus.hpp"

namespace taskrec::corpus {

/// Rules for planting "stuck user" behaviour. A struggling document gets a
/// help command at some index past the minimum context, preceded by a
/// 2-command loop and/or a run of long pauses.
struct HelpInjection {
  double help_rate = 0.2;    // fraction of documents that end up asking for help
  double loop_rate = 0.6;    // P(loop) for a struggling document
  double pause_rate = 0.6;   // P(long pauses) for a struggling document
  std::size_t loop_repeats = 3;
  std::size_t pause_steps = 3;
  double pause_min = 60.0;
  double pause_max = 180.0;
  std::size_t min_context = 8;
  std::size_t help_commands = 2;
};

struct SyntheticSpec {
  std::size_t num_tasks = 3;
  std::size_t vocab_per_task = 10;
  std::size_t docs = 1000;
  std::size_t doc_length = 21;
  double task_mixing = 0.05;
  /// Extra weight on each command's designated successor. Rows are
  /// (1 + s * [j = successor]) / (V - 1 + s) over the slice minus the
  /// current command; infinity yields a deterministic cycle.
  double transition_sharpness = 20.0;
  std::size_t users = 100;
  double mean_gap = 4.0;
  double max_gap = 30.0;
  std::optional<HelpInjection> help;

  void validate() const;
  nlohmann::json to_json() const;
  static SyntheticSpec from_json(const nlohmann::json& j);
};

struct SyntheticCorpus {
  Vocabulary vocab;
  std::vector<CommandSequence> sequences;
  std::vector<std::size_t> task_labels;
  /// Per document: true when a help command was planted.
  std::vector<bool> struggling;
  /// Per task: the successor of each slice-local command.
  std::vector<std::vector<CommandId>> successors;

  /// Ids [task * vocab_per_task, (task + 1) * vocab_per_task).
  std::size_t vocab_per_task = 0;
  bool in_slice(CommandId c, std::size_t task) const {
    return c >= task * vocab_per_task && c < (task + 1) * vocab_per_task;
  }
};

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

/// Renders a corpus as a JSONL event log (one session per document) so the
/// ingest path can be exercised on synthetic data.
std::string to_event_log(const SyntheticCorpus& corpus, double start_ts = 1.5e9);

}  // namespace taskrec::corpus
