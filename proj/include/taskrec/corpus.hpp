#pragma once

#include <cstdint>
#include <istream>
#include <set>
#include <string>
#include <vector>

#include "taskrec/common.hpp"
#include "taskrec/vocabulary.hpp"

namespace taskrec::corpus {

struct Event {
  std::string command;
  double ts = 0.0;  // seconds since epoch
};

struct RawSession {
  std::string user;
  std::string session;
  std::vector<Event> events;  // sorted by ts
};

/// An ordered run of commands from one user. `gaps` is either empty or has
/// the same length as `commands`; gaps[j] is the time between command j-1 and
/// command j, and gaps[0] is 0.
struct CommandSequence {
  std::string user;
  std::vector<CommandId> commands;
  std::vector<double> gaps;

  std::size_t size() const { return commands.size(); }
  bool has_gaps() const { return !gaps.empty(); }
  /// Copy holding the first `n` steps.
  CommandSequence prefix(std::size_t n) const;

  bool operator==(const CommandSequence&) const = default;
};

enum class HelpLabel : int { no_help = 0, help = 1 };

struct HelpExample {
  CommandSequence sequence;
  HelpLabel label = HelpLabel::no_help;

  bool operator==(const HelpExample&) const = default;
};

struct ParseResult {
  std::vector<RawSession> sessions;  // ordered by (user, session)
  std::size_t lines = 0;
  std::size_t skipped = 0;
};

/// Reads a JSONL event log ({"user","session","command","ts"} per line).
/// Malformed lines are counted and skipped.
ParseResult parse_log(std::istream& in);

/// Removes every event whose command is in `denylist`.
std::vector<RawSession> filter_commands(std::vector<RawSession> sessions, const std::set<std::string>& denylist);

/// Vocabulary over all commands occurring in `sessions`.
Vocabulary build_vocabulary(const std::vector<RawSession>& sessions, const std::vector<std::string>& help_names);

/// Encodes a session as ids plus gaps (first gap 0) without any filtering.
CommandSequence encode_session(const RawSession& session, const Vocabulary& vocab);

/// Caps runs of identical commands at `max_repeat`. The gap of a removed
/// command is folded into the next kept command so gaps keep meaning
/// "time since the previous kept command".
CommandSequence cap_repeats(const CommandSequence& seq, std::size_t max_repeat);

/// Caps repeats first, then drops sequences shorter than `target_len` and
/// truncates longer ones to their first `target_len` commands.
std::vector<CommandSequence> preprocess(const std::vector<CommandSequence>& sequences, std::size_t max_repeat = 2,
                                        std::size_t target_len = 21);

std::vector<CommandSequence> preprocess(const std::vector<RawSession>& sessions, const Vocabulary& vocab,
                                        std::size_t max_repeat = 2, std::size_t target_len = 21);

struct HelpSplit {
  std::vector<HelpExample> positives;
  std::vector<CommandSequence> rest;
  std::size_t discarded = 0;
};

/// Sequences whose first help command sits at index >= k + 1 become positives
/// trimmed to everything before that command (so they keep at least k + 1
/// steps). Sequences with an earlier help command are discarded; sequences
/// without one go to `rest`.
HelpSplit label_help(const std::vector<CommandSequence>& sequences, const Vocabulary& vocab, std::size_t k = 8);

/// Uniform sample of `n` sequences without replacement, labeled no_help.
std::vector<HelpExample> sample_negatives(const std::vector<CommandSequence>& rest, std::size_t n,
                                          std::uint64_t seed);

/// Crops each negative to a length drawn from the positives' lengths so that
/// sequence length alone does not reveal the label.
std::vector<HelpExample> match_lengths(std::vector<HelpExample> negatives, const std::vector<HelpExample>& positives,
                                       std::uint64_t seed);

struct UserSplit {
  std::vector<CommandSequence> train;
  std::vector<CommandSequence> test;
  std::set<std::string> train_users;
  std::set<std::string> test_users;
};

/// Partitions the set of users; round(test_fraction * users) go to test.
UserSplit split_by_user(const std::vector<CommandSequence>& sequences, double test_fraction, std::uint64_t seed);

struct PrepareOptions {
  double test_fraction = 0.2;
  std::size_t k = 8;
  std::size_t negatives_per_positive = 5;
  bool match_negative_lengths = true;
  std::uint64_t seed = 7;
};

struct PreparedCorpus {
  std::vector<CommandSequence> train;
  std::vector<CommandSequence> test;
  std::vector<HelpExample> help_train;
  std::vector<HelpExample> help_test;
  std::size_t discarded_help = 0;
};

/// User split followed by help labeling and negative sampling on each side.
PreparedCorpus prepare(const std::vector<CommandSequence>& sequences, const Vocabulary& vocab,
                       const PrepareOptions& opts);

/// Longest run of identical consecutive commands.
std::size_t longest_run(const std::vector<CommandId>& commands);

}  // namespace taskrec::corpus
