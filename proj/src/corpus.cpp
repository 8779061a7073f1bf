#include "taskrec/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "json.hpp"

namespace taskrec::corpus {

CommandSequence CommandSequence::prefix(std::size_t n) const {
  n = std::min(n, commands.size());
  CommandSequence out{user, {commands.begin(), commands.begin() + static_cast<std::ptrdiff_t>(n)}, {}};
  if (has_gaps()) out.gaps.assign(gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

ParseResult parse_log(std::istream& in) {
  if (!in) throw IoError("log stream is not readable");
  std::map<std::pair<std::string, std::string>, std::vector<Event>> grouped;
  ParseResult result;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++result.lines;
    try {
      auto j = nlohmann::json::parse(line);
      auto user = j.at("user").get<std::string>();
      auto session = j.at("session").get<std::string>();
      auto command = j.at("command").get<std::string>();
      double ts = j.at("ts").get<double>();
      if (!std::isfinite(ts) || command.empty()) {
        ++result.skipped;
        continue;
      }
      grouped[{std::move(user), std::move(session)}].push_back({std::move(command), ts});
    } catch (const nlohmann::json::exception&) {
      ++result.skipped;
    }
  }
  if (in.bad()) throw IoError("error while reading log stream");
  if (grouped.empty()) throw EmptyCorpusError("log contains no valid events");
  for (auto& [key, events] : grouped) {
    std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.ts < b.ts; });
    result.sessions.push_back({key.first, key.second, std::move(events)});
  }
  return result;
}

std::vector<RawSession> filter_commands(std::vector<RawSession> sessions, const std::set<std::string>& denylist) {
  if (denylist.empty()) return sessions;
  for (auto& s : sessions) {
    std::erase_if(s.events, [&](const Event& e) { return denylist.contains(e.command); });
  }
  std::erase_if(sessions, [](const RawSession& s) { return s.events.empty(); });
  return sessions;
}

Vocabulary build_vocabulary(const std::vector<RawSession>& sessions, const std::vector<std::string>& help_names) {
  std::vector<std::string> names;
  for (const auto& s : sessions) {
    for (const auto& e : s.events) names.push_back(e.command);
  }
  return Vocabulary::build(std::move(names), help_names);
}

CommandSequence encode_session(const RawSession& session, const Vocabulary& vocab) {
  CommandSequence seq;
  seq.user = session.user;
  seq.commands.reserve(session.events.size());
  seq.gaps.reserve(session.events.size());
  for (std::size_t i = 0; i < session.events.size(); ++i) {
    seq.commands.push_back(vocab.encode(session.events[i].command));
    seq.gaps.push_back(i == 0 ? 0.0 : std::max(0.0, session.events[i].ts - session.events[i - 1].ts));
  }
  return seq;
}

CommandSequence cap_repeats(const CommandSequence& seq, std::size_t max_repeat) {
  if (max_repeat == 0) throw ValidationError("max_repeat must be at least 1");
  CommandSequence out;
  out.user = seq.user;
  std::size_t run = 0;
  double carried = 0.0;
  for (std::size_t i = 0; i < seq.commands.size(); ++i) {
    run = (i > 0 && seq.commands[i] == seq.commands[i - 1]) ? run + 1 : 1;
    double gap = seq.has_gaps() ? seq.gaps[i] : 0.0;
    if (run > max_repeat) {
      carried += gap;
      continue;
    }
    out.commands.push_back(seq.commands[i]);
    if (seq.has_gaps()) out.gaps.push_back(gap + carried);
    carried = 0.0;
  }
  return out;
}

std::vector<CommandSequence> preprocess(const std::vector<CommandSequence>& sequences, std::size_t max_repeat,
                                        std::size_t target_len) {
  if (target_len < 2) throw ValidationError("target_len must be at least 2");
  std::vector<CommandSequence> out;
  for (const auto& s : sequences) {
    if (s.has_gaps() && s.gaps.size() != s.commands.size()) {
      throw ValidationError("sequence gaps and commands differ in length");
    }
    auto capped = cap_repeats(s, max_repeat);
    if (capped.size() < target_len) continue;
    out.push_back(capped.prefix(target_len));
  }
  return out;
}

std::vector<CommandSequence> preprocess(const std::vector<RawSession>& sessions, const Vocabulary& vocab,
                                        std::size_t max_repeat, std::size_t target_len) {
  std::vector<CommandSequence> encoded;
  encoded.reserve(sessions.size());
  for (const auto& s : sessions) encoded.push_back(encode_session(s, vocab));
  return preprocess(encoded, max_repeat, target_len);
}

HelpSplit label_help(const std::vector<CommandSequence>& sequences, const Vocabulary& vocab, std::size_t k) {
  if (k < 1) throw ValidationError("k must be at least 1");
  HelpSplit out;
  for (const auto& s : sequences) {
    auto it = std::find_if(s.commands.begin(), s.commands.end(), [&](CommandId c) { return vocab.is_help(c); });
    if (it == s.commands.end()) {
      out.rest.push_back(s);
      continue;
    }
    auto index = static_cast<std::size_t>(it - s.commands.begin());
    // The trimmed positive has `index` steps; online prediction needs k + 1.
    if (index < k + 1) {
      ++out.discarded;
      continue;
    }
    out.positives.push_back({s.prefix(index), HelpLabel::help});
  }
  return out;
}

std::vector<HelpExample> sample_negatives(const std::vector<CommandSequence>& rest, std::size_t n,
                                          std::uint64_t seed) {
  if (n > rest.size()) {
    throw InsufficientDataError("requested " + std::to_string(n) + " negatives but only " +
                                std::to_string(rest.size()) + " candidates exist");
  }
  std::vector<std::size_t> idx(rest.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto rng = make_rng(seed, 0x6e6567);
  // Partial Fisher-Yates: the first n slots are a uniform sample.
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  std::vector<HelpExample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back({rest[idx[i]], HelpLabel::no_help});
  return out;
}

std::vector<HelpExample> match_lengths(std::vector<HelpExample> negatives, const std::vector<HelpExample>& positives,
                                       std::uint64_t seed) {
  if (positives.empty()) return negatives;
  auto rng = make_rng(seed, 0x6c656e);
  std::uniform_int_distribution<std::size_t> pick(0, positives.size() - 1);
  for (auto& ex : negatives) {
    std::size_t len = positives[pick(rng)].sequence.size();
    if (len < ex.sequence.size()) ex.sequence = ex.sequence.prefix(len);
  }
  return negatives;
}

UserSplit split_by_user(const std::vector<CommandSequence>& sequences, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction <= 1.0)) throw ValidationError("test_fraction must lie in [0,1]");
  std::set<std::string> users;
  for (const auto& s : sequences) users.insert(s.user);
  if (users.size() < 2) throw ValidationError("user split needs at least 2 users");
  std::vector<std::string> order(users.begin(), users.end());
  std::shuffle(order.begin(), order.end(), make_rng(seed, 0x757372));
  auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(order.size())));
  UserSplit out;
  out.test_users.insert(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  out.train_users.insert(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  for (const auto& s : sequences) {
    (out.test_users.contains(s.user) ? out.test : out.train).push_back(s);
  }
  return out;
}

namespace {

std::vector<HelpExample> build_help_side(const std::vector<CommandSequence>& side, const Vocabulary& vocab,
                                         const PrepareOptions& opts, std::uint64_t seed, std::size_t& discarded) {
  auto split = label_help(side, vocab, opts.k);
  discarded += split.discarded;
  std::vector<HelpExample> out = std::move(split.positives);
  if (out.empty()) return out;
  if (split.rest.empty()) {
    throw InsufficientDataError("no sequences without help commands remain to sample negatives from");
  }
  std::size_t n = std::min(out.size() * opts.negatives_per_positive, split.rest.size());
  auto negatives = sample_negatives(split.rest, n, seed);
  if (opts.match_negative_lengths) negatives = match_lengths(std::move(negatives), out, seed);
  out.insert(out.end(), negatives.begin(), negatives.end());
  return out;
}

}  // namespace

PreparedCorpus prepare(const std::vector<CommandSequence>& sequences, const Vocabulary& vocab,
                       const PrepareOptions& opts) {
  if (sequences.empty()) throw EmptyCorpusError("no sequences survived preprocessing");
  auto split = split_by_user(sequences, opts.test_fraction, opts.seed);
  PreparedCorpus out;
  out.help_train = build_help_side(split.train, vocab, opts, splitmix64(opts.seed + 1), out.discarded_help);
  out.help_test = build_help_side(split.test, vocab, opts, splitmix64(opts.seed + 2), out.discarded_help);
  out.train = std::move(split.train);
  out.test = std::move(split.test);
  return out;
}

std::size_t longest_run(const std::vector<CommandId>& commands) {
  std::size_t best = 0, run = 0;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    run = (i > 0 && commands[i] == commands[i - 1]) ? run + 1 : 1;
    best = std::max(best, run);
  }
  return best;
}

}  // namespace taskrec::corpus
