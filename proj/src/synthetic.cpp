#include "taskrec/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace taskrec::corpus {

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

std::string padded(const char* prefix, std::size_t i, std::size_t width) {
  std::string digits = std::to_string(i);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return prefix + digits;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (num_tasks < 1) throw ValidationError("num_tasks must be at least 1");
  if (vocab_per_task < 2) throw ValidationError("vocab_per_task must be at least 2");
  if (docs < 1) throw ValidationError("docs must be at least 1");
  if (doc_length < 2) throw ValidationError("doc_length must be at least 2");
  if (!is_probability(task_mixing)) throw ValidationError("task_mixing must lie in [0,1]");
  if (!(transition_sharpness >= 0.0)) throw ValidationError("transition_sharpness must be >= 0");
  if (users < 1) throw ValidationError("users must be at least 1");
  if (!(mean_gap > 0.0) || !(max_gap > 0.0)) throw ValidationError("gap parameters must be positive");
  if (help) {
    const auto& h = *help;
    if (!is_probability(h.help_rate) || !is_probability(h.loop_rate) || !is_probability(h.pause_rate)) {
      throw ValidationError("help injection rates must lie in [0,1]");
    }
    if (h.help_commands < 1) throw ValidationError("help_commands must be at least 1");
    if (h.loop_repeats < 1) throw ValidationError("loop_repeats must be at least 1");
    if (!(h.pause_min <= h.pause_max) || !(h.pause_min > max_gap)) {
      throw ValidationError("pause range must lie above max_gap");
    }
    std::size_t loop_span = 2 * h.loop_repeats;
    if (h.min_context + 1 >= doc_length) throw ValidationError("doc_length too short for the help min_context");
    if (loop_span + 1 > h.min_context + 1 || h.pause_steps > h.min_context) {
      throw ValidationError("loop or pause span does not fit before the earliest help position");
    }
  }
}

nlohmann::json SyntheticSpec::to_json() const {
  nlohmann::json j{{"num_tasks", num_tasks},
                   {"vocab_per_task", vocab_per_task},
                   {"docs", docs},
                   {"doc_length", doc_length},
                   {"task_mixing", task_mixing},
                   {"transition_sharpness", std::isinf(transition_sharpness) ? nlohmann::json("inf")
                                                                             : nlohmann::json(transition_sharpness)},
                   {"users", users},
                   {"mean_gap", mean_gap},
                   {"max_gap", max_gap}};
  if (help) {
    j["help"] = {{"help_rate", help->help_rate},       {"loop_rate", help->loop_rate},
                 {"pause_rate", help->pause_rate},     {"loop_repeats", help->loop_repeats},
                 {"pause_steps", help->pause_steps},   {"pause_min", help->pause_min},
                 {"pause_max", help->pause_max},       {"min_context", help->min_context},
                 {"help_commands", help->help_commands}};
  }
  return j;
}

SyntheticSpec SyntheticSpec::from_json(const nlohmann::json& j) {
  SyntheticSpec s;
  try {
    s.num_tasks = j.value("num_tasks", s.num_tasks);
    s.vocab_per_task = j.value("vocab_per_task", s.vocab_per_task);
    s.docs = j.value("docs", s.docs);
    s.doc_length = j.value("doc_length", s.doc_length);
    s.task_mixing = j.value("task_mixing", s.task_mixing);
    if (j.contains("transition_sharpness")) {
      const auto& t = j.at("transition_sharpness");
      s.transition_sharpness = t.is_string() && t.get<std::string>() == "inf"
                                   ? std::numeric_limits<double>::infinity()
                                   : t.get<double>();
    }
    s.users = j.value("users", s.users);
    s.mean_gap = j.value("mean_gap", s.mean_gap);
    s.max_gap = j.value("max_gap", s.max_gap);
    if (j.contains("help") && !j.at("help").is_null()) {
      const auto& h = j.at("help");
      HelpInjection hi;
      hi.help_rate = h.value("help_rate", hi.help_rate);
      hi.loop_rate = h.value("loop_rate", hi.loop_rate);
      hi.pause_rate = h.value("pause_rate", hi.pause_rate);
      hi.loop_repeats = h.value("loop_repeats", hi.loop_repeats);
      hi.pause_steps = h.value("pause_steps", hi.pause_steps);
      hi.pause_min = h.value("pause_min", hi.pause_min);
      hi.pause_max = h.value("pause_max", hi.pause_max);
      hi.min_context = h.value("min_context", hi.min_context);
      hi.help_commands = h.value("help_commands", hi.help_commands);
      s.help = hi;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed synthetic spec: ") + e.what());
  }
  s.validate();
  return s;
}

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  const std::size_t V = spec.vocab_per_task;
  const std::size_t T = spec.num_tasks;
  const std::size_t task_vocab = V * T;
  const std::size_t n_help = spec.help ? spec.help->help_commands : 0;

  const std::size_t width = std::max<std::size_t>(3, std::to_string(task_vocab).size());
  std::vector<std::string> names, help_names;
  for (std::size_t i = 0; i < task_vocab; ++i) names.push_back(padded("cmd_", i, width));
  for (std::size_t i = 0; i < n_help; ++i) help_names.push_back(padded("help_", i, 2));
  names.insert(names.end(), help_names.begin(), help_names.end());

  SyntheticCorpus out;
  out.vocab = Vocabulary::build(names, help_names);
  out.vocab_per_task = V;

  auto rng = make_rng(seed, 0x73796e);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // One Hamiltonian cycle per task gives every command a distinct successor.
  out.successors.resize(T);
  for (std::size_t z = 0; z < T; ++z) {
    std::vector<CommandId> order(V);
    std::iota(order.begin(), order.end(), static_cast<CommandId>(z * V));
    std::shuffle(order.begin(), order.end(), rng);
    out.successors[z].resize(V);
    for (std::size_t i = 0; i < V; ++i) out.successors[z][order[i] - z * V] = order[(i + 1) % V];
  }

  const double s = spec.transition_sharpness;
  const double p_successor = std::isinf(s) ? 1.0 : (1.0 + s) / (static_cast<double>(V) - 1.0 + s);

  auto next_in_task = [&](std::size_t z, CommandId state) -> CommandId {
    CommandId succ = out.successors[z][state - z * V];
    if (V == 2 || unit(rng) < p_successor) return succ;
    // Uniform over the slice minus the current command and its successor.
    std::uniform_int_distribution<std::size_t> pick(0, V - 3);
    std::size_t r = pick(rng);
    for (std::size_t j = 0; j < V; ++j) {
      auto c = static_cast<CommandId>(z * V + j);
      if (c == state || c == succ) continue;
      if (r-- == 0) return c;
    }
    return succ;
  };

  std::exponential_distribution<double> gap_dist(1.0 / spec.mean_gap);
  auto normal_gap = [&]() { return std::min(gap_dist(rng), spec.max_gap); };

  std::uniform_int_distribution<std::size_t> pick_task(0, T - 1);
  std::uniform_int_distribution<std::size_t> pick_local(0, V - 1);
  const std::size_t user_width = std::max<std::size_t>(4, std::to_string(spec.users).size());

  for (std::size_t d = 0; d < spec.docs; ++d) {
    const std::size_t z = pick_task(rng);
    CommandSequence seq;
    seq.user = padded("user_", d % spec.users, user_width);

    bool struggle = false, loop = false, pause = false;
    std::size_t help_at = 0;
    if (spec.help) {
      const auto& h = *spec.help;
      struggle = unit(rng) < h.help_rate;
      if (struggle) {
        std::uniform_int_distribution<std::size_t> pick_pos(h.min_context + 1, spec.doc_length - 1);
        help_at = pick_pos(rng);
        loop = unit(rng) < h.loop_rate;
        pause = unit(rng) < h.pause_rate;
        if (!loop && !pause) (unit(rng) < 0.5 ? loop : pause) = true;
      }
    }
    const std::size_t loop_len = spec.help ? 2 * spec.help->loop_repeats : 0;
    const std::size_t loop_begin = loop ? help_at - loop_len : 0;
    const std::size_t pause_begin = pause ? help_at - spec.help->pause_steps : 0;

    CommandId state = static_cast<CommandId>(z * V + pick_local(rng));
    CommandId loop_a = 0, loop_b = 0;
    for (std::size_t t = 0; t < spec.doc_length; ++t) {
      CommandId emit;
      if (struggle && t == help_at) {
        std::uniform_int_distribution<std::size_t> pick_help(0, n_help - 1);
        emit = static_cast<CommandId>(task_vocab + pick_help(rng));
      } else if (loop && t >= loop_begin && t < help_at) {
        if (t == loop_begin) {
          loop_a = next_in_task(z, state);
          loop_b = out.successors[z][loop_a - z * V];
        }
        emit = ((t - loop_begin) % 2 == 0) ? loop_a : loop_b;
        state = emit;
      } else if (t == 0) {
        emit = state;
      } else if (T > 1 && unit(rng) < spec.task_mixing) {
        CommandId prev = seq.commands.back();
        do {
          std::size_t other = pick_task(rng);
          while (other == z) other = pick_task(rng);
          emit = static_cast<CommandId>(other * V + pick_local(rng));
        } while (emit == prev);
      } else {
        state = next_in_task(z, state);
        emit = state;
      }
      seq.commands.push_back(emit);
      double gap = 0.0;
      if (t > 0) {
        gap = normal_gap();
        if (pause && t >= pause_begin && t < help_at) {
          std::uniform_real_distribution<double> pause_dist(spec.help->pause_min, spec.help->pause_max);
          gap = pause_dist(rng);
        }
      }
      seq.gaps.push_back(gap);
    }
    out.sequences.push_back(std::move(seq));
    out.task_labels.push_back(z);
    out.struggling.push_back(struggle);
  }
  return out;
}

std::string to_event_log(const SyntheticCorpus& corpus, double start_ts) {
  std::string buf;
  for (std::size_t d = 0; d < corpus.sequences.size(); ++d) {
    const auto& s = corpus.sequences[d];
    double ts = start_ts + 100000.0 * static_cast<double>(d);
    for (std::size_t t = 0; t < s.size(); ++t) {
      if (s.has_gaps()) ts += s.gaps[t];
      nlohmann::json j{{"user", s.user},
                       {"session", "s" + std::to_string(d)},
                       {"command", corpus.vocab.name(s.commands[t])},
                       {"ts", ts}};
      buf += j.dump() + "\n";
    }
  }
  return buf;
}

}  // namespace taskrec::corpus
