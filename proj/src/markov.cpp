#include "taskrec/markov.hpp"

#include <algorithm>
#include <sstream>

namespace taskrec::markov {

std::vector<double> laplace(std::span<const std::uint64_t> counts, std::uint64_t total) {
  const double denom = static_cast<double>(total) + static_cast<double>(counts.size());
  std::vector<double> out(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) out[i] = (static_cast<double>(counts[i]) + 1.0) / denom;
  return out;
}

namespace {

void check_corpus(const std::vector<CommandSequence>& train, std::size_t vocab_size) {
  if (vocab_size == 0) throw ValidationError("vocabulary is empty");
  for (const auto& s : train) {
    for (CommandId c : s.commands) {
      if (c >= vocab_size) throw ValidationError("command id " + std::to_string(c) + " outside vocabulary");
    }
  }
}

void check_prefix(std::span<const CommandId> prefix, std::size_t vocab_size) {
  for (CommandId c : prefix) {
    if (c >= vocab_size) throw ValidationError("command id " + std::to_string(c) + " outside vocabulary");
  }
}

nlohmann::json sparse_counts(const std::vector<std::uint64_t>& counts) {
  auto arr = nlohmann::json::array();
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] != 0) arr.push_back({i, counts[i]});
  }
  return arr;
}

PstNode node_from_sparse(const nlohmann::json& arr, std::size_t vocab_size) {
  PstNode node;
  node.counts.assign(vocab_size, 0);
  for (const auto& pair : arr) {
    auto id = pair.at(0).get<std::size_t>();
    if (id >= vocab_size) throw ValidationError("suffix tree count index out of range");
    node.counts[id] = pair.at(1).get<std::uint64_t>();
    node.total += node.counts[id];
  }
  return node;
}

}  // namespace

// ---------------------------------------------------------------------------
// FirstOrderModel

FirstOrderModel::FirstOrderModel(std::size_t vocab_size)
    : vocab_size_(vocab_size), counts_(vocab_size * vocab_size, 0), row_totals_(vocab_size, 0) {}

FirstOrderModel FirstOrderModel::fit(const std::vector<CommandSequence>& train, std::size_t vocab_size) {
  check_corpus(train, vocab_size);
  FirstOrderModel m(vocab_size);
  for (const auto& s : train) {
    for (std::size_t t = 1; t < s.commands.size(); ++t) {
      ++m.counts_[s.commands[t - 1] * vocab_size + s.commands[t]];
      ++m.row_totals_[s.commands[t - 1]];
    }
  }
  return m;
}

std::vector<double> FirstOrderModel::predict_next(CommandId last) const {
  if (last >= vocab_size_) throw ValidationError("command id outside vocabulary");
  return laplace(std::span(counts_).subspan(last * vocab_size_, vocab_size_), row_totals_[last]);
}

std::vector<double> FirstOrderModel::predict(std::span<const CommandId> prefix) const {
  if (prefix.empty()) return std::vector<double>(vocab_size_, 1.0 / static_cast<double>(vocab_size_));
  return predict_next(prefix.back());
}

nlohmann::json FirstOrderModel::to_json() const {
  return nlohmann::json{{"format", "taskrec-firstmm"}, {"version", 1},        {"vocab_size", vocab_size_},
                        {"vocab_hash", vocab_hash},    {"counts", counts_}};
}

FirstOrderModel FirstOrderModel::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "taskrec-firstmm") throw ValidationError("not a FirstMM model file");
    FirstOrderModel m(j.at("vocab_size").get<std::size_t>());
    m.vocab_hash = j.at("vocab_hash").get<std::string>();
    m.counts_ = j.at("counts").get<std::vector<std::uint64_t>>();
    if (m.counts_.size() != m.vocab_size_ * m.vocab_size_) throw ValidationError("FirstMM count matrix has wrong size");
    for (std::size_t a = 0; a < m.vocab_size_; ++a) {
      for (std::size_t b = 0; b < m.vocab_size_; ++b) m.row_totals_[a] += m.counts_[a * m.vocab_size_ + b];
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed FirstMM model: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// SuffixTree

SuffixTree SuffixTree::empty(std::size_t vocab_size, const PstOptions& opts) {
  SuffixTree tree;
  tree.vocab_size_ = vocab_size;
  tree.opts_ = opts;
  tree.nodes_[Context{}] = PstNode{std::vector<std::uint64_t>(vocab_size, 0), 0};
  return tree;
}

SuffixTree SuffixTree::fit(const std::vector<CommandSequence>& train, std::size_t vocab_size, const PstOptions& opts) {
  if (opts.max_depth < 1) throw ValidationError("max_depth must be at least 1");
  check_corpus(train, vocab_size);
  SuffixTree tree = empty(vocab_size, opts);

  // Pass 1: how often each context is followed by a next command.
  std::map<Context, std::uint64_t> occurrences;
  for (const auto& s : train) {
    const auto& c = s.commands;
    for (std::size_t t = 1; t < c.size(); ++t) {
      const std::size_t longest = std::min(opts.max_depth, t);
      for (std::size_t len = 1; len <= longest; ++len) ++occurrences[Context(c.begin() + (t - len), c.begin() + t)];
    }
  }
  for (const auto& [ctx, n] : occurrences) {
    if (meets_threshold(n, opts.min_count)) {
      tree.nodes_[ctx] = PstNode{std::vector<std::uint64_t>(vocab_size, 0), 0};
    }
  }

  // Pass 2: next-command counts for surviving contexts; the root sees every position.
  PstNode& root = tree.nodes_.at(Context{});
  Context key;
  for (const auto& s : train) {
    const auto& c = s.commands;
    for (std::size_t t = 0; t < c.size(); ++t) {
      ++root.counts[c[t]];
      ++root.total;
      const std::size_t longest = std::min(opts.max_depth, t);
      for (std::size_t len = 1; len <= longest; ++len) {
        key.assign(c.begin() + (t - len), c.begin() + t);
        auto it = tree.nodes_.find(key);
        // Contexts are nested, so once a suffix is missing the longer ones are too.
        if (it == tree.nodes_.end()) break;
        ++it->second.counts[c[t]];
        ++it->second.total;
      }
    }
  }
  return tree;
}

const PstNode* SuffixTree::find(std::span<const CommandId> context) const {
  auto it = nodes_.find(Context(context.begin(), context.end()));
  return it == nodes_.end() ? nullptr : &it->second;
}

std::span<const CommandId> SuffixTree::matched_context(std::span<const CommandId> prefix) const {
  check_prefix(prefix, vocab_size_);
  for (std::size_t len = std::min(opts_.max_depth, prefix.size()); len >= 1; --len) {
    auto ctx = prefix.last(len);
    if (find(ctx) != nullptr) return ctx;
  }
  return {};
}

std::vector<double> SuffixTree::predict(std::span<const CommandId> prefix) const {
  const PstNode* node = find(matched_context(prefix));
  return laplace(node->counts, node->total);
}

std::string SuffixTree::dump(const Vocabulary* vocab, std::size_t top) const {
  std::map<Context, std::vector<Context>> children;
  for (const auto& [ctx, node] : nodes_) {
    if (!ctx.empty()) children[Context(ctx.begin() + 1, ctx.end())].push_back(ctx);
  }
  auto label = [&](CommandId c) { return vocab ? vocab->name(c) : std::to_string(c); };
  std::ostringstream out;
  out << "# PST max_depth=" << opts_.max_depth << " min_count=" << opts_.min_count << " nodes=" << nodes_.size()
      << "\n";
  auto visit = [&](auto&& self, const Context& ctx) -> void {
    const PstNode& node = nodes_.at(ctx);
    out << std::string(2 * ctx.size(), ' ');
    if (ctx.empty()) {
      out << "(null)";
    } else {
      // Printed most recent first, the order a lookup walks the tree.
      out << label(ctx.back());
      for (std::size_t i = ctx.size() - 1; i-- > 0;) out << " <- " << label(ctx[i]);
    }
    out << "  n=" << node.total << "  next:";
    auto probs = laplace(node.counts, node.total);
    for (const auto& [id, p] : top_n(probs, top)) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", p);
      out << " " << label(id) << "=" << buf;
    }
    out << "\n";
    if (auto it = children.find(ctx); it != children.end()) {
      for (const auto& child : it->second) self(self, child);
    }
  };
  visit(visit, Context{});
  return out.str();
}

nlohmann::json SuffixTree::to_json() const {
  auto nodes = nlohmann::json::array();
  for (const auto& [ctx, node] : nodes_) nodes.push_back({{"context", ctx}, {"counts", sparse_counts(node.counts)}});
  return nlohmann::json{{"format", "taskrec-pst"},         {"version", 1},
                        {"vocab_size", vocab_size_},       {"vocab_hash", vocab_hash},
                        {"max_depth", opts_.max_depth},    {"min_count", opts_.min_count},
                        {"nodes", std::move(nodes)}};
}

SuffixTree SuffixTree::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "taskrec-pst") throw ValidationError("not a PST model file");
    PstOptions opts{j.at("max_depth").get<std::size_t>(), j.at("min_count").get<std::uint64_t>()};
    SuffixTree tree = empty(j.at("vocab_size").get<std::size_t>(), opts);
    tree.vocab_hash = j.at("vocab_hash").get<std::string>();
    for (const auto& n : j.at("nodes")) {
      auto ctx = n.at("context").get<Context>();
      if (ctx.size() > opts.max_depth) throw ValidationError("suffix tree node deeper than max_depth");
      tree.nodes_[ctx] = node_from_sparse(n.at("counts"), tree.vocab_size_);
    }
    for (const auto& [ctx, node] : tree.nodes_) {
      if (!ctx.empty() && !tree.nodes_.contains(Context(ctx.begin() + 1, ctx.end()))) {
        throw ValidationError("suffix tree node without parent");
      }
    }
    return tree;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed PST model: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// TaskPstEnsemble

TaskPstEnsemble TaskPstEnsemble::fit(const std::vector<CommandSequence>& train,
                                     std::shared_ptr<const topics::BitermModel> btm, const PstOptions& opts) {
  if (!btm) throw ValidationError("TaskPST needs a fitted topic model");
  const std::size_t K = btm->K();
  const std::size_t C = btm->vocab_size;
  std::vector<std::vector<CommandSequence>> shards(K);
  for (const auto& s : train) {
    auto w = topics::infer_task_distribution(*btm, s.commands);
    shards[w.argmax()].push_back(s);
  }
  TaskPstEnsemble ens;
  ens.btm_ = std::move(btm);
  ens.trees_.reserve(K);
  for (auto& shard : shards) {
    ens.trees_.push_back(shard.empty() ? SuffixTree::empty(C, opts) : SuffixTree::fit(shard, C, opts));
  }
  return ens;
}

std::vector<double> TaskPstEnsemble::predict_with(std::span<const CommandId> prefix,
                                                  std::span<const double> weights) const {
  if (weights.size() != trees_.size()) throw ValidationError("task weight dimension mismatch");
  std::vector<double> out(vocab_size(), 0.0);
  for (std::size_t z = 0; z < trees_.size(); ++z) {
    if (weights[z] == 0.0) continue;
    auto p = trees_[z].predict(prefix);
    for (std::size_t w = 0; w < out.size(); ++w) out[w] += weights[z] * p[w];
  }
  return out;
}

std::vector<double> TaskPstEnsemble::predict(std::span<const CommandId> prefix) const {
  auto w = topics::infer_task_distribution(*btm_, prefix);
  return predict_with(prefix, w.p);
}

nlohmann::json TaskPstEnsemble::to_json() const {
  auto trees = nlohmann::json::array();
  for (const auto& t : trees_) trees.push_back(t.to_json());
  return nlohmann::json{{"format", "taskrec-taskpst"},
                        {"version", 1},
                        {"vocab_hash", vocab_hash},
                        {"btm", btm_->to_json()},
                        {"trees", std::move(trees)}};
}

TaskPstEnsemble TaskPstEnsemble::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "taskrec-taskpst") throw ValidationError("not a TaskPST model file");
    TaskPstEnsemble ens;
    ens.vocab_hash = j.at("vocab_hash").get<std::string>();
    ens.btm_ = std::make_shared<topics::BitermModel>(topics::BitermModel::from_json(j.at("btm")));
    for (const auto& t : j.at("trees")) ens.trees_.push_back(SuffixTree::from_json(t));
    if (ens.trees_.size() != ens.btm_->K()) throw ValidationError("TaskPST tree count differs from K");
    return ens;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed TaskPST model: ") + e.what());
  }
}

}  // namespace taskrec::markov
