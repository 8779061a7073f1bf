#include "taskrec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "taskrec/recommender_net.hpp"

namespace taskrec::eval {

bool in_top_k(std::span<const double> probs, CommandId truth, std::size_t k) {
  if (truth >= probs.size()) return false;
  const double p = probs[truth];
  std::size_t ahead = 0;
  for (std::size_t j = 0; j < probs.size() && ahead < k; ++j) {
    if (probs[j] > p || (probs[j] == p && j < truth)) ++ahead;
  }
  return ahead < k;
}

namespace {

std::vector<std::vector<std::vector<double>>> all_steps(const Recommender& model,
                                                        const std::vector<CommandSequence>& test) {
  if (const auto* net = dynamic_cast<const neural::RecommenderNet*>(&model)) {
    std::vector<std::span<const CommandId>> spans;
    spans.reserve(test.size());
    for (const auto& s : test) spans.emplace_back(s.commands);
    return net->predict_steps_batch(spans);
  }
  std::vector<std::vector<std::vector<double>>> out;
  out.reserve(test.size());
  for (const auto& s : test) out.push_back(model.predict_steps(s.commands));
  return out;
}

struct Hits {
  std::vector<std::size_t> hits;
  std::size_t points = 0;
};

Hits count_hits(const Recommender& model, const std::vector<CommandSequence>& test, std::span<const std::size_t> ks,
                std::size_t t_min) {
  if (test.empty()) throw ValidationError("test set is empty");
  Hits h;
  h.hits.assign(ks.size(), 0);
  const auto steps = all_steps(model, test);
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto& cmds = test[i].commands;
    for (std::size_t t = t_min; t + 1 < cmds.size(); ++t) {
      ++h.points;
      for (std::size_t j = 0; j < ks.size(); ++j) {
        if (in_top_k(steps[i][t], cmds[t + 1], ks[j])) ++h.hits[j];
      }
    }
  }
  if (h.points == 0) throw ValidationError("test set has no evaluation points");
  return h;
}

}  // namespace

double topk_accuracy(const Recommender& model, const std::vector<CommandSequence>& test, std::size_t k,
                     std::size_t t_min) {
  if (k == 0) throw ValidationError("k must be at least 1");
  const std::size_t ks[] = {k};
  const Hits h = count_hits(model, test, ks, t_min);
  return static_cast<double>(h.hits[0]) / static_cast<double>(h.points);
}

TopK topk_accuracies(const Recommender& model, const std::vector<CommandSequence>& test, std::size_t t_min) {
  const std::size_t ks[] = {1, 5};
  const Hits h = count_hits(model, test, ks, t_min);
  const auto n = static_cast<double>(h.points);
  return {static_cast<double>(h.hits[0]) / n, static_cast<double>(h.hits[1]) / n, h.points};
}

PrecisionRecall precision_recall(std::span<const double> scores, std::span<const int> labels, double threshold) {
  if (scores.size() != labels.size()) throw ValidationError("scores and labels differ in length");
  std::size_t tp = 0, fp = 0, pos = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i]) ++pos;
    if (predicted && labels[i]) ++tp;
    if (predicted && !labels[i]) ++fp;
  }
  if (pos == 0) throw ValidationError("recall is undefined without positive labels");
  PrecisionRecall pr;
  pr.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  pr.recall = static_cast<double>(tp) / static_cast<double>(pos);
  return pr;
}

double auroc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ValidationError("scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Rank-sum of the positives with average ranks over tied groups.
  double rank_sum = 0.0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t m = i; m < j; ++m) {
      if (labels[order[m]]) {
        rank_sum += avg_rank;
        ++pos;
      }
    }
    i = j;
  }
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) throw ValidationError("AU-ROC needs both classes");
  const double p = static_cast<double>(pos);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  s.values = values;
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return s;
}

const ReportRow& EvalReport::row(const std::string& model) const {
  for (const auto& r : rows) {
    if (r.model == model) return r;
  }
  throw ValidationError("report has no row for model '" + model + "'");
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json models = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json metrics = nlohmann::json::object();
    for (const auto& [name, s] : r.metrics) metrics[name] = {{"mean", s.mean}, {"std", s.std}, {"values", s.values}};
    models.push_back({{"model", r.model}, {"metrics", metrics}});
  }
  return {{"kind", kind}, {"runs", runs}, {"fingerprint", fingerprint}, {"models", models}};
}

namespace {

std::string cell(const Summary& s, bool with_std) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(with_std ? 2 : 3) << s.mean;
  if (with_std) os << " ± " << std::setprecision(2) << s.std;
  return os.str();
}

// Display width, counting each UTF-8 code point once.
std::size_t width(const std::string& s) {
  std::size_t w = 0;
  for (unsigned char c : s) w += (c & 0xC0) != 0x80;
  return w;
}

std::string pad(const std::string& s, std::size_t w) { return s + std::string(w > width(s) ? w - width(s) : 0, ' '); }

std::string render(const std::vector<std::vector<std::string>>& grid) {
  std::vector<std::size_t> widths;
  for (const auto& line : grid) {
    widths.resize(std::max(widths.size(), line.size()), 0);
    for (std::size_t c = 0; c < line.size(); ++c) widths[c] = std::max(widths[c], width(line[c]));
  }
  std::ostringstream os;
  for (std::size_t r = 0; r < grid.size(); ++r) {
    for (std::size_t c = 0; c < grid[r].size(); ++c) {
      if (c) os << " | ";
      os << pad(grid[r][c], widths[c]);
    }
    os << '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (std::size_t c = 0; c < widths.size(); ++c) total += widths[c] + (c ? 3 : 0);
      os << std::string(total, '-') << '\n';
    }
  }
  return os.str();
}

}  // namespace

std::string EvalReport::table() const {
  std::vector<std::vector<std::string>> grid;
  const bool with_std = runs > 1;
  if (kind == "recommendation") {
    std::vector<std::string> header{"Accuracy"};
    for (const auto& r : rows) header.push_back(r.model);
    grid.push_back(header);
    for (const auto& [label, key] : {std::pair{"Top 1", "top1"}, std::pair{"Top 5", "top5"}}) {
      std::vector<std::string> line{label};
      for (const auto& r : rows) {
        auto it = r.metrics.find(key);
        line.push_back(it == r.metrics.end() ? "-" : cell(it->second, with_std));
      }
      grid.push_back(line);
    }
  } else {
    grid.push_back({"Help Prediction Models", "Precision", "Recall", "AU-ROC"});
    for (const auto& r : rows) {
      std::vector<std::string> line{r.model};
      for (const char* key : {"precision", "recall", "auroc"}) {
        auto it = r.metrics.find(key);
        line.push_back(it == r.metrics.end() ? "-" : cell(it->second, true));
      }
      grid.push_back(line);
    }
  }
  std::string out = render(grid);
  out += "runs: " + std::to_string(runs);
  if (!fingerprint.empty()) out += "  config: " + fingerprint;
  out += '\n';
  return out;
}

EvalReport run_trials(const std::function<TrialMetrics(std::uint64_t)>& trial, std::size_t n, std::uint64_t seed,
                      const std::string& kind, const std::vector<std::string>& model_order,
                      const std::string& fingerprint) {
  if (n == 0) throw ValidationError("run count must be at least 1");
  std::map<std::string, std::map<std::string, std::vector<double>>> collected;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t s = seed + i;
    TrialMetrics m;
    try {
      m = trial(s);
    } catch (const TrialError&) {
      throw;
    } catch (const std::exception& e) {
      throw TrialError(s, e.what());
    }
    for (const auto& [model, metrics] : m) {
      for (const auto& [name, value] : metrics) collected[model][name].push_back(value);
    }
  }

  EvalReport report;
  report.kind = kind;
  report.runs = n;
  report.fingerprint = fingerprint;
  std::vector<std::string> names;
  for (const auto& m : model_order) {
    if (collected.count(m)) names.push_back(m);
  }
  for (const auto& [m, _] : collected) {
    if (std::find(names.begin(), names.end(), m) == names.end()) names.push_back(m);
  }
  for (const auto& m : names) {
    ReportRow row{m, {}};
    for (const auto& [metric, values] : collected[m]) {
      if (values.size() != n) {
        throw Error("model '" + m + "' reported '" + metric + "' in " + std::to_string(values.size()) + " of " +
                    std::to_string(n) + " runs");
      }
      row.metrics[metric] = summarize(values);
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string fingerprint(const nlohmann::json& config, const std::vector<std::string>& inputs) {
  std::uint64_t h = fnv1a(config.dump());
  for (const auto& in : inputs) h = fnv1a(hex64(fnv1a(in)), h);
  return hex64(h);
}

const std::vector<std::string>& recommender_order() {
  static const std::vector<std::string> order{"FirstMM", "PST", "TaskPST", "vRNN", "TaskRNN", "JTC-RNN"};
  return order;
}

const std::vector<std::string>& help_order() {
  static const std::vector<std::string> order{"Random Forest (Commands only)", "Random Forest (Time ⊕ Commands)",
                                              "LSTM Classifier (Commands only)", "LSTM Classifier (Time ⊕ Commands)"};
  return order;
}

}  // namespace taskrec::eval
