// Acceptance harness: one PASS/FAIL line per criterion; exit status 1 if any fail.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "taskrec/corpus_io.hpp"
#include "taskrec/eval.hpp"
#include "taskrec/experiment.hpp"
#include "taskrec/model_io.hpp"

using namespace taskrec;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

using corpus::CommandSequence;

std::vector<CommandSequence> random_corpus(std::size_t n, std::size_t len, std::size_t V, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::uniform_int_distribution<CommandId> pick(0, static_cast<CommandId>(V - 1));
  std::vector<CommandSequence> out;
  for (std::size_t i = 0; i < n; ++i) {
    CommandSequence s{"u" + std::to_string(i % 20), {}, {}};
    for (std::size_t t = 0; t < len; ++t) {
      s.commands.push_back(pick(rng));
      s.gaps.push_back(t == 0 ? 0.0 : static_cast<double>(pick(rng)));
    }
    out.push_back(s);
  }
  return out;
}

// Next-command counts after every occurrence of `ctx`, by direct scan.
std::vector<std::uint64_t> scan_counts(const std::vector<CommandSequence>& docs, const std::vector<CommandId>& ctx,
                                       std::size_t V) {
  std::vector<std::uint64_t> counts(V, 0);
  for (const auto& d : docs) {
    const auto& c = d.commands;
    for (std::size_t t = ctx.size(); t < c.size(); ++t) {
      if (std::equal(ctx.begin(), ctx.end(), c.begin() + static_cast<std::ptrdiff_t>(t - ctx.size()))) ++counts[c[t]];
    }
  }
  return counts;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// ------------------------------------------------------------ 1

void counting_oracle(Outcome& o) {
  const std::size_t V = 10;
  const auto docs = random_corpus(200, 21, V, 101);

  const auto mm = markov::FirstOrderModel::fit(docs, V);
  double worst = 0.0;
  bool counts_equal = true;
  for (CommandId a = 0; a < V; ++a) {
    const auto expected = scan_counts(docs, {a}, V);
    std::uint64_t total = 0;
    for (CommandId b = 0; b < V; ++b) {
      counts_equal &= mm.count(a, b) == expected[b];
      total += expected[b];
    }
    const auto probs = mm.predict_next(a);
    for (CommandId b = 0; b < V; ++b) {
      worst = std::max(worst, std::abs(probs[b] - (expected[b] + 1.0) / (static_cast<double>(total) + V)));
    }
  }
  o.require(counts_equal, "FirstMM counts");

  const auto tree = markov::SuffixTree::fit(docs, V, {3, 1});
  std::set<std::vector<CommandId>> contexts;
  for (const auto& d : docs) {
    for (std::size_t t = 1; t < d.size(); ++t) {
      for (std::size_t len = 1; len <= std::min<std::size_t>(3, t); ++len) {
        contexts.emplace(d.commands.begin() + static_cast<std::ptrdiff_t>(t - len),
                         d.commands.begin() + static_cast<std::ptrdiff_t>(t));
      }
    }
  }
  contexts.insert(std::vector<CommandId>{});
  bool nodes_equal = tree.nodes().size() == contexts.size();
  std::size_t mismatched = 0;
  for (const auto& ctx : contexts) {
    const auto* node = tree.find(ctx);
    if (!node) {
      nodes_equal = false;
      continue;
    }
    // The root counts every position, including each first command.
    std::vector<std::uint64_t> expected(V, 0);
    if (ctx.empty()) {
      for (const auto& d : docs) {
        for (CommandId c : d.commands) ++expected[c];
      }
    } else {
      expected = scan_counts(docs, ctx, V);
    }
    if (node->counts != expected) ++mismatched;
    nodes_equal &= node->counts == expected;
    std::uint64_t total = 0;
    for (auto c : expected) total += c;
    const auto probs = markov::laplace(node->counts, node->total);
    for (std::size_t w = 0; w < V; ++w) {
      worst = std::max(worst, std::abs(probs[w] - (expected[w] + 1.0) / (static_cast<double>(total) + V)));
    }
  }
  o.require(nodes_equal, "PST node counts");
  o.require(worst <= 1e-12, "normalized values within 1e-12");
  o.detail << "PST nodes=" << tree.nodes().size() << " observed contexts=" << contexts.size()
           << " mismatched=" << mismatched << " max|dp|=" << worst;
}

// ------------------------------------------------------------ 2

std::shared_ptr<topics::BitermModel> single_topic(std::size_t V) {
  auto m = std::make_shared<topics::BitermModel>();
  m->vocab_size = V;
  m->config.K = 1;
  m->theta = {1.0};
  m->phi = {std::vector<double>(V, 1.0 / static_cast<double>(V))};
  return m;
}

double net_reduction_gap(neural::Variant variant, const std::vector<CommandSequence>& probe, std::size_t V) {
  neural::NetConfig c;
  c.variant = variant;
  c.vocab_size = V;
  c.K = 1;
  c.embed_dim = 8;
  c.hidden_dim = 16;
  c.layers = 2;
  c.init_scale = 0.3;
  c.seed = 9;
  neural::RecommenderNet task(c, single_topic(V));
  neural::NetConfig vc = c;
  vc.variant = neural::Variant::vanilla;
  neural::RecommenderNet vanilla(vc);
  vanilla.embedding.value = task.embedding.value;
  vanilla.out_w.value = task.out_w.value;
  vanilla.out_b.value = task.out_b.value;
  for (std::size_t l = 0; l < task.main.num_layers(); ++l) {
    const auto& w = task.main.layer(l).weights.value;
    auto& vw = vanilla.main.layer(l).weights.value;
    vanilla.main.layer(l).bias.value = task.main.layer(l).bias.value;
    if (l == 0) {
      // The side channel is the constant 1; its column becomes part of the bias.
      const auto E = static_cast<Eigen::Index>(c.embed_dim);
      vw.leftCols(E) = w.leftCols(E);
      vw.rightCols(vw.cols() - E) = w.rightCols(w.cols() - E - 1);
      vanilla.main.layer(l).bias.value += w.col(E);
    } else {
      vw = w;
    }
  }
  double worst = 0.0;
  for (const auto& d : probe) {
    const auto a = task.predict_steps(d.commands);
    const auto b = vanilla.predict_steps(d.commands);
    for (std::size_t t = 0; t < a.size(); ++t) worst = std::max(worst, max_abs_diff(a[t], b[t]));
  }
  return worst;
}

void reductions(Outcome& o) {
  const std::size_t V = 10;
  const auto docs = random_corpus(200, 21, V, 202);
  const auto probe = random_corpus(30, 21, V, 203);

  const auto mm = markov::FirstOrderModel::fit(docs, V);
  const auto pst1 = markov::SuffixTree::fit(docs, V, {1, 1});
  bool same = true;
  for (const auto& d : probe) {
    for (std::size_t t = 1; t <= d.size(); ++t) {
      const auto p = std::span<const CommandId>(d.commands).first(t);
      same &= mm.predict(p) == pst1.predict(p);
    }
  }
  o.require(same, "PST(depth 1, min_count 1) == FirstMM");

  const markov::PstOptions opts{10, 7};
  const auto pst = markov::SuffixTree::fit(docs, V, opts);
  const auto ens = markov::TaskPstEnsemble::fit(docs, single_topic(V), opts);
  bool same_k1 = true;
  for (const auto& d : probe) {
    for (std::size_t t = 0; t <= d.size(); ++t) {
      const auto p = std::span<const CommandId>(d.commands).first(t);
      same_k1 &= ens.predict(p) == pst.predict(p);
    }
  }
  o.require(same_k1, "TaskPST(K=1) == PST");

  const double task_gap = net_reduction_gap(neural::Variant::task, probe, V);
  const double jtc_gap = net_reduction_gap(neural::Variant::jtc, probe, V);
  o.require(task_gap <= 1e-9, "TaskRNN(K=1) matches vanilla within 1e-9");
  o.require(jtc_gap <= 1e-9, "JTC-RNN(K=1) matches vanilla within 1e-9");
  o.detail << "TaskRNN gap=" << task_gap << " JTC gap=" << jtc_gap;
}

// ------------------------------------------------------------ 3

void gradients(Outcome& o) {
  const std::size_t V = 12, K = 3;
  const auto batch = random_corpus(4, 21, V, 303);
  topics::BtmConfig bc;
  bc.K = K;
  bc.iterations = 50;
  auto btm = std::make_shared<topics::BitermModel>(topics::fit_btm(random_corpus(100, 21, V, 304), V, bc));
  for (auto v : {neural::Variant::vanilla, neural::Variant::task, neural::Variant::jtc}) {
    neural::NetConfig c;
    c.variant = v;
    c.vocab_size = V;
    c.K = K;
    neural::RecommenderNet net(c, v == neural::Variant::vanilla ? nullptr : btm);
    const auto r = neural::gradient_check(net, batch, 1e-4, 200, 1);
    o.require(r.coordinates >= 200 && r.max_relative_error < 1e-3, neural::to_string(v));
    o.detail << neural::to_string(v) << "=" << r.max_relative_error << " (" << r.coordinates << ") ";
  }
  help::HelpConfig hc;
  hc.vocab_size = V;
  help::HelpLstm model(hc);
  std::vector<corpus::HelpExample> ex;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    ex.push_back({batch[i], i % 2 ? corpus::HelpLabel::help : corpus::HelpLabel::no_help});
  }
  const auto r = help::gradient_check(model, ex, 1e-4, 200, 1);
  o.require(r.coordinates >= 200 && r.max_relative_error < 1e-3, "help classifier");
  o.detail << "help=" << r.max_relative_error << " (" << r.coordinates << ")";
}

// ------------------------------------------------------------ 4

void topic_recovery(Outcome& o) {
  corpus::SyntheticSpec spec;
  spec.num_tasks = 3;
  spec.vocab_per_task = 10;
  spec.task_mixing = 0.05;
  spec.docs = 1000;
  spec.doc_length = 21;
  const auto c = corpus::generate_synthetic(spec, 404);
  topics::BtmConfig bc;
  bc.K = 3;
  bc.alpha = 0.001;
  bc.beta = 0.005;
  bc.iterations = 500;
  const auto m = topics::fit_btm(c.sequences, c.vocab.size(), bc);

  std::vector<std::vector<double>> mass(3, std::vector<double>(3, 0.0));
  for (std::size_t z = 0; z < 3; ++z) {
    for (std::size_t w = 0; w < c.vocab.size(); ++w) {
      for (std::size_t task = 0; task < 3; ++task) {
        if (c.in_slice(static_cast<CommandId>(w), task)) mass[z][task] += m.phi[z][w];
      }
    }
  }
  std::vector<std::size_t> topic_of(3);
  std::vector<bool> used_z(3, false), used_t(3, false);
  double total_mass = 0.0;
  for (int round = 0; round < 3; ++round) {
    double best = -1.0;
    std::size_t bz = 0, bt = 0;
    for (std::size_t z = 0; z < 3; ++z) {
      for (std::size_t t = 0; t < 3; ++t) {
        if (!used_z[z] && !used_t[t] && mass[z][t] > best) {
          best = mass[z][t];
          bz = z;
          bt = t;
        }
      }
    }
    used_z[bz] = used_t[bt] = true;
    topic_of[bt] = bz;
    total_mass += best;
  }
  const double mean_mass = total_mass / 3.0;
  std::size_t right = 0;
  for (std::size_t d = 0; d < c.sequences.size(); ++d) {
    right += topics::infer_task_distribution(m, c.sequences[d].commands).argmax() == topic_of[c.task_labels[d]];
  }
  const double acc = static_cast<double>(right) / static_cast<double>(c.sequences.size());
  o.require(mean_mass >= 0.9, "matched slice mass >= 0.9");
  o.require(acc >= 0.9, "document argmax accuracy >= 0.9");
  o.detail << "slice mass=" << mean_mass << " doc accuracy=" << acc;
}

// ------------------------------------------------------------ 5

eval::EvalReport recommendation_report;

void table1_pattern(Outcome& o) {
  experiment::RecommendationSetup s;
  s.corpus.task_mixing = 0.15;
  s.btm.K = 3;
  s.btm.iterations = 200;
  s.pst.min_count = 3;
  s.net.embed_dim = 16;
  s.net.hidden_dim = 32;
  s.net.layers = 1;
  s.net.lr = 5e-3;
  s.net.max_epochs = 20;
  s.net.patience = 5;
  recommendation_report = eval::run_trials([&](std::uint64_t seed) { return experiment::recommendation_trial(s, seed); },
                                           5, 1, "recommendation", eval::recommender_order(),
                                           eval::fingerprint(s.to_json()));
  std::cout << recommendation_report.table();
  auto mean = [&](const char* model, const char* metric) {
    return recommendation_report.row(model).metrics.at(metric).mean;
  };
  o.require(mean("TaskPST", "top1") >= mean("PST", "top1"), "Top-1(TaskPST) >= Top-1(PST)");
  o.require(mean("TaskRNN", "top5") >= mean("vRNN", "top5"), "Top-5(TaskRNN) >= Top-5(vRNN)");
  o.detail << std::setprecision(4) << "Top-1 TaskPST=" << mean("TaskPST", "top1") << " PST=" << mean("PST", "top1")
           << "; Top-5 TaskRNN=" << mean("TaskRNN", "top5") << " vRNN=" << mean("vRNN", "top5");
}

// ------------------------------------------------------------ 6

void table2_pattern(Outcome& o) {
  experiment::HelpSetup s;
  s.corpus.docs = 3000;
  const auto report = eval::run_trials([&](std::uint64_t seed) { return experiment::help_trial(s, seed); }, 5, 1,
                                       "help", eval::help_order(), eval::fingerprint(s.to_json()));
  std::cout << report.table();
  auto auc = [&](const std::string& model) { return report.row(model).metrics.at("auroc").mean; };
  const double rf_c = auc("Random Forest (Commands only)");
  const double rf_t = auc("Random Forest (Time ⊕ Commands)");
  const double lstm_c = auc("LSTM Classifier (Commands only)");
  const double lstm_t = auc("LSTM Classifier (Time ⊕ Commands)");
  o.require(lstm_t >= rf_t, "LSTM >= RF (time)");
  o.require(lstm_c >= rf_c, "LSTM >= RF (commands only)");
  o.require(lstm_t >= lstm_c, "LSTM time >= commands only");
  o.require(lstm_t >= 0.9, "LSTM (time) AU-ROC >= 0.9");
  o.detail << std::setprecision(4) << "AU-ROC RF(C)=" << rf_c << " RF(T+C)=" << rf_t << " LSTM(C)=" << lstm_c
           << " LSTM(T+C)=" << lstm_t;
}

// ------------------------------------------------------------ 7

void metric_oracles(Outcome& o) {
  Rng rng = make_rng(707);
  std::uniform_int_distribution<int> score(0, 20);
  std::uniform_int_distribution<int> size(2, 80);
  double worst = 0.0;
  for (int set = 0; set < 100; ++set) {
    const int n = size(rng);
    std::vector<double> s;
    std::vector<int> y;
    for (int i = 0; i < n; ++i) {
      s.push_back(score(rng) / 20.0);
      y.push_back(static_cast<int>(rng() % 2));
    }
    y[0] = 1;
    y[1] = 0;
    double wins = 0.0, pairs = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (y[i] == 1 && y[j] == 0) {
          pairs += 1.0;
          wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
        }
      }
    }
    worst = std::max(worst, std::abs(eval::auroc(s, y) - wins / pairs));
  }
  o.require(worst <= 1e-9, "auroc matches pairwise oracle");

  bool ordered = !recommendation_report.rows.empty();
  for (const auto& row : recommendation_report.rows) {
    const auto& t1 = row.metrics.at("top1").values;
    const auto& t5 = row.metrics.at("top5").values;
    for (std::size_t i = 0; i < t1.size(); ++i) ordered &= t5[i] >= t1[i];
  }
  o.require(ordered, "Top-5 >= Top-1 for every evaluated model");

  const std::vector<double> s{0.9, 0.8, 0.4, 0.6, 0.2};
  const std::vector<int> y{1, 0, 1, 1, 0};
  const auto a = eval::precision_recall(s, y, 0.5);
  const auto b = eval::precision_recall(s, y, 0.0);
  const auto c = eval::precision_recall(s, y, 0.95);
  o.require(a.precision == 2.0 / 3.0 && a.recall == 2.0 / 3.0, "precision/recall at 0.5");
  o.require(b.precision == 3.0 / 5.0 && b.recall == 1.0, "precision/recall at 0");
  o.require(c.precision == 0.0 && c.recall == 0.0, "precision/recall with no predicted positive");
  o.detail << "auroc max|diff|=" << worst << " over 100 sets";
}

// ------------------------------------------------------------ 8

void pipeline_invariants(Outcome& o) {
  corpus::SyntheticSpec spec;
  spec.help = corpus::HelpInjection{};
  spec.doc_length = 30;
  const auto c = corpus::generate_synthetic(spec, 808);
  std::istringstream log(corpus::to_event_log(c));
  const auto parsed = corpus::parse_log(log);
  const auto seqs = corpus::preprocess(parsed.sessions, c.vocab);
  bool shape = !seqs.empty();
  for (const auto& s : seqs) shape &= s.size() == 21 && corpus::longest_run(s.commands) <= 2;
  o.require(shape, "preprocessed length 21, runs <= 2");

  corpus::PrepareOptions popts;
  const auto p = corpus::prepare(seqs, c.vocab, popts);
  std::set<std::string> train_users, test_users;
  for (const auto& s : p.train) train_users.insert(s.user);
  for (const auto& s : p.test) test_users.insert(s.user);
  bool disjoint = !test_users.empty();
  for (const auto& u : test_users) disjoint &= !train_users.count(u);
  o.require(disjoint, "user-disjoint split");

  bool clean = true;
  std::size_t positives = 0;
  for (const auto* side : {&p.help_train, &p.help_test}) {
    for (const auto& ex : *side) {
      if (ex.label != corpus::HelpLabel::help) continue;
      ++positives;
      for (CommandId id : ex.sequence.commands) clean &= !c.vocab.is_help(id);
    }
  }
  o.require(positives > 0 && clean, "positives carry no help command");

  const auto c2 = corpus::generate_synthetic(spec, 808);
  std::istringstream log2(corpus::to_event_log(c2));
  const auto p2 = corpus::prepare(corpus::preprocess(corpus::parse_log(log2).sessions, c2.vocab), c2.vocab, popts);
  o.require(p.train == p2.train && p.help_train == p2.help_train && p.help_test == p2.help_test, "corpus reproducible");

  topics::BtmConfig bc;
  bc.K = 3;
  bc.iterations = 30;
  auto btm_a = topics::fit_btm(p.train, c.vocab.size(), bc);
  auto btm_b = topics::fit_btm(p2.train, c.vocab.size(), bc);
  o.require(btm_a.phi == btm_b.phi, "topic model reproducible");

  neural::NetConfig nc;
  nc.variant = neural::Variant::jtc;
  nc.vocab_size = c.vocab.size();
  nc.K = 3;
  nc.embed_dim = 8;
  nc.hidden_dim = 8;
  nc.layers = 1;
  nc.max_epochs = 2;
  auto shared = std::make_shared<topics::BitermModel>(btm_a);
  neural::RecommenderNet na(nc, shared), nb(nc, shared);
  const std::vector<CommandSequence> small(p.train.begin(), p.train.begin() + 100);
  neural::train(na, small, {});
  neural::train(nb, small, {});
  o.require(neural::flatten_values(na.tensors()) == neural::flatten_values(nb.tensors()), "net training reproducible");

  help::HelpConfig hc;
  hc.vocab_size = c.vocab.size();
  hc.max_epochs = 2;
  help::HelpLstm ha(hc), hb(hc);
  help::train_help_lstm(ha, p.help_train, {});
  help::train_help_lstm(hb, p.help_train, {});
  o.require(neural::flatten_values(ha.tensors()) == neural::flatten_values(hb.tensors()),
            "help training reproducible");
  const auto fa = help::fit_help_forest(p.help_train, c.vocab.size(), true, {});
  const auto fb = help::fit_help_forest(p.help_train, c.vocab.size(), true, {});
  o.require(fa.to_json() == fb.to_json(), "forest reproducible");
  o.detail << seqs.size() << " sequences, " << positives << " positives, " << test_users.size() << " test users";
}

// ------------------------------------------------------------ 9

void online_offline(Outcome& o) {
  const std::size_t V = 20;
  help::HelpConfig hc;
  hc.vocab_size = V;
  hc.init_scale = 0.3;
  hc.layers = 2;
  const help::HelpLstm model(hc);
  Rng rng = make_rng(909);
  std::uniform_int_distribution<std::size_t> len(8, 40);
  std::uniform_int_distribution<CommandId> pick(0, V - 1);
  std::uniform_real_distribution<double> gap(0.0, 200.0);
  std::size_t equal = 0;
  for (int i = 0; i < 100; ++i) {
    CommandSequence s{"u", {}, {}};
    const std::size_t n = len(rng);
    for (std::size_t t = 0; t < n; ++t) {
      s.commands.push_back(pick(rng));
      s.gaps.push_back(t == 0 ? 0.0 : gap(rng));
    }
    const auto pred = help::predict_help_online(model, s, 7, 0.5);
    equal += !pred.probs.empty() && pred.probs.back() == model.final_probability(s);
  }
  o.require(equal == 100, "final online probability == training-mode probability");
  o.detail << equal << "/100 bitwise equal";
}

// ------------------------------------------------------------ 10

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(TASKREC_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

void end_to_end(Outcome& o) {
  const fs::path d = fs::absolute("acceptance_e2e");
  fs::remove_all(d);
  fs::create_directories(d);
  bool ok = true;
  auto step = [&](const std::string& what, const std::string& args) {
    if (!ok) return;
    const auto r = cli(args + " --quiet");
    if (r.code != 0) {
      ok = false;
      o.require(false, what + " exited " + std::to_string(r.code) + ": " + r.out.substr(0, 300));
    }
  };
  step("synth", "synth --out " + q(d / "syn") + " --docs 3000 --users 150 --help-injection --emit-log --seed 11");
  step("ingest", "ingest --log " + q(d / "syn/events.jsonl") + " --help-list " + q(d / "syn/help_commands.txt") +
                     " --out " + q(d / "data"));
  const std::string vocab = " --vocab " + q(d / "data/vocab.json");
  step("fit-btm", "fit-btm --train " + q(d / "data/train.jsonl") + vocab + " --out " + q(d / "btm.json") + " --K 3");
  const std::string rec = " --train " + q(d / "data/train.jsonl") + vocab + " --btm " + q(d / "btm.json");
  const std::string net = " --embed 16 --hidden 32 --layers 1 --lr 5e-3 --epochs 20";
  step("train firstmm", "train firstmm" + rec + " --out " + q(d / "firstmm.json"));
  step("train pst", "train pst" + rec + " --out " + q(d / "pst.json"));
  step("train taskpst", "train taskpst" + rec + " --out " + q(d / "taskpst.json"));
  step("train vrnn", "train vrnn" + rec + net + " --out " + q(d / "vrnn.bin"));
  step("train taskrnn", "train taskrnn" + rec + net + " --out " + q(d / "taskrnn.bin"));
  step("train jtcrnn", "train jtcrnn" + rec + net + " --out " + q(d / "jtcrnn.bin"));
  const std::string hlp = " --train " + q(d / "data/help_train.jsonl") + vocab;
  step("train help-rf", "train help-rf" + hlp + " --out " + q(d / "help_rf.json"));
  step("train help-lstm", "train help-lstm" + hlp + " --out " + q(d / "help_lstm.bin"));
  std::string models;
  for (const char* m : {"firstmm.json", "pst.json", "taskpst.json", "vrnn.bin", "taskrnn.bin", "jtcrnn.bin",
                        "help_rf.json", "help_lstm.bin"}) {
    models += " --model " + q(d / m);
  }
  step("evaluate", "evaluate" + models + vocab + " --test " + q(d / "data/test.jsonl") + " --help-test " +
                       q(d / "data/help_test.jsonl") + " --out " + q(d / "reports"));
  if (ok) std::cout << corpus::read_file(d / "reports/recommendation_report.txt")
                    << corpus::read_file(d / "reports/help_report.txt");

  // Eight ordinary steps from a training sequence, then a two-command loop typed five times with long gaps.
  std::string session;
  if (ok) {
    const auto vocab_file = corpus::read_vocabulary(d / "data/vocab.json");
    const auto first = corpus::read_sequences(d / "data/train.jsonl").front();
    std::ostringstream script;
    for (std::size_t t = 0; t < 8; ++t) script << vocab_file.name(first.commands[t]) << " " << first.gaps[t] << "\n";
    for (int i = 0; i < 5; ++i) {
      script << vocab_file.name(first.commands[8]) << " 120\n" << vocab_file.name(first.commands[9]) << " 120\n";
    }
    script << "quit\n";
    session = script.str();
  }
  corpus::write_file(d / "session.txt", session);
  if (ok) {
    const auto r = cli("demo --recommender " + q(d / "jtcrnn.bin") + " --help-model " + q(d / "help_lstm.bin") +
                       " --btm " + q(d / "btm.json") + vocab + " --input " + q(d / "session.txt"));
    o.require(r.code == 0, "demo exit code");
    const bool fired = r.out.find("help alarm first fired at step") != std::string::npos;
    o.require(fired, "demo alarm fired on the scripted loop");
    const auto at = r.out.rfind("session ended");
    o.detail << (at == std::string::npos ? std::string("no demo summary") : r.out.substr(at, r.out.find('\n', at) - at));
  }
}

}  // namespace

int main() {
  const std::vector<std::tuple<int, std::string, double, std::function<void(Outcome&)>>> criteria{
      {1, "counting-oracle equivalence", 5, counting_oracle},
      {2, "reduction identities", 0, reductions},
      {3, "gradient verification", 120, gradients},
      {4, "topic recovery", 120, topic_recovery},
      {5, "recommendation ordering", 900, table1_pattern},
      {6, "help detection ordering", 600, table2_pattern},
      {7, "metric oracles", 0, metric_oracles},
      {8, "pipeline invariants", 0, pipeline_invariants},
      {9, "online/offline help consistency", 0, online_offline},
      {10, "end-to-end smoke", 1800, end_to_end},
  };
  int failed = 0;
  for (const auto& [id, name, budget, fn] : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (budget > 0 && secs > budget) {
      o.require(false, "runtime over " + std::to_string(static_cast<int>(budget)) + " s");
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << o.detail.str() << " ["
              << std::fixed << std::setprecision(1) << secs << " s]" << std::defaultfloat << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
