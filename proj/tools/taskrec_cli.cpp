// taskrec: command-line front end for corpus preparation, model fitting,
// evaluation and the interactive demo.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "demo.hpp"
#include "taskrec/corpus.hpp"
#include "taskrec/corpus_io.hpp"
#include "taskrec/eval.hpp"
#include "taskrec/experiment.hpp"
#include "taskrec/forest.hpp"
#include "taskrec/help.hpp"
#include "taskrec/markov.hpp"
#include "taskrec/model_io.hpp"
#include "taskrec/recommender_net.hpp"
#include "taskrec/synthetic.hpp"
#include "taskrec/topics.hpp"

namespace fs = std::filesystem;
using namespace taskrec;

namespace {

enum Exit { kOk = 0, kValidation = 1, kIo = 2, kInternal = 3 };

struct Common {
  std::string config;
  bool quiet = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON file of option values (flags win)");
  sub->add_flag("--quiet", c.quiet, "Suppress the JSONL metrics stream");
}

/// Fills options that were not given on the command line from a flat JSON
/// object whose keys are option names.
void apply_config(CLI::App* sub, const std::string& path) {
  if (path.empty()) return;
  const auto j = io::load_json(path);
  if (!j.is_object()) throw ValidationError(path + ": config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    std::string name = key;
    std::replace(name.begin(), name.end(), '_', '-');
    CLI::Option* opt = nullptr;
    try {
      opt = sub->get_option("--" + name);
    } catch (const CLI::OptionNotFound&) {
      throw ValidationError(path + ": unknown option '" + key + "' for '" + sub->get_name() + "'");
    }
    if (opt->count() > 0 || name == "config") continue;
    auto as_text = [](const nlohmann::json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    if (value.is_array()) {
      for (const auto& v : value) opt->add_result(as_text(v));
    } else {
      opt->add_result(as_text(value));
    }
    opt->run_callback();
  }
}

class Metrics {
 public:
  explicit Metrics(const bool& quiet) : quiet_(quiet) {}
  void operator()(const nlohmann::json& j) const {
    if (!quiet_) std::cout << j.dump() << '\n' << std::flush;
  }
  std::function<void(const nlohmann::json&)> sink() const {
    return [this](const nlohmann::json& j) { (*this)(j); };
  }

 private:
  const bool& quiet_;
};

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw ValidationError(what + " is required");
  if (!fs::exists(path)) throw IoError(what + " '" + path + "' does not exist");
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  Common common;
  std::string spec_path, out;
  std::uint64_t seed = 1;
  std::size_t docs = 1000, tasks = 3, vocab_per_task = 10, length = 21, users = 100;
  double mixing = 0.05, sharpness = 20.0;
  bool help_injection = false, emit_log = false;
  double help_rate = 0.2;
};

int cmd_synth(CLI::App* sub, const SynthArgs& a) {
  corpus::SyntheticSpec spec;
  if (!a.spec_path.empty()) spec = corpus::SyntheticSpec::from_json(io::load_json(a.spec_path));
  auto given = [&](const char* opt) { return sub->get_option(opt)->count() > 0 || a.spec_path.empty(); };
  if (given("--docs")) spec.docs = a.docs;
  if (given("--tasks")) spec.num_tasks = a.tasks;
  if (given("--vocab-per-task")) spec.vocab_per_task = a.vocab_per_task;
  if (given("--length")) spec.doc_length = a.length;
  if (given("--users")) spec.users = a.users;
  if (given("--mixing")) spec.task_mixing = a.mixing;
  if (given("--sharpness")) spec.transition_sharpness = a.sharpness;
  if (a.help_injection && !spec.help) spec.help = corpus::HelpInjection{};
  if (spec.help && sub->get_option("--help-rate")->count() > 0) spec.help->help_rate = a.help_rate;
  spec.validate();

  const auto c = corpus::generate_synthetic(spec, a.seed);
  const fs::path out(a.out);
  corpus::write_sequences(out / "corpus.jsonl", c.sequences);
  corpus::write_vocabulary(out / "vocab.json", c.vocab);
  nlohmann::json labels{{"task_labels", c.task_labels}, {"struggling", c.struggling}};
  io::save_json(out / "labels.json", labels);
  nlohmann::json spec_out = spec.to_json();
  spec_out["seed"] = a.seed;
  corpus::write_file(out / "spec.json", spec_out.dump(1) + "\n");
  std::string help_list;
  for (CommandId h : c.vocab.help_ids()) help_list += c.vocab.name(h) + "\n";
  corpus::write_file(out / "help_commands.txt", help_list);
  if (a.emit_log) corpus::write_file(out / "events.jsonl", corpus::to_event_log(c));
  std::cout << nlohmann::json{{"sequences", c.sequences.size()},
                              {"vocab_size", c.vocab.size()},
                              {"help_commands", c.vocab.help_ids().size()},
                              {"out", out.string()}}
                   .dump()
            << '\n';
  return kOk;
}

struct IngestArgs {
  Common common;
  std::string log, denylist, help_list, corpus_path, vocab_path, out;
  double test_fraction = 0.2;
  std::size_t k = 8, negatives = 5, max_repeat = 2, length = 21;
  std::uint64_t seed = 7;
  bool no_match_lengths = false;
};

int cmd_ingest(const IngestArgs& a) {
  Vocabulary vocab;
  std::vector<corpus::CommandSequence> seqs;
  nlohmann::json stats;
  if (!a.log.empty()) {
    require_file(a.log, "--log");
    std::ifstream in(a.log);
    if (!in) throw IoError("cannot read " + a.log);
    auto parsed = corpus::parse_log(in);
    std::set<std::string> deny;
    if (!a.denylist.empty()) {
      require_file(a.denylist, "--denylist");
      for (auto& n : corpus::read_name_list(a.denylist)) deny.insert(n);
    }
    std::vector<std::string> help_names;
    if (!a.help_list.empty()) {
      require_file(a.help_list, "--help-list");
      help_names = corpus::read_name_list(a.help_list);
    }
    const auto sessions = corpus::filter_commands(std::move(parsed.sessions), deny);
    vocab = corpus::build_vocabulary(sessions, help_names);
    seqs = corpus::preprocess(sessions, vocab, a.max_repeat, a.length);
    stats["log_lines"] = parsed.lines;
    stats["skipped_lines"] = parsed.skipped;
    stats["sessions"] = sessions.size();
  } else {
    require_file(a.corpus_path, "--corpus (or --log)");
    require_file(a.vocab_path, "--vocab");
    vocab = corpus::read_vocabulary(a.vocab_path);
    seqs = corpus::preprocess(corpus::read_sequences(a.corpus_path, vocab.size()), a.max_repeat, a.length);
  }
  if (seqs.empty()) throw EmptyCorpusError("no sequence of length " + std::to_string(a.length) + " survived preprocessing");
  const auto labeled = corpus::label_help(seqs, vocab, a.k);
  if (labeled.rest.empty()) {
    throw InsufficientDataError("every sequence contains a help command, so there is no pool to draw negatives from");
  }

  corpus::PrepareOptions opts;
  opts.test_fraction = a.test_fraction;
  opts.k = a.k;
  opts.negatives_per_positive = a.negatives;
  opts.match_negative_lengths = !a.no_match_lengths;
  opts.seed = a.seed;
  const auto p = corpus::prepare(seqs, vocab, opts);

  const fs::path out(a.out);
  corpus::write_vocabulary(out / "vocab.json", vocab);
  corpus::write_sequences(out / "train.jsonl", p.train);
  corpus::write_sequences(out / "test.jsonl", p.test);
  corpus::write_help_examples(out / "help_train.jsonl", p.help_train);
  corpus::write_help_examples(out / "help_test.jsonl", p.help_test);
  auto positives = [](const std::vector<corpus::HelpExample>& v) {
    return std::count_if(v.begin(), v.end(), [](const auto& e) { return e.label == corpus::HelpLabel::help; });
  };
  stats["sequences"] = seqs.size();
  stats["vocab_size"] = vocab.size();
  stats["vocab_hash"] = vocab.hash_hex();
  stats["train_sequences"] = p.train.size();
  stats["test_sequences"] = p.test.size();
  stats["positives"] = labeled.positives.size();
  stats["discarded_help"] = labeled.discarded;
  stats["help_train"] = {{"examples", p.help_train.size()}, {"positives", positives(p.help_train)}};
  stats["help_test"] = {{"examples", p.help_test.size()}, {"positives", positives(p.help_test)}};
  corpus::write_file(out / "stats.json", stats.dump(1) + "\n");
  std::cout << stats.dump() << '\n';
  return kOk;
}

struct BtmArgs {
  Common common;
  std::string train, vocab, out;
  std::size_t K = 14, iterations = 500;
  double alpha = 0.001, beta = 0.005;
  std::uint64_t seed = 1;
};

int cmd_fit_btm(const BtmArgs& a) {
  require_file(a.train, "--train");
  require_file(a.vocab, "--vocab");
  const auto vocab = corpus::read_vocabulary(a.vocab);
  const auto docs = corpus::read_sequences(a.train, vocab.size());
  topics::BtmConfig cfg{a.K, a.alpha, a.beta, a.iterations, a.seed};
  Metrics metrics(a.common.quiet);
  auto model = topics::fit_btm(docs, vocab.size(), cfg, [&](const topics::GibbsState& s) {
    if (s.sweep % 50 == 0 || s.sweep == cfg.iterations) metrics({{"model", "btm"}, {"sweep", s.sweep}});
  });
  model.vocab_hash = vocab.hash_hex();
  for (const auto& w : model.warnings) std::cerr << "warning: " << w << '\n';
  io::save_json(a.out, model.to_json());
  nlohmann::json summary{{"K", model.K()}, {"biterm_docs", docs.size()}, {"out", a.out}};
  nlohmann::json tasks = nlohmann::json::array();
  for (std::size_t z = 0; z < model.K(); ++z) {
    nlohmann::json top = nlohmann::json::array();
    for (const auto& [c, p] : topics::top_commands(model, z, 5)) top.push_back(vocab.name(c));
    tasks.push_back({{"task", z}, {"theta", model.theta[z]}, {"top", top}});
  }
  summary["tasks"] = tasks;
  std::cout << summary.dump() << '\n';
  return kOk;
}

struct TrainArgs {
  Common common;
  std::string model, train, vocab, btm, out;
  double val_fraction = 0.1;
  std::uint64_t seed = 1;
  // markov
  std::size_t depth = 10, min_count = 7;
  // nets
  std::size_t embed = 32, hidden = 64, layers = 2, epochs = 50, patience = 5, batch = 32;
  double lr = 1e-3, kl_weight = 1.0, grad_clip = 5.0;
  // help
  std::size_t trees = 50, min_leaf = 2, proj_dim = 8, help_embed = 8, help_hidden = 32, help_epochs = 60,
              help_patience = 20, help_batch = 8, k = 8;
  bool no_time = false, log_time = false;
  double threshold = 0.5;
};

std::shared_ptr<const topics::BitermModel> need_btm(const TrainArgs& a, const Vocabulary& vocab) {
  if (a.btm.empty() || !fs::exists(a.btm)) {
    throw ValidationError("model '" + a.model + "' needs a fitted topic model: run fit-btm first and pass --btm");
  }
  auto btm = std::make_shared<topics::BitermModel>(io::load_btm(a.btm));
  io::check_vocab(btm->vocab_hash, vocab.hash_hex(), a.btm);
  return btm;
}

int cmd_train(const TrainArgs& a) {
  static const std::set<std::string> known{"firstmm", "pst",     "taskpst", "vrnn",
                                           "taskrnn", "jtcrnn", "help-rf", "help-lstm"};
  if (!known.count(a.model)) throw ValidationError("unknown model '" + a.model + "'");
  require_file(a.train, "--train");
  require_file(a.vocab, "--vocab");
  if (a.out.empty()) throw ValidationError("--out is required");
  const auto vocab = corpus::read_vocabulary(a.vocab);
  const std::string hash = vocab.hash_hex();
  Metrics metrics(a.common.quiet);
  nlohmann::json final{{"model", a.model}, {"out", a.out}};

  if (a.model == "help-rf" || a.model == "help-lstm") {
    const auto examples = corpus::read_help_examples(a.train, vocab.size());
    auto [tr, va] = help::stratified_split(examples, a.val_fraction, a.seed);
    std::vector<double> scores;
    if (a.model == "help-rf") {
      help::ForestConfig fc;
      fc.n_trees = a.trees;
      fc.min_leaf = a.min_leaf;
      fc.seed = a.seed;
      auto f = help::fit_help_forest(tr, vocab.size(), !a.no_time, fc, a.proj_dim, a.seed);
      f.vocab_hash = hash;
      for (const auto& ex : va) scores.push_back(f.score(ex.sequence));
      io::save_json(a.out, f.to_json());
    } else {
      help::HelpConfig hc;
      hc.vocab_size = vocab.size();
      hc.embed_dim = a.help_embed;
      hc.hidden_dim = a.help_hidden;
      hc.use_time = !a.no_time;
      hc.log_time = a.log_time;
      hc.lr = a.lr;
      hc.max_epochs = a.help_epochs;
      hc.patience = a.help_patience;
      hc.batch_size = a.help_batch;
      hc.grad_clip = a.grad_clip;
      hc.k = a.k;
      hc.threshold = a.threshold;
      hc.seed = a.seed;
      help::HelpLstm model(hc);
      model.vocab_hash = hash;
      help::train_help_lstm(model, tr, va, metrics.sink());
      for (const auto& ex : va) scores.push_back(help::help_score(model, ex.sequence, hc.k));
      io::save_help_lstm(a.out, model);
    }
    bool pos = false, neg = false;
    for (const auto& ex : va) (ex.label == corpus::HelpLabel::help ? pos : neg) = true;
    if (pos && neg) {
      for (const auto& [k, v] : experiment::help_metrics(scores, va, a.threshold)) final["val_" + k] = v;
    }
    std::cout << final.dump() << '\n';
    return kOk;
  }

  const auto seqs = corpus::read_sequences(a.train, vocab.size());
  if (seqs.empty()) throw EmptyCorpusError(a.train + " holds no sequences");
  auto [tr, va] = experiment::holdout(seqs, a.val_fraction, a.seed);
  const markov::PstOptions pst{a.depth, a.min_count};
  std::unique_ptr<Recommender> fitted;

  if (a.model == "firstmm") {
    auto m = markov::FirstOrderModel::fit(tr, vocab.size());
    m.vocab_hash = hash;
    io::save_json(a.out, m.to_json());
    fitted = std::make_unique<markov::FirstOrderModel>(std::move(m));
  } else if (a.model == "pst") {
    auto m = markov::SuffixTree::fit(tr, vocab.size(), pst);
    m.vocab_hash = hash;
    io::save_json(a.out, m.to_json());
    fitted = std::make_unique<markov::SuffixTree>(std::move(m));
  } else if (a.model == "taskpst") {
    auto m = markov::TaskPstEnsemble::fit(tr, need_btm(a, vocab), pst);
    m.vocab_hash = hash;
    io::save_json(a.out, m.to_json());
    fitted = std::make_unique<markov::TaskPstEnsemble>(std::move(m));
  } else {
    neural::NetConfig nc;
    nc.variant = neural::parse_variant(a.model);
    nc.vocab_size = vocab.size();
    nc.embed_dim = a.embed;
    nc.hidden_dim = a.hidden;
    nc.layers = a.layers;
    nc.lr = a.lr;
    nc.max_epochs = a.epochs;
    nc.patience = a.patience;
    nc.batch_size = a.batch;
    nc.grad_clip = a.grad_clip;
    nc.kl_weight = a.kl_weight;
    nc.seed = a.seed;
    std::shared_ptr<const topics::BitermModel> btm;
    if (nc.variant != neural::Variant::vanilla) {
      btm = need_btm(a, vocab);
      nc.K = btm->K();
    }
    auto net = std::make_unique<neural::RecommenderNet>(nc, btm);
    net->vocab_hash = hash;
    const auto report = neural::train(*net, tr, va, metrics.sink());
    final["epochs"] = report.epochs.size();
    final["best_epoch"] = report.best_epoch;
    io::save_net(a.out, *net);
    fitted = std::move(net);
  }
  if (!va.empty()) {
    const auto acc = eval::topk_accuracies(*fitted, va);
    final["val_top1"] = acc.top1;
    final["val_top5"] = acc.top5;
  }
  std::cout << final.dump() << '\n';
  return kOk;
}

struct EvalArgs {
  Common common;
  std::vector<std::string> models;
  std::string test, help_test, vocab, out;
  double threshold = 0.5;
  std::size_t k = 8;
};

int cmd_evaluate(const EvalArgs& a) {
  require_file(a.vocab, "--vocab");
  if (a.models.empty()) throw ValidationError("at least one --model is required");
  const auto vocab = corpus::read_vocabulary(a.vocab);
  const std::string hash = vocab.hash_hex();
  Metrics metrics(a.common.quiet);

  std::vector<std::string> rec_paths, help_paths;
  for (const auto& m : a.models) {
    require_file(m, "--model");
    (io::detect_kind(m) == "help" ? help_paths : rec_paths).push_back(m);
  }
  std::vector<std::string> inputs{corpus::read_file(a.vocab)};
  nlohmann::json cfg{{"threshold", a.threshold}, {"k", a.k}};
  for (const auto& m : a.models) inputs.push_back(corpus::read_file(m));

  auto emit = [&](eval::EvalReport report, const std::string& stem) {
    report.fingerprint = eval::fingerprint(cfg, inputs);
    if (!a.out.empty()) {
      corpus::write_file(fs::path(a.out) / (stem + ".json"), report.to_json().dump(1) + "\n");
      corpus::write_file(fs::path(a.out) / (stem + ".txt"), report.table());
    }
    std::cout << report.table();
  };

  // Repeated model names are treated as separate runs of the same model.
  auto collect = [&](const std::vector<std::string>& paths, auto&& score_one) {
    std::map<std::string, std::vector<std::map<std::string, double>>> runs;
    for (const auto& p : paths) {
      auto [name, values] = score_one(p);
      runs[name].push_back(values);
      nlohmann::json j{{"model", name}, {"file", p}};
      for (const auto& [k, v] : values) j[k] = v;
      metrics(j);
    }
    std::size_t n = 0;
    for (const auto& [_, r] : runs) n = std::max(n, r.size());
    for (const auto& [name, r] : runs) {
      if (r.size() != n) throw ValidationError("model '" + name + "' has " + std::to_string(r.size()) +
                                               " runs but others have " + std::to_string(n));
    }
    return std::make_pair(runs, n);
  };
  auto to_report = [&](const auto& runs, std::size_t n, const std::string& kind, const std::vector<std::string>& order) {
    return eval::run_trials(
        [&](std::uint64_t i) {
          eval::TrialMetrics t;
          for (const auto& [name, r] : runs) t[name] = r[i];
          return t;
        },
        n, 0, kind, order);
  };

  if (!rec_paths.empty()) {
    require_file(a.test, "--test");
    const auto test = corpus::read_sequences(a.test, vocab.size());
    inputs.push_back(corpus::read_file(a.test));
    auto [runs, n] = collect(rec_paths, [&](const std::string& p) {
      auto model = io::load_recommender(p, hash);
      const auto acc = eval::topk_accuracies(*model, test);
      return std::make_pair(model->name(), std::map<std::string, double>{{"top1", acc.top1}, {"top5", acc.top5}});
    });
    emit(to_report(runs, n, "recommendation", eval::recommender_order()), "recommendation_report");
  }
  if (!help_paths.empty()) {
    require_file(a.help_test, "--help-test");
    const auto test = corpus::read_help_examples(a.help_test, vocab.size());
    inputs.push_back(corpus::read_file(a.help_test));
    auto [runs, n] = collect(help_paths, [&](const std::string& p) {
      const auto model = io::load_help_model(p, hash);
      std::vector<double> scores;
      for (const auto& ex : test) scores.push_back(model.score(ex.sequence, a.k));
      return std::make_pair(model.name(), experiment::help_metrics(scores, test, a.threshold));
    });
    emit(to_report(runs, n, "help", eval::help_order()), "help_report");
  }
  return kOk;
}

struct ExperimentArgs {
  Common common;
  std::string kind = "recommendation", setup, out;
  std::size_t runs = 5;
  std::uint64_t seed = 1;
};

int cmd_experiment(const ExperimentArgs& a) {
  Metrics metrics(a.common.quiet);
  nlohmann::json setup_json = nlohmann::json::object();
  if (!a.setup.empty()) setup_json = io::load_json(a.setup);
  eval::EvalReport report;
  if (a.kind == "recommendation") {
    const auto setup = experiment::RecommendationSetup::from_json(setup_json);
    report = eval::run_trials([&](std::uint64_t s) { return experiment::recommendation_trial(setup, s, metrics.sink()); },
                              a.runs, a.seed, "recommendation", eval::recommender_order(),
                              eval::fingerprint(setup.to_json()));
  } else if (a.kind == "help") {
    const auto setup = experiment::HelpSetup::from_json(setup_json);
    report = eval::run_trials([&](std::uint64_t s) { return experiment::help_trial(setup, s, metrics.sink()); },
                              a.runs, a.seed, "help", eval::help_order(), eval::fingerprint(setup.to_json()));
  } else {
    throw ValidationError("--kind must be 'recommendation' or 'help'");
  }
  if (!a.out.empty()) {
    corpus::write_file(fs::path(a.out) / (a.kind + "_report.json"), report.to_json().dump(1) + "\n");
    corpus::write_file(fs::path(a.out) / (a.kind + "_report.txt"), report.table());
  }
  std::cout << report.table();
  return kOk;
}

struct RecommendArgs {
  Common common;
  std::string model, vocab, prefix, input;
  std::size_t top_k = 5;
};

int cmd_recommend(const RecommendArgs& a) {
  require_file(a.vocab, "--vocab");
  require_file(a.model, "--model");
  const auto vocab = corpus::read_vocabulary(a.vocab);
  const auto model = io::load_recommender(a.model, vocab.hash_hex());
  auto answer = [&](const std::string& line) {
    std::istringstream ls(line);
    std::vector<CommandId> prefix;
    std::vector<std::string> names;
    for (std::string n; ls >> n;) {
      prefix.push_back(vocab.encode(n));
      names.push_back(n);
    }
    if (prefix.empty()) throw ValidationError("empty prefix");
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& [c, p] : model->recommend(prefix, a.top_k)) recs.push_back({{"command", vocab.name(c)}, {"p", p}});
    std::cout << nlohmann::json{{"prefix", names}, {"recommendations", recs}}.dump() << '\n';
  };
  if (!a.prefix.empty()) answer(a.prefix);
  if (!a.input.empty()) {
    std::ifstream in(a.input);
    if (!in) throw IoError("cannot read " + a.input);
    for (std::string line; std::getline(in, line);) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) answer(line);
    }
  }
  if (a.prefix.empty() && a.input.empty()) throw ValidationError("give --prefix or --input");
  return kOk;
}

struct DemoArgs {
  Common common;
  std::string recommender, help_model, btm, vocab, input;
  cli::DemoOptions opts;
};

int cmd_demo(const DemoArgs& a) {
  require_file(a.vocab, "--vocab");
  require_file(a.recommender, "--recommender");
  cli::DemoModels m;
  m.vocab = corpus::read_vocabulary(a.vocab);
  const std::string hash = m.vocab.hash_hex();
  m.recommender = io::load_recommender(a.recommender, hash);
  if (!a.help_model.empty()) {
    require_file(a.help_model, "--help-model");
    m.help = io::load_help_model(a.help_model, hash);
  }
  if (!a.btm.empty()) {
    require_file(a.btm, "--btm");
    auto btm = std::make_shared<topics::BitermModel>(io::load_btm(a.btm));
    io::check_vocab(btm->vocab_hash, hash, a.btm);
    m.btm = std::move(btm);
  }
  std::optional<std::size_t> alarm;
  if (a.input.empty()) {
    alarm = cli::run_demo(m, a.opts, std::cin, std::cout);
  } else {
    std::ifstream in(a.input);
    if (!in) throw IoError("cannot read " + a.input);
    alarm = cli::run_demo(m, a.opts, in, std::cout);
  }
  if (!a.opts.jsonl) {
    std::cout << (alarm ? "session ended; help alarm first fired at step " + std::to_string(*alarm)
                        : std::string("session ended; no help alarm"))
              << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Task-aware command recommendation and proactive help detection"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "taskrec 1.0");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic corpus with planted tasks");
  add_common(s, synth.common);
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--spec", synth.spec_path, "Corpus spec JSON");
  s->add_option("--seed", synth.seed);
  s->add_option("--docs", synth.docs);
  s->add_option("--tasks", synth.tasks);
  s->add_option("--vocab-per-task", synth.vocab_per_task);
  s->add_option("--length", synth.length);
  s->add_option("--users", synth.users);
  s->add_option("--mixing", synth.mixing);
  s->add_option("--sharpness", synth.sharpness);
  s->add_flag("--help-injection", synth.help_injection, "Plant struggling sessions that end in a help command");
  s->add_option("--help-rate", synth.help_rate);
  s->add_flag("--emit-log", synth.emit_log, "Also write a raw JSONL event log");

  IngestArgs ingest;
  auto* in = app.add_subcommand("ingest", "Preprocess, label help sequences and split by user");
  add_common(in, ingest.common);
  in->add_option("--log", ingest.log, "JSONL event log");
  in->add_option("--denylist", ingest.denylist, "Commands to drop, one per line");
  in->add_option("--help-list", ingest.help_list, "Help commands, one per line");
  in->add_option("--corpus", ingest.corpus_path, "Already encoded sequences (instead of --log)");
  in->add_option("--vocab", ingest.vocab_path, "Vocabulary for --corpus");
  in->add_option("--out", ingest.out, "Output directory")->required();
  in->add_option("--test-fraction", ingest.test_fraction);
  in->add_option("--k", ingest.k, "Minimum context before a help command");
  in->add_option("--negatives", ingest.negatives, "Negatives per positive");
  in->add_option("--max-repeat", ingest.max_repeat);
  in->add_option("--length", ingest.length);
  in->add_option("--seed", ingest.seed);
  in->add_flag("--no-match-lengths", ingest.no_match_lengths, "Keep negatives at full length");

  BtmArgs btm;
  auto* b = app.add_subcommand("fit-btm", "Fit the biterm task model");
  add_common(b, btm.common);
  b->add_option("--train", btm.train)->required();
  b->add_option("--vocab", btm.vocab)->required();
  b->add_option("--out", btm.out)->required();
  b->add_option("--K", btm.K);
  b->add_option("--alpha", btm.alpha);
  b->add_option("--beta", btm.beta);
  b->add_option("--iterations", btm.iterations);
  b->add_option("--seed", btm.seed);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train one model");
  add_common(t, train.common);
  t->add_option("model", train.model, "firstmm|pst|taskpst|vrnn|taskrnn|jtcrnn|help-rf|help-lstm")->required();
  t->add_option("--train", train.train, "Training sequences (help examples for help models)")->required();
  t->add_option("--vocab", train.vocab)->required();
  t->add_option("--out", train.out)->required();
  t->add_option("--btm", train.btm, "Fitted topic model (task-aware models)");
  t->add_option("--val-fraction", train.val_fraction);
  t->add_option("--seed", train.seed);
  t->add_option("--depth", train.depth);
  t->add_option("--min-count", train.min_count);
  t->add_option("--embed", train.embed);
  t->add_option("--hidden", train.hidden);
  t->add_option("--layers", train.layers);
  t->add_option("--epochs", train.epochs);
  t->add_option("--patience", train.patience);
  t->add_option("--batch", train.batch);
  t->add_option("--lr", train.lr);
  t->add_option("--kl-weight", train.kl_weight);
  t->add_option("--grad-clip", train.grad_clip);
  t->add_option("--trees", train.trees);
  t->add_option("--min-leaf", train.min_leaf);
  t->add_option("--proj-dim", train.proj_dim);
  t->add_option("--help-embed", train.help_embed);
  t->add_option("--help-hidden", train.help_hidden);
  t->add_option("--help-epochs", train.help_epochs);
  t->add_option("--help-patience", train.help_patience);
  t->add_option("--help-batch", train.help_batch);
  t->add_option("--k", train.k);
  t->add_option("--threshold", train.threshold);
  t->add_flag("--no-time", train.no_time, "Commands only: drop the time gap input");
  t->add_flag("--log-time", train.log_time, "Feed log1p of the gap to the help LSTM");

  EvalArgs ev;
  auto* e = app.add_subcommand("evaluate", "Score model files on held-out data");
  add_common(e, ev.common);
  e->add_option("--model", ev.models, "Model file; repeat the same model to report several runs")->required();
  e->add_option("--test", ev.test, "Test sequences (recommenders)");
  e->add_option("--help-test", ev.help_test, "Test help examples (help models)");
  e->add_option("--vocab", ev.vocab)->required();
  e->add_option("--out", ev.out, "Directory for report files");
  e->add_option("--threshold", ev.threshold);
  e->add_option("--k", ev.k);

  ExperimentArgs ex;
  auto* x = app.add_subcommand("experiment", "Repeat generate/train/evaluate over several seeds");
  add_common(x, ex.common);
  x->add_option("--kind", ex.kind, "recommendation|help");
  x->add_option("--setup", ex.setup, "Experiment setup JSON");
  x->add_option("--runs", ex.runs);
  x->add_option("--seed", ex.seed);
  x->add_option("--out", ex.out);

  RecommendArgs rec;
  auto* r = app.add_subcommand("recommend", "Top-k next commands for prefixes");
  add_common(r, rec.common);
  r->add_option("--model", rec.model)->required();
  r->add_option("--vocab", rec.vocab)->required();
  r->add_option("--prefix", rec.prefix, "Space separated command names");
  r->add_option("--input", rec.input, "File with one prefix per line");
  r->add_option("--top-k", rec.top_k);

  DemoArgs demo;
  auto* d = app.add_subcommand("demo", "Interactive session with recommendations and help detection");
  add_common(d, demo.common);
  d->add_option("--recommender", demo.recommender)->required();
  d->add_option("--help-model", demo.help_model);
  d->add_option("--btm", demo.btm);
  d->add_option("--vocab", demo.vocab)->required();
  d->add_option("--input", demo.input, "Read the session from a file instead of stdin");
  d->add_option("--top-k", demo.opts.top_k);
  d->add_option("--threshold", demo.opts.threshold);
  d->add_option("--context", demo.opts.context);
  d->add_flag("--jsonl", demo.opts.jsonl);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kValidation;
  }

  try {
    const std::pair<CLI::App*, std::string> configs[] = {{s, synth.common.config}, {in, ingest.common.config},
                                                         {b, btm.common.config},   {t, train.common.config},
                                                         {e, ev.common.config},    {x, ex.common.config},
                                                         {r, rec.common.config},   {d, demo.common.config}};
    for (const auto& [sub, cfg] : configs) {
      if (sub->parsed()) apply_config(sub, cfg);
    }
    if (s->parsed()) return cmd_synth(s, synth);
    if (in->parsed()) return cmd_ingest(ingest);
    if (b->parsed()) return cmd_fit_btm(btm);
    if (t->parsed()) return cmd_train(train);
    if (e->parsed()) return cmd_evaluate(ev);
    if (x->parsed()) return cmd_experiment(ex);
    if (r->parsed()) return cmd_recommend(rec);
    if (d->parsed()) return cmd_demo(demo);
  } catch (const ValidationError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kValidation;
  } catch (const IoError& err) {
    std::cerr << "I/O error: " << err.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& err) {
    std::cerr << "I/O error: " << err.what() << '\n';
    return kIo;
  } catch (const CLI::Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kValidation;
  } catch (const nlohmann::json::exception& err) {
    std::cerr << "error: malformed input: " << err.what() << '\n';
    return kValidation;
  } catch (const std::exception& err) {
    std::cerr << "internal error: " << err.what() << '\n';
    return kInternal;
  }
  return kInternal;
}
