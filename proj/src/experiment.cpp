#include "taskrec/experiment.hpp"

#include <algorithm>
#include <memory>

namespace taskrec::experiment {

namespace {

nlohmann::json btm_json(const topics::BtmConfig& c) {
  return {{"K", c.K}, {"alpha", c.alpha}, {"beta", c.beta}, {"iterations", c.iterations}, {"seed", c.seed}};
}

topics::BtmConfig btm_from(const nlohmann::json& j, topics::BtmConfig c) {
  c.K = j.value("K", c.K);
  c.alpha = j.value("alpha", c.alpha);
  c.beta = j.value("beta", c.beta);
  c.iterations = j.value("iterations", c.iterations);
  c.seed = j.value("seed", c.seed);
  return c;
}

nlohmann::json prepare_json(const corpus::PrepareOptions& p) {
  return {{"test_fraction", p.test_fraction},
          {"k", p.k},
          {"negatives_per_positive", p.negatives_per_positive},
          {"match_negative_lengths", p.match_negative_lengths},
          {"seed", p.seed}};
}

corpus::PrepareOptions prepare_from(const nlohmann::json& j, corpus::PrepareOptions p) {
  p.test_fraction = j.value("test_fraction", p.test_fraction);
  p.k = j.value("k", p.k);
  p.negatives_per_positive = j.value("negatives_per_positive", p.negatives_per_positive);
  p.match_negative_lengths = j.value("match_negative_lengths", p.match_negative_lengths);
  p.seed = j.value("seed", p.seed);
  return p;
}

nlohmann::json merged(nlohmann::json base, const nlohmann::json& j, const char* key) {
  if (j.contains(key)) base.update(j.at(key));
  return base;
}

std::uint64_t derive(std::uint64_t seed, std::uint64_t salt) { return splitmix64(seed ^ splitmix64(salt)); }

}  // namespace

std::pair<std::vector<corpus::CommandSequence>, std::vector<corpus::CommandSequence>> holdout(
    const std::vector<corpus::CommandSequence>& seqs, double fraction, std::uint64_t seed) {
  if (fraction < 0.0 || fraction >= 1.0) throw ValidationError("hold-out fraction must be in [0, 1)");
  std::vector<std::size_t> idx(seqs.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng = make_rng(seed, 0x686f6c64);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_out = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(seqs.size())));
  std::vector<bool> out(seqs.size(), false);
  for (std::size_t i = 0; i < n_out; ++i) out[idx[i]] = true;
  std::pair<std::vector<corpus::CommandSequence>, std::vector<corpus::CommandSequence>> r;
  for (std::size_t i = 0; i < seqs.size(); ++i) (out[i] ? r.second : r.first).push_back(seqs[i]);
  return r;
}

nlohmann::json RecommendationSetup::to_json() const {
  return {{"corpus", corpus.to_json()}, {"prepare", prepare_json(prepare)}, {"btm", btm_json(btm)},
          {"pst", {{"max_depth", pst.max_depth}, {"min_count", pst.min_count}}},
          {"net", net.to_json()},       {"val_fraction", val_fraction},     {"models", models}};
}

RecommendationSetup RecommendationSetup::from_json(const nlohmann::json& j) {
  RecommendationSetup s;
  s.corpus = corpus::SyntheticSpec::from_json(merged(s.corpus.to_json(), j, "corpus"));
  if (j.contains("prepare")) s.prepare = prepare_from(j["prepare"], s.prepare);
  if (j.contains("btm")) s.btm = btm_from(j["btm"], s.btm);
  if (j.contains("pst")) {
    s.pst.max_depth = j["pst"].value("max_depth", s.pst.max_depth);
    s.pst.min_count = j["pst"].value("min_count", s.pst.min_count);
  }
  nlohmann::json net = s.net.to_json();
  net["vocab_size"] = 1;
  s.net = neural::NetConfig::from_json(merged(net, j, "net"));
  s.val_fraction = j.value("val_fraction", s.val_fraction);
  if (j.contains("models")) s.models = j["models"].get<std::vector<std::string>>();
  return s;
}

eval::TrialMetrics recommendation_trial(const RecommendationSetup& setup, std::uint64_t seed, const Sink& sink) {
  for (const auto& m : setup.models) {
    const auto& known = eval::recommender_order();
    if (std::find(known.begin(), known.end(), m) == known.end()) throw ValidationError("unknown model '" + m + "'");
  }
  const auto synth = corpus::generate_synthetic(setup.corpus, seed);
  const std::size_t V = synth.vocab.size();
  corpus::PrepareOptions popts = setup.prepare;
  popts.seed = derive(seed, 1);
  const auto split = corpus::split_by_user(corpus::preprocess(synth.sequences), popts.test_fraction, popts.seed);
  auto [train, val] = holdout(split.train, setup.val_fraction, derive(seed, 2));

  auto wants = [&](const std::string& m) {
    return std::find(setup.models.begin(), setup.models.end(), m) != setup.models.end();
  };
  std::shared_ptr<const topics::BitermModel> btm;
  if (wants("TaskPST") || wants("TaskRNN") || wants("JTC-RNN")) {
    topics::BtmConfig bc = setup.btm;
    bc.seed = derive(seed, 3);
    btm = std::make_shared<topics::BitermModel>(topics::fit_btm(split.train, V, bc));
  }

  eval::TrialMetrics out;
  auto score = [&](const Recommender& r) {
    const auto acc = eval::topk_accuracies(r, split.test);
    out[r.name()] = {{"top1", acc.top1}, {"top5", acc.top5}};
    if (sink) sink({{"seed", seed}, {"model", r.name()}, {"top1", acc.top1}, {"top5", acc.top5}});
  };
  if (wants("FirstMM")) score(markov::FirstOrderModel::fit(split.train, V));
  if (wants("PST")) score(markov::SuffixTree::fit(split.train, V, setup.pst));
  if (wants("TaskPST")) score(markov::TaskPstEnsemble::fit(split.train, btm, setup.pst));
  const std::pair<const char*, neural::Variant> nets[] = {
      {"vRNN", neural::Variant::vanilla}, {"TaskRNN", neural::Variant::task}, {"JTC-RNN", neural::Variant::jtc}};
  for (const auto& [name, variant] : nets) {
    if (!wants(name)) continue;
    neural::NetConfig nc = setup.net;
    nc.variant = variant;
    nc.vocab_size = V;
    nc.K = variant == neural::Variant::vanilla ? 0 : btm->K();
    nc.seed = derive(seed, 4);
    neural::RecommenderNet net(nc, variant == neural::Variant::vanilla ? nullptr : btm);
    neural::train(net, train, val, sink);
    score(net);
  }
  return out;
}

// ---------------------------------------------------------------------------

HelpSetup::HelpSetup() {
  corpus.help = corpus::HelpInjection{};
  lstm.vocab_size = 1;
}

nlohmann::json HelpSetup::to_json() const {
  return {{"corpus", corpus.to_json()},     {"prepare", prepare_json(prepare)}, {"forest", forest.to_json()},
          {"lstm", lstm.to_json()},         {"proj_dim", proj_dim},             {"val_fraction", val_fraction},
          {"threshold", threshold},         {"models", models}};
}

HelpSetup HelpSetup::from_json(const nlohmann::json& j) {
  HelpSetup s;
  s.corpus = corpus::SyntheticSpec::from_json(merged(s.corpus.to_json(), j, "corpus"));
  if (j.contains("prepare")) s.prepare = prepare_from(j["prepare"], s.prepare);
  s.forest = help::ForestConfig::from_json(merged(s.forest.to_json(), j, "forest"));
  s.lstm = help::HelpConfig::from_json(merged(s.lstm.to_json(), j, "lstm"));
  s.proj_dim = j.value("proj_dim", s.proj_dim);
  s.val_fraction = j.value("val_fraction", s.val_fraction);
  s.threshold = j.value("threshold", s.threshold);
  if (j.contains("models")) s.models = j["models"].get<std::vector<std::string>>();
  return s;
}

std::map<std::string, double> help_metrics(const std::vector<double>& scores,
                                           const std::vector<corpus::HelpExample>& examples, double threshold) {
  std::vector<int> labels;
  labels.reserve(examples.size());
  for (const auto& ex : examples) labels.push_back(ex.label == corpus::HelpLabel::help ? 1 : 0);
  const auto pr = eval::precision_recall(scores, labels, threshold);
  return {{"precision", pr.precision}, {"recall", pr.recall}, {"auroc", eval::auroc(scores, labels)}};
}

eval::TrialMetrics help_trial(const HelpSetup& setup, std::uint64_t seed, const Sink& sink) {
  if (!setup.corpus.help) throw ValidationError("help experiments need a corpus with help injection");
  const auto& known = eval::help_order();
  for (const auto& m : setup.models) {
    if (std::find(known.begin(), known.end(), m) == known.end()) throw ValidationError("unknown help model '" + m + "'");
  }
  const auto synth = corpus::generate_synthetic(setup.corpus, seed);
  const std::size_t V = synth.vocab.size();
  corpus::PrepareOptions popts = setup.prepare;
  popts.seed = derive(seed, 1);
  const auto prepared = corpus::prepare(corpus::preprocess(synth.sequences), synth.vocab, popts);
  const auto& test = prepared.help_test;

  eval::TrialMetrics out;
  auto record = [&](const std::string& name, const std::vector<double>& scores) {
    out[name] = help_metrics(scores, test, setup.threshold);
    if (sink) {
      nlohmann::json j{{"seed", seed}, {"model", name}};
      for (const auto& [k, v] : out[name]) j[k] = v;
      sink(j);
    }
  };
  for (const auto& name : setup.models) {
    const bool use_time = name.find("Time") != std::string::npos;
    std::vector<double> scores;
    if (name.rfind("Random Forest", 0) == 0) {
      help::ForestConfig fc = setup.forest;
      fc.seed = derive(seed, 5);
      const auto f = help::fit_help_forest(prepared.help_train, V, use_time, fc, setup.proj_dim, derive(seed, 6));
      for (const auto& ex : test) scores.push_back(f.score(ex.sequence));
    } else {
      help::HelpConfig hc = setup.lstm;
      hc.vocab_size = V;
      hc.use_time = use_time;
      hc.k = popts.k;
      hc.seed = derive(seed, 7);
      auto [tr, va] = help::stratified_split(prepared.help_train, setup.val_fraction, derive(seed, 8));
      help::HelpLstm model(hc);
      help::train_help_lstm(model, tr, va, sink);
      for (const auto& ex : test) scores.push_back(help::help_score(model, ex.sequence, hc.k));
    }
    record(name, scores);
  }
  return out;
}

}  // namespace taskrec::experiment
