#include <gtest/gtest.h>

#include <cmath>

#include "taskrec/eval.hpp"
#include "taskrec/help.hpp"

namespace taskrec::help {
namespace {

using corpus::HelpLabel;

constexpr std::size_t kVocab = 20;

Rng& shared_rng(std::uint64_t seed) {
  static Rng rng;
  rng = make_rng(seed);
  return rng;
}

CommandSequence random_seq(Rng& rng, std::size_t len, double max_gap) {
  std::uniform_int_distribution<CommandId> pick(0, kVocab - 1);
  std::uniform_real_distribution<double> gap(0.0, max_gap);
  CommandSequence s{"u", {}, {}};
  for (std::size_t t = 0; t < len; ++t) {
    CommandId c = pick(rng);
    // No immediate repeats, so random sequences carry no loops.
    while (t > 1 && c == s.commands[t - 2]) c = pick(rng);
    s.commands.push_back(c);
    s.gaps.push_back(t == 0 ? 0.0 : gap(rng));
  }
  return s;
}

// Two-command cycle A B A B ... starting at `start`, repeated `reps` times.
void plant_loop(CommandSequence& s, std::size_t start, std::size_t reps, Rng& rng) {
  std::uniform_int_distribution<CommandId> pick(0, kVocab - 1);
  const CommandId a = pick(rng);
  CommandId b = pick(rng);
  while (b == a) b = pick(rng);
  for (std::size_t i = 0; i < 2 * reps && start + i < s.size(); ++i) s.commands[start + i] = i % 2 == 0 ? a : b;
}

bool has_loop(const CommandSequence& s) {
  const auto& c = s.commands;
  for (std::size_t i = 0; i + 6 <= c.size(); ++i) {
    bool ok = c[i] != c[i + 1];
    for (std::size_t j = i + 2; ok && j < i + 6; ++j) ok = c[j] == c[j - 2];
    if (ok) return true;
  }
  return false;
}

std::vector<HelpExample> loop_benchmark(std::size_t n_pos, std::size_t n_neg, std::uint64_t seed) {
  Rng& rng = shared_rng(seed);
  std::vector<HelpExample> out;
  for (std::size_t i = 0; i < n_pos; ++i) {
    auto s = random_seq(rng, 21, 10.0);
    plant_loop(s, 12, 3, rng);
    out.push_back({s, HelpLabel::help});
  }
  for (std::size_t i = 0; i < n_neg; ++i) out.push_back({random_seq(rng, 21, 10.0), HelpLabel::no_help});
  return out;
}

// Classes differ only in one long pause.
std::vector<HelpExample> pause_benchmark(std::size_t n_pos, std::size_t n_neg, std::uint64_t seed) {
  Rng& rng = shared_rng(seed);
  std::uniform_int_distribution<std::size_t> where(8, 20);
  std::uniform_real_distribution<double> pause(60.0, 180.0);
  std::vector<HelpExample> out;
  for (std::size_t i = 0; i < n_pos; ++i) {
    auto s = random_seq(rng, 21, 10.0);
    s.gaps[where(rng)] = pause(rng);
    out.push_back({s, HelpLabel::help});
  }
  for (std::size_t i = 0; i < n_neg; ++i) out.push_back({random_seq(rng, 21, 10.0), HelpLabel::no_help});
  return out;
}

HelpConfig small_config(bool use_time) {
  HelpConfig c;
  c.vocab_size = kVocab;
  c.use_time = use_time;
  c.max_epochs = 40;
  c.patience = 10;
  c.lr = 5e-3;
  return c;
}

double auroc_of(const HelpLstm& m, const std::vector<HelpExample>& examples) {
  std::vector<double> scores;
  std::vector<int> labels;
  for (const auto& e : examples) {
    scores.push_back(help_score(m, e.sequence, m.config().k));
    labels.push_back(e.label == HelpLabel::help);
  }
  return eval::auroc(scores, labels);
}

// ------------------------------------------------------------ projection

TEST(Projection, DeterministicUnderSeed) {
  EXPECT_EQ(make_projection(30, 8, 4).codes, make_projection(30, 8, 4).codes);
  EXPECT_NE(make_projection(30, 8, 4).codes, make_projection(30, 8, 5).codes);
}

TEST(Projection, ColumnMeansNearZeroAtThreeHundredCommands) {
  const auto p = make_projection(300, 8, 1);
  for (Eigen::Index j = 0; j < 8; ++j) EXPECT_LT(std::abs(p.codes.col(j).mean()), 0.1);
  const double var = (p.codes.array().square()).mean();
  EXPECT_NEAR(var, 1.0 / 8.0, 0.02);
}

TEST(Projection, FullWidthIsStillGaussian) {
  const auto p = make_projection(6, 6, 2);
  EXPECT_FALSE(p.codes.isIdentity());
}

TEST(Projection, Errors) {
  EXPECT_THROW(make_projection(5, 0, 1), ValidationError);
  EXPECT_THROW(make_projection(0, 8, 1), ValidationError);
}

// ------------------------------------------------------------ featurize

TEST(Featurize, SingleStepMeanEqualsMax) {
  const auto p = make_projection(5, 8, 3);
  const CommandSequence s{"u", {2}, {0.0}};
  const auto f = featurize_rf(s, p);
  ASSERT_EQ(f.size(), 19u);
  for (std::size_t j = 0; j < 9; ++j) EXPECT_EQ(f[j], f[9 + j]);
  EXPECT_EQ(f[18], 1.0);
}

TEST(Featurize, DuplicatingStepsDoublesOnlyLength) {
  const auto p = make_projection(5, 8, 3);
  const CommandSequence s{"u", {0, 3, 1}, {0.0, 4.0, 2.5}};
  const CommandSequence d{"u", {0, 0, 3, 3, 1, 1}, {0.0, 0.0, 4.0, 4.0, 2.5, 2.5}};
  const auto a = featurize_rf(s, p);
  const auto b = featurize_rf(d, p);
  for (std::size_t j = 0; j < 18; ++j) EXPECT_NEAR(a[j], b[j], 1e-15);
  EXPECT_EQ(b[18], 2 * a[18]);
}

TEST(Featurize, HandComputedTwoSteps) {
  ProjectionMatrix p;
  p.codes.resize(2, 8);
  for (int j = 0; j < 8; ++j) {
    p.codes(0, j) = 0.5 * j - 1.0;
    p.codes(1, j) = 1.0 - 0.25 * j;
  }
  const CommandSequence s{"u", {0, 1}, {0.0, 7.0}};
  const auto f = featurize_rf(s, p);
  const std::vector<double> expected{
      // mean
      0.0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 3.5,
      // max
      1.0, 0.75, 0.5, 0.5, 1.0, 1.5, 2.0, 2.5, 7.0,
      // length
      2.0};
  ASSERT_EQ(f.size(), expected.size());
  for (std::size_t j = 0; j < f.size(); ++j) EXPECT_DOUBLE_EQ(f[j], expected[j]) << j;
}

TEST(Featurize, WithoutTimeHasSeventeenValues) {
  const auto p = make_projection(5, 8, 3);
  EXPECT_EQ(featurize_rf({"u", {1, 2}, {0.0, 3.0}}, p, false).size(), 17u);
}

TEST(Featurize, Errors) {
  const auto p = make_projection(5, 8, 3);
  EXPECT_THROW(featurize_rf({"u", {}, {}}, p), ValidationError);
  EXPECT_THROW(featurize_rf({"u", {9}, {0.0}}, p), ValidationError);
}

TEST(HelpForestModel, SeparatesPauseBenchmarkWithTime) {
  const auto train = pause_benchmark(80, 240, 1);
  const auto test = pause_benchmark(40, 120, 2);
  const auto timed = fit_help_forest(train, kVocab, true, {});
  const auto untimed = fit_help_forest(train, kVocab, false, {});
  std::vector<double> st, su;
  std::vector<int> y;
  for (const auto& e : test) {
    st.push_back(timed.score(e.sequence));
    su.push_back(untimed.score(e.sequence));
    y.push_back(e.label == HelpLabel::help);
  }
  EXPECT_GT(eval::auroc(st, y), 0.95);
  EXPECT_GT(eval::auroc(st, y), eval::auroc(su, y));
  const auto back = HelpForest::from_json(timed.to_json());
  EXPECT_EQ(back.score(test[0].sequence), timed.score(test[0].sequence));
}

// ------------------------------------------------------------ LSTM classifier

TEST(HelpLstmModel, OnlineFinalStepEqualsTrainingMode) {
  HelpConfig c = small_config(true);
  c.init_scale = 0.3;
  const HelpLstm m(c);
  for (const auto& e : loop_benchmark(5, 5, 3)) {
    HelpStream stream(m);
    double last = 0.0;
    for (std::size_t t = 0; t < e.sequence.size(); ++t) last = stream.push(e.sequence.commands[t], e.sequence.gaps[t]);
    EXPECT_EQ(last, m.final_probability(e.sequence));
    const auto pred = predict_help_online(m, e.sequence, 8, 0.5);
    EXPECT_EQ(pred.probs.back(), m.final_probability(e.sequence));
  }
}

TEST(HelpLstmModel, ExtendingAStreamKeepsEmittedProbabilities) {
  HelpConfig c = small_config(true);
  c.init_scale = 0.3;
  const HelpLstm m(c);
  const auto e = loop_benchmark(1, 0, 4).front();
  CommandSequence prefix = e.sequence;
  prefix.commands.resize(14);
  prefix.gaps.resize(14);
  const auto a = predict_help_online(m, prefix, 8, 0.5);
  const auto b = predict_help_online(m, e.sequence, 8, 0.5);
  ASSERT_EQ(a.probs.size(), 6u);
  for (std::size_t i = 0; i < a.probs.size(); ++i) EXPECT_EQ(a.probs[i], b.probs[i]);
  for (double p : b.probs) {
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
}

TEST(HelpLstmModel, ThresholdExtremes) {
  const HelpLstm m(small_config(true));
  const auto e = loop_benchmark(1, 0, 5).front();
  const auto never = predict_help_online(m, e.sequence, 8, 1.0 + 1e-9);
  EXPECT_FALSE(never.alarm);
  EXPECT_FALSE(never.first_alarm_index.has_value());
  const auto always = predict_help_online(m, e.sequence, 8, 0.0);
  EXPECT_TRUE(always.alarm);
  EXPECT_EQ(always.first_alarm_index, 8u);
  EXPECT_EQ(always.probs.size(), e.sequence.size() - 8);
}

TEST(HelpLstmModel, ShortStreamHasNoContext) {
  const HelpLstm m(small_config(true));
  const CommandSequence s{"u", {1, 2, 3}, {0.0, 1.0, 1.0}};
  EXPECT_THROW(predict_help_online(m, s, 8, 0.5), ValidationError);
  EXPECT_TRUE(predict_help_online(m, s, 3, 0.5).probs.empty());
  EXPECT_EQ(help_score(m, s, 8), m.final_probability(s));
}

TEST(HelpLstmModel, GradientsMatchFiniteDifferences) {
  for (bool use_time : {false, true}) {
    HelpConfig c = small_config(use_time);
    c.log_time = use_time;
    c.hidden_dim = 6;
    c.layers = 2;
    c.init_scale = 0.3;
    HelpLstm m(c);
    auto ex = loop_benchmark(2, 2, 6);
    for (auto& e : ex) {
      e.sequence.commands.resize(10);
      e.sequence.gaps.resize(10);
    }
    const auto res = gradient_check(m, ex, 1e-5, 300, 7);
    EXPECT_LT(res.max_relative_error, 1e-3) << res.worst_tensor;
  }
}

TEST(HelpLstmModel, LearnsPlantedLoops) {
  const auto all = loop_benchmark(500, 500, 8);
  const auto [train, val] = stratified_split(all, 0.2, 1);
  HelpLstm m(small_config(false));
  const auto report = train_help_lstm(m, train, val);
  EXPECT_GE(report.best_val_auroc, 0.9);
  EXPECT_GE(auroc_of(m, loop_benchmark(50, 50, 9)), 0.9);

  // Loop planted at step 12: the alarm should fire somewhere from step k on.
  std::size_t fired = 0;
  const auto fresh = loop_benchmark(100, 0, 10);
  for (const auto& e : fresh) {
    const auto pred = predict_help_online(m, e.sequence, 8, 0.5);
    fired += pred.first_alarm_index.has_value() && *pred.first_alarm_index >= 8 &&
             *pred.first_alarm_index < e.sequence.size();
  }
  EXPECT_GE(static_cast<double>(fired) / static_cast<double>(fresh.size()), 0.8);
}

TEST(HelpLstmModel, TimeHelpsWhenOnlyGapsDiffer) {
  const auto all = pause_benchmark(150, 150, 11);
  const auto [train, val] = stratified_split(all, 0.2, 2);
  const auto test = pause_benchmark(60, 60, 12);
  HelpLstm timed(small_config(true));
  HelpLstm untimed(small_config(false));
  train_help_lstm(timed, train, val);
  train_help_lstm(untimed, train, val);
  EXPECT_GT(auroc_of(timed, test), auroc_of(untimed, test));
}

TEST(HelpLstmModel, TruePositivesEnrichedForLoops) {
  // Positives carry a loop or a long pause; negatives carry neither.
  auto loops = loop_benchmark(400, 800, 13);
  const auto pauses = pause_benchmark(400, 0, 14);
  loops.insert(loops.end(), pauses.begin(), pauses.end());
  const auto [train, val] = stratified_split(loops, 0.2, 3);
  HelpLstm m(small_config(true));
  train_help_lstm(m, train, val);

  auto test = loop_benchmark(50, 100, 15);
  const auto test_pauses = pause_benchmark(50, 0, 16);
  test.insert(test.end(), test_pauses.begin(), test_pauses.end());
  double tp = 0.0, tp_loops = 0.0, neg = 0.0, neg_loops = 0.0;
  for (const auto& e : test) {
    const bool loop = has_loop(e.sequence);
    if (e.label == HelpLabel::help) {
      if (help_score(m, e.sequence, 8) >= 0.5) {
        tp += 1.0;
        tp_loops += loop;
      }
    } else {
      neg += 1.0;
      neg_loops += loop;
    }
  }
  ASSERT_GT(tp, 0.0);
  EXPECT_GT(tp_loops, 0.0);
  EXPECT_GE(tp_loops / tp, 2.0 * neg_loops / neg);
}

TEST(HelpLstmModel, TrainingIsDeterministic) {
  const auto all = loop_benchmark(20, 20, 17);
  const auto [train, val] = stratified_split(all, 0.25, 4);
  HelpConfig c = small_config(true);
  c.max_epochs = 3;
  HelpLstm a(c), b(c);
  std::size_t lines = 0;
  train_help_lstm(a, train, val, [&](const nlohmann::json&) { ++lines; });
  train_help_lstm(b, train, val);
  EXPECT_EQ(neural::flatten_values(a.tensors()), neural::flatten_values(b.tensors()));
  EXPECT_GE(lines, 1u);
}

TEST(StratifiedSplit, KeepsClassProportions) {
  const auto all = loop_benchmark(40, 200, 18);
  const auto [train, val] = stratified_split(all, 0.1, 5);
  std::size_t pos = 0;
  for (const auto& e : val) pos += e.label == HelpLabel::help;
  EXPECT_EQ(pos, 4u);
  EXPECT_EQ(val.size(), 24u);
  EXPECT_EQ(train.size() + val.size(), all.size());
  EXPECT_THROW(stratified_split(all, 1.0, 5), ValidationError);
}

TEST(HelpConfigJson, RoundTrip) {
  HelpConfig c = small_config(true);
  c.log_time = true;
  c.threshold = 0.3;
  EXPECT_EQ(HelpConfig::from_json(c.to_json()).to_json(), c.to_json());
  EXPECT_FALSE(HelpConfig{}.log_time);
}

}  // namespace
}  // namespace taskrec::help
