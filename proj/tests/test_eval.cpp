#include <gtest/gtest.h>

#include <cmath>

#include "taskrec/eval.hpp"

namespace taskrec::eval {
namespace {

CommandSequence doc(std::vector<CommandId> c) { return {"u", std::move(c), {}}; }

// Pairwise definition: P(s_pos > s_neg) + 0.5 P(tie).
double pairwise_auroc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[i] != 1 || y[j] != 0) continue;
      pairs += 1.0;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

class Fixed : public Recommender {
 public:
  explicit Fixed(std::vector<double> p) : p_(std::move(p)) {}
  std::string name() const override { return "fixed"; }
  std::size_t vocab_size() const override { return p_.size(); }
  std::vector<double> predict(std::span<const CommandId>) const override { return p_; }

 private:
  std::vector<double> p_;
};

// Knows the successor rule c -> (c + 1) mod V.
class Oracle : public Recommender {
 public:
  explicit Oracle(std::size_t v) : v_(v) {}
  std::string name() const override { return "oracle"; }
  std::size_t vocab_size() const override { return v_; }
  std::vector<double> predict(std::span<const CommandId> prefix) const override {
    std::vector<double> p(v_, 0.1 / static_cast<double>(v_ - 1));
    p[(prefix.back() + 1) % v_] = 0.9;
    return p;
  }

 private:
  std::size_t v_;
};

TEST(Auroc, MatchesPairwiseOracleWithTies) {
  Rng rng = make_rng(1);
  std::uniform_int_distribution<int> score(0, 9);
  std::bernoulli_distribution label(0.3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> s;
    std::vector<int> y;
    for (int i = 0; i < 60; ++i) {
      s.push_back(score(rng) / 10.0);
      y.push_back(label(rng));
    }
    y[0] = 1;
    y[1] = 0;
    EXPECT_NEAR(auroc(s, y), pairwise_auroc(s, y), 1e-12);
  }
}

TEST(Auroc, FixedValues) {
  EXPECT_DOUBLE_EQ(auroc(std::vector<double>{0.1, 0.9}, std::vector<int>{0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(auroc(std::vector<double>{0.9, 0.1}, std::vector<int>{0, 1}), 0.0);
  EXPECT_DOUBLE_EQ(auroc(std::vector<double>{0.5, 0.5}, std::vector<int>{0, 1}), 0.5);
  EXPECT_DOUBLE_EQ(auroc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1}), 0.75);
}

TEST(Auroc, ComplementAndMonotoneInvariance) {
  const std::vector<double> s{0.3, 0.1, 0.7, 0.7, 0.2, 0.9};
  const std::vector<int> y{1, 0, 1, 0, 0, 1};
  std::vector<int> flipped;
  std::vector<double> squashed;
  for (int l : y) flipped.push_back(1 - l);
  for (double v : s) squashed.push_back(std::exp(3.0 * v) - 7.0);
  EXPECT_NEAR(auroc(s, y) + auroc(s, flipped), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(auroc(s, y), auroc(squashed, y));
}

TEST(Auroc, NeedsBothClasses) {
  EXPECT_THROW(auroc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), ValidationError);
  EXPECT_THROW(auroc(std::vector<double>{0.1}, std::vector<int>{1, 0}), ValidationError);
}

TEST(PrecisionRecallTest, Fixture) {
  const std::vector<double> s{0.9, 0.8, 0.4, 0.6, 0.2};
  const std::vector<int> y{1, 0, 1, 1, 0};
  const auto pr = precision_recall(s, y, 0.5);
  EXPECT_DOUBLE_EQ(pr.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(pr.recall, 2.0 / 3.0);
  const auto none = precision_recall(s, y, 0.95);
  EXPECT_EQ(none.precision, 0.0);
  EXPECT_EQ(none.recall, 0.0);
  const auto all = precision_recall(s, y, 0.0);
  EXPECT_DOUBLE_EQ(all.precision, 0.6);
  EXPECT_DOUBLE_EQ(all.recall, 1.0);
  EXPECT_THROW(precision_recall(s, std::vector<int>{0, 0, 0, 0, 0}, 0.5), ValidationError);
}

TEST(TopK, InTopKBreaksTiesByLowerId) {
  const std::vector<double> p{0.2, 0.3, 0.3, 0.2};
  EXPECT_TRUE(in_top_k(p, 1, 1));
  EXPECT_FALSE(in_top_k(p, 2, 1));
  EXPECT_TRUE(in_top_k(p, 2, 2));
  EXPECT_TRUE(in_top_k(p, 0, 3));
  EXPECT_FALSE(in_top_k(p, 3, 3));
  EXPECT_FALSE(in_top_k(p, 9, 4));
}

TEST(TopK, OracleScoresPerfectly) {
  std::vector<CommandSequence> test;
  for (CommandId s = 0; s < 6; ++s) {
    std::vector<CommandId> c;
    for (CommandId t = 0; t < 10; ++t) c.push_back((s + t) % 6);
    test.push_back(doc(c));
  }
  const Oracle o(6);
  const auto r = topk_accuracies(o, test);
  EXPECT_EQ(r.top1, 1.0);
  EXPECT_EQ(r.top5, 1.0);
  EXPECT_EQ(r.points, 6u * 8u);
}

TEST(TopK, UniformModelMatchesTieRule) {
  // Uniform ties rank by id, so only the five lowest ids hit Top-5.
  const std::size_t V = 300;
  const Fixed uniform(std::vector<double>(V, 1.0 / V));
  Rng rng = make_rng(2);
  std::uniform_int_distribution<CommandId> pick(0, V - 1);
  std::vector<CommandSequence> test;
  std::size_t low = 0, points = 0;
  for (int d = 0; d < 200; ++d) {
    std::vector<CommandId> c;
    for (int t = 0; t < 21; ++t) c.push_back(pick(rng));
    for (std::size_t t = 1; t + 1 < c.size(); ++t) {
      low += c[t + 1] < 5;
      ++points;
    }
    test.push_back(doc(c));
  }
  EXPECT_DOUBLE_EQ(topk_accuracy(uniform, test, 5), static_cast<double>(low) / static_cast<double>(points));
  EXPECT_NEAR(topk_accuracy(uniform, test, 5), 5.0 / 300.0, 0.01);
}

TEST(TopK, TopFiveNeverBelowTopOne) {
  Rng rng = make_rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(12);
  for (auto& x : p) x = u(rng);
  const Fixed f(p);
  std::vector<CommandSequence> test;
  std::uniform_int_distribution<CommandId> pick(0, 11);
  for (int d = 0; d < 20; ++d) {
    std::vector<CommandId> c;
    for (int t = 0; t < 8; ++t) c.push_back(pick(rng));
    test.push_back(doc(c));
  }
  const auto r = topk_accuracies(f, test);
  EXPECT_GE(r.top5, r.top1);
  EXPECT_EQ(r.top1, topk_accuracy(f, test, 1));
  EXPECT_EQ(r.top5, topk_accuracy(f, test, 5));
}

TEST(TopK, Errors) {
  const Fixed f({0.5, 0.5});
  EXPECT_THROW(topk_accuracy(f, {}, 1), ValidationError);
  EXPECT_THROW(topk_accuracy(f, {doc({0, 1})}, 1), ValidationError);
  EXPECT_THROW(topk_accuracy(f, {doc({0, 1, 0})}, 0), ValidationError);
}

TEST(Summarize, SampleStandardDeviation) {
  const auto s = summarize({2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0});
  EXPECT_DOUBLE_EQ(s.mean, 5.0);
  EXPECT_NEAR(s.std, std::sqrt(32.0 / 7.0), 1e-12);
  EXPECT_EQ(summarize({3.0}).std, 0.0);
}

TEST(RunTrials, AggregatesAndOrders) {
  const auto report = run_trials(
      [](std::uint64_t seed) {
        TrialMetrics m;
        m["b"]["top1"] = static_cast<double>(seed);
        m["a"]["top1"] = 0.5;
        m["a"]["top5"] = 0.75;
        return m;
      },
      3, 10, "recommendation", {"b"});
  ASSERT_EQ(report.rows.size(), 2u);
  EXPECT_EQ(report.rows[0].model, "b");
  EXPECT_EQ(report.rows[1].model, "a");
  EXPECT_DOUBLE_EQ(report.row("b").metrics.at("top1").mean, 11.0);
  EXPECT_EQ(report.row("b").metrics.at("top1").values, (std::vector<double>{10.0, 11.0, 12.0}));
  EXPECT_THROW(report.row("c"), ValidationError);
  EXPECT_EQ(report.to_json().at("runs"), 3);
}

TEST(RunTrials, FailureCarriesSeed) {
  try {
    run_trials(
        [](std::uint64_t seed) -> TrialMetrics {
          if (seed == 6) throw std::runtime_error("boom");
          return {};
        },
        4, 5, "help");
    FAIL() << "expected TrialError";
  } catch (const TrialError& e) {
    EXPECT_EQ(e.seed(), 6u);
    EXPECT_NE(std::string(e.what()).find("boom"), std::string::npos);
  }
}

TEST(Report, TablesShowMeanAndStd) {
  const auto rec = run_trials(
      [](std::uint64_t s) {
        TrialMetrics m;
        m["vRNN"]["top1"] = 0.1 * static_cast<double>(s);
        m["vRNN"]["top5"] = 0.5;
        return m;
      },
      2, 1, "recommendation", recommender_order(), "abc");
  const auto t = rec.table();
  EXPECT_NE(t.find("Accuracy"), std::string::npos);
  EXPECT_NE(t.find("Top 1"), std::string::npos);
  EXPECT_NE(t.find("0.15 ± 0.07"), std::string::npos);
  EXPECT_NE(t.find("config: abc"), std::string::npos);

  const auto help = run_trials(
      [](std::uint64_t) {
        TrialMetrics m;
        m["LSTM Classifier (Time ⊕ Commands)"] = {{"precision", 0.5}, {"recall", 0.25}, {"auroc", 0.9}};
        return m;
      },
      1, 1, "help", help_order());
  const auto h = help.table();
  EXPECT_NE(h.find("Help Prediction Models"), std::string::npos);
  EXPECT_NE(h.find("0.90 ± 0.00"), std::string::npos);
}

TEST(Fingerprint, StableAndSensitive) {
  const nlohmann::json a{{"k", 1}};
  EXPECT_EQ(fingerprint(a, {"x"}), fingerprint(a, {"x"}));
  EXPECT_NE(fingerprint(a, {"x"}), fingerprint(a, {"y"}));
  EXPECT_NE(fingerprint(a), fingerprint(nlohmann::json{{"k", 2}}));
}

TEST(Orders, CoverEveryModel) {
  EXPECT_EQ(recommender_order().size(), 6u);
  EXPECT_EQ(help_order().size(), 4u);
}

}  // namespace
}  // namespace taskrec::eval
