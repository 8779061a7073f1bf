#include <gtest/gtest.h>

#include <set>

#include "taskrec/common.hpp"
#include "taskrec/vocabulary.hpp"

namespace taskrec {
namespace {

TEST(Rng, SameSeedAndStreamGiveSameSequence) {
  Rng a = make_rng(42, 3);
  Rng b = make_rng(42, 3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(Rng, StreamsDiffer) {
  Rng a = make_rng(42, 0);
  Rng b = make_rng(42, 1);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += a() == b();
  EXPECT_LT(same, 2);
}

TEST(Fnv, KnownVectors) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a("foobar"), 0x85944171f73967e8ULL);
}

TEST(Hex64, FixedWidth) {
  EXPECT_EQ(hex64(0), "0000000000000000");
  EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(Argmax, TiesGoToLowestIndex) {
  const std::vector<double> v{0.1, 0.4, 0.4, 0.1};
  EXPECT_EQ(argmax(v), 1u);
}

TEST(TopN, OrdersByProbabilityThenId) {
  const std::vector<double> v{0.2, 0.3, 0.2, 0.3};
  const auto top = top_n(v, 3);
  ASSERT_EQ(top.size(), 3u);
  EXPECT_EQ(top[0].first, 1u);
  EXPECT_EQ(top[1].first, 3u);
  EXPECT_EQ(top[2].first, 0u);
}

TEST(TopN, TruncatesToSize) { EXPECT_EQ(top_n(std::vector<double>{0.5, 0.5}, 10).size(), 2u); }

TEST(Vocabulary, SortedUniqueNames) {
  const auto v = Vocabulary::build({"zoom", "apply", "zoom", "filter"});
  EXPECT_EQ(v.names(), (std::vector<std::string>{"apply", "filter", "zoom"}));
  EXPECT_EQ(*v.find("filter"), 1u);
  EXPECT_FALSE(v.find("nope").has_value());
}

TEST(Vocabulary, HelpIdsOnlyForPresentNames) {
  const auto v = Vocabulary::build({"a", "help", "b"}, {"help", "absent"});
  ASSERT_EQ(v.help_ids().size(), 1u);
  EXPECT_TRUE(v.is_help(*v.find("help")));
  EXPECT_FALSE(v.is_help(*v.find("a")));
}

TEST(Vocabulary, EncodeUnknownThrowsWithoutUnk) {
  const auto v = Vocabulary::build({"a", "b"});
  EXPECT_THROW(v.encode("c"), UnknownCommandError);
}

TEST(Vocabulary, EncodeUnknownMapsToUnk) {
  auto v = Vocabulary::build({"a", "b"});
  const CommandId unk = v.add_unknown();
  EXPECT_EQ(unk, 2u);
  EXPECT_EQ(v.add_unknown(), unk);
  EXPECT_EQ(v.encode("c"), unk);
  EXPECT_EQ(v.encode("a"), 0u);
}

TEST(Vocabulary, JsonRoundTripKeepsHash) {
  auto v = Vocabulary::build({"x", "y", "h"}, {"h"});
  const auto w = Vocabulary::from_json(v.to_json());
  EXPECT_EQ(v, w);
  EXPECT_EQ(v.hash(), w.hash());
}

TEST(Vocabulary, HashDependsOnHelpIds) {
  const auto a = Vocabulary::build({"x", "y"});
  const auto b = Vocabulary::build({"x", "y"}, {"y"});
  EXPECT_NE(a.hash(), b.hash());
}

TEST(Vocabulary, RejectsDuplicateNamesInJson) {
  nlohmann::json j{{"names", {"a", "a"}}, {"help_ids", nlohmann::json::array()}};
  EXPECT_THROW(Vocabulary::from_json(j), ValidationError);
}

}  // namespace
}  // namespace taskrec
