#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "bomai/errors.hpp"
#include "bomai/mentor.hpp"
#include "bomai/planning.hpp"
#include "bomai/tabular.hpp"
#include "support.hpp"

namespace bomai {
namespace {

using ::testing::HasSubstr;
constexpr std::uint64_t kCap = 1'000'000;

TEST(StationaryMentor, DeterministicPolicyAlwaysPlaysItsAction) {
  const auto m = test::stationary("b", {0, 1});
  const CounterRng rng(1);
  History h;
  for (int t = 0; t < 20; ++t) {
    const ActionIndex a = mentor_action(*m, h, *m->start(), rng);
    EXPECT_EQ(a, 1);
    h.items.push_back({a, 1, 0});
  }
  EXPECT_EQ(m->start()->action_distribution(), (std::vector<Rational>{0, 1}));
  EXPECT_EQ(m->start()->after({1, 1, 0})->action_distribution(), (std::vector<Rational>{0, 1}));
}

TEST(StationaryMentor, RejectsNonDistributions) {
  EXPECT_THROW(StationaryMentor("x", {ratio(1, 2), ratio(1, 4)}), std::invalid_argument);
  EXPECT_THROW(StationaryMentor("x", {Rational(2), Rational(-1)}), std::invalid_argument);
  EXPECT_THROW(StationaryMentor("x", {}), std::invalid_argument);
}

TEST(StationaryMentor, SeededUniformSequenceIsReproducible) {
  const auto m = test::stationary("u", {ratio(1, 2), ratio(1, 2)});
  auto sequence = [&](std::uint64_t seed) {
    const CounterRng rng(seed);
    History h;
    std::vector<ActionIndex> out;
    for (int t = 0; t < 64; ++t) {
      out.push_back(mentor_action(*m, h, *m->start(), rng));
      h.items.push_back({out.back(), 1, 0});
    }
    return out;
  };
  EXPECT_EQ(sequence(3), sequence(3));
  EXPECT_NE(sequence(3), sequence(4));
}

TEST(StationaryMentor, EmpiricalFrequenciesWithinThreeSigma) {
  const std::vector<Rational> dist{ratio(1, 5), ratio(1, 2), ratio(3, 10)};
  const auto m = test::stationary("s", dist);
  const CounterRng rng(2024);
  constexpr int n = 10000;
  std::vector<int> counts(3, 0);
  const History h;
  for (std::uint64_t i = 0; i < n; ++i)
    ++counts[m->act(h, *m->start(), rng.bits({DrawPurpose::mentor, i, 0}))];
  for (std::size_t a = 0; a < 3; ++a) {
    const double p = to_double(dist[a]);
    EXPECT_NEAR(counts[a] / double(n), p, 3 * std::sqrt(p * (1 - p) / n)) << a;
  }
}

TEST(ExpertMentor, PlaysTheExpectimaxPlanAgainstItsModel) {
  const auto family = make_boxed_room_family(BoxedRoomParams{});
  const auto& mu = family.models[family.truth];
  const ExpertMentor expert("expert", mu, family.spaces, kCap);
  const CounterRng rng(0);
  History h;
  const EpisodePlan plan = optimal_policy(*mu->start(), family.spaces, 2, kCap);
  EXPECT_EQ(mentor_action(expert, h, *expert.start(), rng), plan.first_action());
  EXPECT_EQ(expert.start()->action_distribution()[plan.first_action()], 1);

  // After asking and hearing task B the expert answers b.
  h.items.push_back({0, 2, 0});
  h.exploration_flags = {1};
  const auto tracked = expert.start()->after(h.items[0]);
  EXPECT_EQ(mentor_action(expert, h, *tracked, rng), 1);
  EXPECT_EQ(tracked->action_distribution(), (std::vector<Rational>{0, 1}));
}

TEST(ExpertMentor, ImpossibleHistoriesFallBackToActionZero) {
  const auto family = make_boxed_room_family(BoxedRoomParams{});
  const ExpertMentor expert("expert", family.models[0], family.spaces, kCap);
  // Asking never pays, so reward 1 is impossible.
  History h{{{0, 2, 1}}, {1}};
  const auto tracked = expert.start()->after(h.items[0]);
  EXPECT_EQ(expert.act(h, *tracked, 0), 0);
  EXPECT_EQ(tracked->action_distribution(), (std::vector<Rational>{1, 0}));
}

TEST(InteractiveMentor, RepromptsOnUnknownTokens) {
  const auto s = test::binary_spaces(2);
  std::istringstream in("zzz b");
  std::ostringstream out;
  InteractiveMentor m("human", s, in, out);
  EXPECT_EQ(m.kind(), MentorKind::interactive);
  History h{{{0, 1, 0}}, {1}};
  EXPECT_EQ(m.act(h, *m.start(), 0), 1);
  const std::string transcript = out.str();
  EXPECT_THAT(transcript, HasSubstr("unknown action 'zzz'"));
  EXPECT_THAT(transcript, HasSubstr("a/A/0"));
  EXPECT_THAT(transcript, HasSubstr("episode 0 step 1 actions: a b"));
}

TEST(InteractiveMentor, GivesUpAfterBoundedRetries) {
  const auto s = test::binary_spaces(1);
  std::istringstream in("x y z b");
  std::ostringstream out;
  InteractiveMentor m("human", s, in, out, 2);
  EXPECT_THROW(m.act(History{}, *m.start(), 0), Error);
  std::istringstream closed("");
  InteractiveMentor m2("human", s, closed, out);
  EXPECT_THROW(m2.act(History{}, *m2.start(), 0), Error);
}

TEST(InteractiveMentor, HasNoDistributionAndCannotJoinAClass) {
  const auto s = test::binary_spaces(1);
  std::istringstream in;
  std::ostringstream out;
  auto m = std::make_shared<InteractiveMentor>("human", s, in, out);
  EXPECT_THROW(m->start()->action_distribution(), InvariantViolation);
  EXPECT_THROW(PolicyClass({m}, 0), ConfigError);
}

TEST(PolicyClass, BuiltinNamesAndTruthFlag) {
  const auto family = make_boxed_room_family(BoxedRoomParams{});
  const auto cls = builtin_policy_class({"expert", "uniform", "always_b"}, "uniform",
                                        family.models[0], family.spaces, kCap);
  ASSERT_EQ(cls.size(), 3u);
  EXPECT_EQ(cls.truth(), 1u);
  EXPECT_EQ(cls.true_mentor().id(), "uniform");
  EXPECT_EQ(cls.find("always_b"), 2u);
  EXPECT_EQ(cls.find("nobody"), 3u);
  EXPECT_EQ(cls[1].start()->action_distribution(),
            (std::vector<Rational>{ratio(1, 2), ratio(1, 2)}));
  EXPECT_EQ(cls[2].start()->action_distribution(), (std::vector<Rational>{0, 1}));
  EXPECT_NE(dynamic_cast<const ExpertMentor*>(&cls[0]), nullptr);
}

TEST(PolicyClass, ConstructionErrors) {
  const auto family = make_boxed_room_family(BoxedRoomParams{});
  const auto& mu = family.models[0];
  const auto& s = family.spaces;
  EXPECT_THROW(builtin_policy_class({"expert", "uniform"}, "always_a", mu, s, kCap), ConfigError);
  EXPECT_THROW(builtin_policy_class({"expert", "sloppy"}, "expert", mu, s, kCap), ConfigError);
  EXPECT_THROW(builtin_policy_class({"always_c"}, "always_c", mu, s, kCap), ConfigError);
  EXPECT_THROW(builtin_policy_class({"uniform", "uniform"}, "uniform", mu, s, kCap), ConfigError);
  EXPECT_THROW(PolicyClass({}, 0), ConfigError);
  EXPECT_THROW(PolicyClass({test::stationary("x", {1, 0})}, 1), ConfigError);
}

}  // namespace
}  // namespace bomai
