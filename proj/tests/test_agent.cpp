#include <gtest/gtest.h>

#include <cmath>

#include "bomai/acceptance.hpp"
#include "bomai/agent.hpp"
#include "bomai/errors.hpp"
#include "bomai/planning.hpp"
#include "support.hpp"

namespace bomai {
namespace {

using test::binary_spaces;
using test::iid_model;

constexpr Percept kA0{1, 0};
constexpr Percept kA1{1, 1};
constexpr Percept kB0{2, 0};
constexpr Percept kB1{2, 1};
constexpr std::uint64_t kCap = 1'000'000;

std::shared_ptr<const Prior> shared_prior(const std::vector<ModelPtr>& models,
                                          std::size_t policies, Rational eta = 1) {
  return std::make_shared<const Prior>(make_prior(models, policies, ratio(1, 2), eta));
}

std::shared_ptr<const PolicyClass> policy_class(std::vector<MentorPtr> mentors,
                                                std::size_t truth = 0) {
  return std::make_shared<const PolicyClass>(std::move(mentors), truth);
}

// Expected reward summed over every enumerated episode.
Rational path_sum_value(const TabularModel& model, const InteractionSpaces& s,
                        const std::vector<Rational>& policy) {
  Rational v = 0;
  for (const auto& h : enumerate_episode_histories(s, kCap)) {
    Rational p = forward_probability(model, h);
    for (const Step& st : h) p *= policy[st.action];
    if (p == 0) continue;
    Rational r = 0;
    for (const Step& st : h) r += s.reward_value(st.reward);
    v += p * r;
  }
  return v;
}

// ---------------------------------------------------------------------------
// MAP selection

TEST(MapModel, PicksTheLargestWeightAndBreaksTiesLow) {
  const auto s = binary_spaces(1);
  std::vector<ModelPtr> models{
      iid_model(s, "x", {{{kA0, ratio(1, 2)}, {kB0, ratio(1, 2)}}, {{kA0, 1}}}),
      iid_model(s, "y", {{{kA0, ratio(1, 4)}, {kB0, ratio(3, 4)}}, {{kA0, 1}}})};
  JointPosterior post(shared_prior(models, 1), models);
  EXPECT_EQ(map_model(post).index, 0u);
  EXPECT_EQ(map_model(post).weight, ratio(1, 2));
  const auto two_thirds = update_world_posterior(post, Step{0, 1, 0});
  EXPECT_EQ(map_model(two_thirds).index, 0u);
  EXPECT_EQ(map_model(two_thirds).weight, ratio(2, 3));
  const auto flipped = update_world_posterior(post, Step{0, 2, 0});
  EXPECT_EQ(map_model(flipped).index, 1u);
  EXPECT_EQ(map_model(flipped).weight, ratio(3, 5));
}

TEST(MapModel, SurvivorAfterElimination) {
  const auto s = binary_spaces(1);
  std::vector<ModelPtr> models{test::constant_model(s, "A", kA1),
                               test::constant_model(s, "B", kB1)};
  JointPosterior post(shared_prior(models, 1), models);
  EXPECT_EQ(map_model(update_world_posterior(post, Step{0, 2, 1})).index, 1u);
}

// ---------------------------------------------------------------------------
// Values and plans

TEST(Value, DeterministicRewardOneAtBothSteps) {
  const auto s = binary_spaces(2);
  const auto model = test::constant_model(s, "ones", kA1);
  const auto pol = test::stationary("u", {ratio(1, 2), ratio(1, 2)})->start();
  EXPECT_EQ(value(*pol, *model->start(), s, 2, kCap), 2);
  EXPECT_EQ(value(*pol, *model->start(), s, 0, kCap), 0);
}

TEST(Value, MatchesPathEnumerationOnRandomModels) {
  const auto s = binary_spaces(2);
  const CounterRng rng(31);
  for (std::uint64_t tag = 0; tag < 30; ++tag) {
    const auto model = random_tabular_model(s, 3, rng, tag);
    const std::vector<Rational> dist{ratio(1 + tag % 4, 5), 1 - ratio(1 + tag % 4, 5)};
    const auto pol = test::stationary("p", dist)->start();
    EXPECT_EQ(value(*pol, *model->start(), s, 2, kCap), path_sum_value(*model, s, dist));
  }
}

TEST(Value, CapIsEnforced) {
  const auto s = binary_spaces(2);
  const auto model = test::constant_model(s, "ones", kA1);
  const auto pol = test::stationary("u", {ratio(1, 2), ratio(1, 2)})->start();
  EXPECT_THROW(value(*pol, *model->start(), s, 2, 2), CapExceeded);
  EXPECT_THROW(optimal_policy(*model->start(), s, 2, 2), CapExceeded);
}

TEST(OptimalPolicy, OneStepPicksTheBestAction) {
  const auto s = binary_spaces(1);
  const auto model = iid_model(s, "m", {{{kA0, 1}}, {{kA1, ratio(1, 3)}, {kA0, ratio(2, 3)}}});
  const EpisodePlan plan = optimal_policy(*model->start(), s, 1, kCap);
  EXPECT_EQ(plan.first_action(), 1);
  EXPECT_EQ(plan.value(), ratio(1, 3));
}

TEST(OptimalPolicy, TiesGoToTheLowestAction) {
  const auto s = binary_spaces(2);
  const auto model = test::constant_model(s, "flat", kA1);
  const EpisodePlan plan = optimal_policy(*model->start(), s, 2, kCap);
  EXPECT_EQ(plan.first_action(), 0);
  EXPECT_EQ(plan.action_at(std::vector<Step>{{0, 1, 1}}), 0);
  EXPECT_EQ(plan.value(), 2);
}

TEST(OptimalPolicy, AvoidsTheDelayedRewardTrap) {
  // Rewards {0, 1/2, 1}. Action a pays 1/2 now and leads to a dead state;
  // b pays nothing now and leads to a state that pays 1.
  const InteractionSpaces s({"a", "b"}, {"o"}, {Rational(0), ratio(1, 2), Rational(1)}, 2);
  const Percept half{1, 1}, none{1, 0}, full{1, 2};
  std::vector<std::vector<std::vector<KernelOutcome>>> kernel{
      {{{half, 1, 1}}, {{none, 2, 1}}},
      {{{none, 1, 1}}, {{none, 1, 1}}},
      {{{full, 2, 1}}, {{full, 2, 1}}}};
  TabularModel model({"trap", 1, {}, 1}, s, {"start", "dead", "good"}, 0, kernel);
  // Greedy on the immediate reward would pick a.
  const auto first = model.start()->predict(0);
  EXPECT_EQ(first[0].first, half);
  const EpisodePlan plan = optimal_policy(*model.start(), s, 2, kCap);
  EXPECT_EQ(plan.first_action(), 1);
  EXPECT_EQ(plan.value(), 1);
  EXPECT_EQ(brute_force_optimal_value(model, s, {1, 0, 0}, 2), 1);
}

TEST(OptimalPolicy, BeatsRandomPoliciesAndMatchesTheOracle) {
  const auto s = binary_spaces(2);
  const CounterRng rng(77);
  for (std::uint64_t tag = 0; tag < 30; ++tag) {
    const auto model = random_tabular_model(s, 3, rng, tag);
    const EpisodePlan plan = optimal_policy(*model->start(), s, 2, kCap);
    EXPECT_EQ(value(*plan.policy(2), *model->start(), s, 2, kCap), plan.value());
    std::vector<Rational> belief(model->num_states(), 0);
    belief[0] = 1;
    EXPECT_EQ(plan.value(), brute_force_optimal_value(*model, s, belief, 2));
    for (int i = 0; i < 20; ++i) {
      const Rational q = ratio(i + 1, 22);
      const auto pol = test::stationary("r", {q, 1 - q})->start();
      EXPECT_GE(plan.value(), value(*pol, *model->start(), s, 2, kCap));
    }
  }
}

TEST(OptimalPolicy, OffPlanSuffixesGetActionZero) {
  const auto s = binary_spaces(2);
  const auto model = iid_model(s, "m", {{{kA0, 1}}, {{kA1, 1}}});
  const EpisodePlan plan = optimal_policy(*model->start(), s, 2, kCap);
  EXPECT_EQ(plan.first_action(), 1);
  EXPECT_EQ(plan.action_at(std::vector<Step>{{1, 1, 1}}), 1);
  EXPECT_EQ(plan.action_at(std::vector<Step>{{0, 1, 0}}), 0);
  EXPECT_EQ(plan.action_at(std::vector<Step>{{1, 2, 1}}), 0);
}

// ---------------------------------------------------------------------------
// Information gain and exploration probability

TEST(InfoGain, PointMassPosteriorGivesZero) {
  const auto s = binary_spaces(1);
  std::vector<ModelPtr> models{
      iid_model(s, "x", {{{kA0, ratio(1, 2)}, {kB1, ratio(1, 2)}}, {{kA1, 1}}})};
  const auto mentor = test::stationary("u", {ratio(1, 2), ratio(1, 2)});
  JointPosterior post(shared_prior(models, 1), models);
  EXPECT_EQ(info_gain(post, {mentor->start()}, 1, kCap), 0.0);
}

TEST(InfoGain, FullyDistinguishingOutcomeGivesLogTwo) {
  const auto s = binary_spaces(1);
  std::vector<ModelPtr> models{test::constant_model(s, "A", kA1),
                               test::constant_model(s, "B", kB1)};
  const auto mentor = test::stationary("u", {ratio(1, 2), ratio(1, 2)});
  JointPosterior post(shared_prior(models, 1), models);
  EXPECT_NEAR(info_gain(post, {mentor->start()}, 1, kCap), std::log(2.0), 1e-12);
}

TEST(InfoGain, IsNonNegativeAndZeroOnlyWhenNothingCanBeLearned) {
  const auto s = binary_spaces(1);
  const CounterRng rng(5);
  for (std::uint64_t trial = 0; trial < 30; ++trial) {
    std::vector<ModelPtr> models;
    for (std::uint64_t k = 0; k < 2; ++k)
      models.push_back(random_tabular_model(s, 2, rng, 10 * trial + k));
    std::vector<MentorPtr> mentors{test::stationary("p", {ratio(1, 3), ratio(2, 3)}),
                                   test::stationary("q", {ratio(1, 2), ratio(1, 2)})};
    JointPosterior post(shared_prior(models, 2), models);
    const std::vector<PolicyStatePtr> states{mentors[0]->start(), mentors[1]->start()};
    const double ig = info_gain(post, states, 1, kCap);
    EXPECT_GE(ig, 0.0);
    // Policies always differ on some action, so some outcome moves the posterior.
    EXPECT_GT(ig, 0.0);
  }
  // Identical worlds and identical policies: nothing to learn.
  std::vector<ModelPtr> same{test::constant_model(s, "x", kA1), test::constant_model(s, "y", kA1)};
  const auto u = test::stationary("u", {ratio(1, 2), ratio(1, 2)});
  JointPosterior post(shared_prior(same, 2), same);
  EXPECT_EQ(info_gain(post, {u->start(), u->start()}, 1, kCap), 0.0);
}

TEST(ExplorationProbability, Examples) {
  EXPECT_EQ(exploration_probability(0.0, 1), 0.0);
  EXPECT_EQ(exploration_probability(0.5, 4), 1.0);
  EXPECT_EQ(exploration_probability(0.25, 1), 0.25);
  EXPECT_EQ(exploration_probability(0.25, ratio(1, 2)), 0.125);
}

// ---------------------------------------------------------------------------
// Episodes

struct TwoWorlds {
  InteractionSpaces s = binary_spaces(2);
  // Action a pays 1; the worlds differ only in the observation.
  std::vector<ModelPtr> models{iid_model(s, "A", {{{kA1, 1}}, {{kA0, 1}}}),
                               iid_model(s, "B", {{{kB1, 1}}, {{kB0, 1}}})};
  std::vector<MentorPtr> mentors{test::stationary("always_b", {0, 1}),
                                 test::stationary("always_a", {1, 0})};
};

TEST(RunEpisode, ZeroExplorationFollowsThePlan) {
  TwoWorlds u;
  Agent agent(u.s, u.models, policy_class(u.mentors), shared_prior(u.models, 2), kCap);
  Environment env(u.models[0]);
  EpisodeStart start = agent.plan_episode();
  EXPECT_EQ(start.plan.first_action(), 0);
  start.p_exp = 0;
  const auto result = agent.play_episode(start, env, CounterRng(1));
  EXPECT_FALSE(result.decision.explore);
  for (const Step& st : result.steps) EXPECT_EQ(st.action, 0);
  // No mentor evidence from a non-exploratory episode.
  EXPECT_EQ(agent.posterior().policy_weights(), (std::vector<Rational>{ratio(1, 2), ratio(1, 2)}));
  EXPECT_EQ(agent.history().exploration_flags, std::vector<std::uint8_t>{0});
}

TEST(RunEpisode, CertainExplorationHandsEveryActionToTheMentor) {
  TwoWorlds u;
  Agent agent(u.s, u.models, policy_class(u.mentors), shared_prior(u.models, 2), kCap);
  Environment env(u.models[0]);
  EpisodeStart start = agent.plan_episode();
  start.p_exp = 1;
  const auto result = agent.play_episode(start, env, CounterRng(1));
  EXPECT_TRUE(result.decision.explore);
  for (const Step& st : result.steps) EXPECT_EQ(st.action, 1);
  EXPECT_EQ(agent.posterior().policy_weights(), (std::vector<Rational>{1, 0}));
  EXPECT_EQ(agent.posterior().world_weights(), (std::vector<Rational>{1, 0}));
}

TEST(RunEpisode, PlanComputesInformationGainAndExplorationProbability) {
  TwoWorlds u;
  Agent agent(u.s, u.models, policy_class(u.mentors), shared_prior(u.models, 2, 4), kCap);
  const EpisodeStart start = agent.plan_episode();
  EXPECT_GT(start.info_gain, 0.0);
  EXPECT_EQ(start.p_exp, exploration_probability(start.info_gain, 4));
  EXPECT_EQ(start.map.index, 0u);
}

TEST(RunEpisode, FixedSeedIsBitwiseReproducible) {
  const auto family = make_boxed_room_family(BoxedRoomParams{});
  const auto cls = std::make_shared<const PolicyClass>(builtin_policy_class(
      {"expert", "uniform", "always_b"}, "uniform", family.models[0], family.spaces, kCap));
  const auto prior = std::make_shared<const Prior>(
      make_prior(family.models, cls->size(), ratio(1, 100), 1));
  auto play = [&](std::uint64_t seed) {
    Agent agent(family.spaces, family.models, cls, prior, kCap);
    Environment env(family.models[0]);
    const CounterRng rng(seed);
    std::vector<EpisodeResult> out;
    for (int i = 0; i < 30; ++i) out.push_back(run_episode(agent, env, rng));
    return std::make_pair(out, agent.history());
  };
  const auto [a, ha] = play(9);
  const auto [b, hb] = play(9);
  EXPECT_EQ(ha, hb);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].decision.draw, b[i].decision.draw);
    EXPECT_EQ(a[i].decision.explore, b[i].decision.explore);
    EXPECT_EQ(a[i].decision.p_exp, b[i].decision.p_exp);
    EXPECT_EQ(a[i].steps, b[i].steps);
  }
  const auto [c, hc] = play(10);
  EXPECT_NE(ha, hc);
}

TEST(RunEpisode, PlanValueNeverFallsBelowTheMentorUnderTheMapModel) {
  const auto family = make_boxed_room_family(BoxedRoomParams{});
  const auto cls = std::make_shared<const PolicyClass>(builtin_policy_class(
      {"expert", "uniform", "always_b"}, "uniform", family.models[0], family.spaces, kCap));
  const auto prior = std::make_shared<const Prior>(
      make_prior(family.models, cls->size(), ratio(1, 2), 1));
  Agent agent(family.spaces, family.models, cls, prior, kCap);
  Environment env(family.models[0]);
  const CounterRng rng(123);
  for (int i = 0; i < 60; ++i) {
    const EpisodeStart start = agent.plan_episode();
    const auto& filter = *agent.posterior().filter(start.map.index);
    for (const auto& state : agent.policy_states())
      EXPECT_GE(start.plan.value(), value(*state, filter, family.spaces, 2, kCap));
    EXPECT_GE(start.p_exp, 0.0);
    EXPECT_LE(start.p_exp, 1.0);
    agent.play_episode(start, env, rng);
  }
}

TEST(Environment, ResponsesDependOnlyOnTheKey) {
  const auto s = binary_spaces(1);
  const auto model =
      iid_model(s, "coin", {{{kA0, ratio(1, 2)}, {kB0, ratio(1, 2)}}, {{kA1, 1}}});
  Environment e1(model), e2(model);
  const CounterRng rng(4);
  for (std::size_t ep = 0; ep < 50; ++ep)
    EXPECT_EQ(e1.respond(0, rng, {ep, 0}), e2.respond(0, rng, {ep, 0}));
  EXPECT_EQ(e1.respond(1, rng, {50, 0}), kA1);
}

}  // namespace
}  // namespace bomai
