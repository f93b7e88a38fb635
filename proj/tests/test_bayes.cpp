#include <gtest/gtest.h>

#include <cmath>

#include "bomai/acceptance.hpp"
#include "bomai/bayes.hpp"
#include "bomai/errors.hpp"
#include "support.hpp"

namespace bomai {
namespace {

using test::binary_spaces;
using test::iid_model;

constexpr Percept kA0{1, 0};
constexpr Percept kA1{1, 1};
constexpr Percept kB0{2, 0};
constexpr Percept kB1{2, 1};

std::shared_ptr<const Prior> shared_prior(const std::vector<ModelPtr>& models,
                                          std::size_t policies, Rational beta = ratio(1, 2),
                                          Rational eta = 1) {
  return std::make_shared<const Prior>(make_prior(models, policies, beta, eta));
}

// ---------------------------------------------------------------------------
// Prior and entropy

TEST(Prior, WeightsFollowBaseWeightTimesBetaToTheSpace) {
  const auto s = binary_spaces(1);
  ModelInfo heavy{"heavy", 1, true, 4};
  std::vector<ModelPtr> models{
      test::constant_model(s, "one", kA0, 1), test::constant_model(s, "three", kA0, 3),
      std::make_shared<TabularModel>(heavy, s, std::vector<std::string>{"s"}, 0,
                                     std::vector<std::vector<std::vector<KernelOutcome>>>{
                                         {{{kA0, 0, 1}}, {{kA0, 0, 1}}}})};
  const Prior p = make_prior(models, 3, ratio(1, 2), 1);
  // Unnormalized 1/2, 1/8 and 4 * 1/2.
  const Rational z = ratio(1, 2) + ratio(1, 8) + 2;
  EXPECT_EQ(p.world_weights[0], ratio(1, 2) / z);
  EXPECT_EQ(p.world_weights[1], ratio(1, 8) / z);
  EXPECT_EQ(p.world_weights[2], Rational(2) / z);
  EXPECT_EQ(p.policy_weights, std::vector<Rational>(3, ratio(1, 3)));
  EXPECT_EQ(sum(p.world_weights), 1);
}

TEST(Prior, RejectsBadParameters) {
  const auto s = binary_spaces(1);
  std::vector<ModelPtr> models{test::constant_model(s, "x", kA0)};
  EXPECT_THROW(make_prior(models, 1, 0, 1), ConfigError);
  EXPECT_THROW(make_prior(models, 1, 1, 1), ConfigError);
  EXPECT_THROW(make_prior(models, 1, ratio(1, 2), 0), ConfigError);
  EXPECT_THROW(make_prior(models, 0, ratio(1, 2), 1), ConfigError);
  EXPECT_THROW(make_prior({}, 1, ratio(1, 2), 1), ConfigError);
}

TEST(Entropy, Examples) {
  EXPECT_EQ(entropy(std::vector<Rational>{1}), 0.0);
  EXPECT_EQ(entropy(std::vector<Rational>{1, 0}), 0.0);
  EXPECT_NEAR(entropy({ratio(1, 2), ratio(1, 2)}), std::log(2.0), 1e-15);
  EXPECT_NEAR(entropy(std::vector<Rational>(4, ratio(1, 4))), std::log(4.0), 1e-15);
  EXPECT_NEAR(entropy({ratio(1, 4), ratio(3, 4)}),
              -(0.25 * std::log(0.25) + 0.75 * std::log(0.75)), 1e-15);
}

TEST(Entropy, JointPriorIsTheSumOfTheMarginals) {
  Prior p;
  p.world_weights = {ratio(1, 2), ratio(1, 2)};
  p.policy_weights = {ratio(1, 2), ratio(1, 2)};
  EXPECT_NEAR(entropy(p), std::log(4.0), 1e-15);
  // Same value as the entropy of the explicit product distribution.
  p.world_weights = {ratio(1, 3), ratio(2, 3)};
  p.policy_weights = {ratio(1, 5), ratio(4, 5)};
  std::vector<Rational> product;
  for (const auto& w : p.world_weights)
    for (const auto& q : p.policy_weights) product.push_back(w * q);
  EXPECT_NEAR(entropy(p), entropy(product), 1e-14);
}

// ---------------------------------------------------------------------------
// World posterior

TEST(WorldPosterior, EliminatesModelsThatGiveZeroProbability) {
  const auto s = binary_spaces(1);
  std::vector<ModelPtr> models{test::constant_model(s, "A", kA1),
                               test::constant_model(s, "B", kB1)};
  JointPosterior post(shared_prior(models, 1), models);
  EXPECT_EQ(post.world_weights(), (std::vector<Rational>{ratio(1, 2), ratio(1, 2)}));
  post = update_world_posterior(post, Step{0, 1, 1});
  EXPECT_EQ(post.world_weights(), (std::vector<Rational>{1, 0}));
  EXPECT_EQ(post.filter(1), nullptr);
  EXPECT_EQ(post.policy_weights(), std::vector<Rational>{1});
}

TEST(WorldPosterior, EqualLikelihoodsLeaveThePriorUnchanged) {
  const auto s = binary_spaces(1);
  std::vector<ModelPtr> models{test::constant_model(s, "x", kA1, 1),
                               test::constant_model(s, "y", kA1, 2)};
  JointPosterior post(shared_prior(models, 1, ratio(1, 3)), models);
  const auto before = post.world_weights();
  EXPECT_EQ(before, (std::vector<Rational>{ratio(3, 4), ratio(1, 4)}));
  post = update_world_posterior(post, Step{1, 1, 1});
  EXPECT_EQ(post.world_weights(), before);
}

TEST(WorldPosterior, HalfAndQuarterGiveTwoThirdsOneThird) {
  const auto s = binary_spaces(1);
  std::vector<ModelPtr> models{
      iid_model(s, "half", {{{kA0, ratio(1, 2)}, {kB0, ratio(1, 2)}}, {{kA0, 1}}}),
      iid_model(s, "quarter", {{{kA0, ratio(1, 4)}, {kB0, ratio(3, 4)}}, {{kA0, 1}}})};
  JointPosterior post(shared_prior(models, 1), models);
  post = update_world_posterior(post, Step{0, 1, 0});
  EXPECT_EQ(post.world_weights(), (std::vector<Rational>{ratio(2, 3), ratio(1, 3)}));
  EXPECT_EQ(post.world_likelihood(0), ratio(1, 2));
  EXPECT_EQ(post.world_likelihood(1), ratio(1, 4));
  // Scores are prior times likelihood.
  EXPECT_EQ(post.world_score(0) / post.world_score(1), 2);
}

TEST(WorldPosterior, ImpossiblePerceptThrows) {
  const auto s = binary_spaces(1);
  std::vector<ModelPtr> models{test::constant_model(s, "A", kA1),
                               test::constant_model(s, "A2", kA1, 2)};
  JointPosterior post(shared_prior(models, 1), models);
  EXPECT_THROW(update_world_posterior(post, Step{0, 2, 1}), ImpossibleObservation);
}

TEST(WorldPosterior, BatchEqualsIncrementalAndMatchesTheForwardOracle) {
  const auto s = binary_spaces(2);
  const CounterRng rng(17);
  for (std::uint64_t trial = 0; trial < 25; ++trial) {
    std::vector<std::shared_ptr<const TabularModel>> tab;
    std::vector<ModelPtr> models;
    for (std::uint64_t k = 0; k < 3; ++k) {
      tab.push_back(random_tabular_model(s, 3, rng, trial * 10 + k));
      models.push_back(tab.back());
    }
    const auto prior = shared_prior(models, 1);
    // Items drawn from model 0 so the mixture stays positive.
    std::vector<Step> items;
    auto f = models[0]->start();
    for (std::size_t t = 0; t < 6; ++t) {
      const auto a = static_cast<ActionIndex>((trial + t) % 2);
      const auto dist = f->predict(a);
      const Percept p = dist[(trial + 3 * t) % dist.size()].first;
      items.push_back({a, p.observation, p.reward});
      f = f->observe(a, p).next;
    }
    JointPosterior inc(prior, models);
    for (const Step& st : items) inc = update_world_posterior(inc, st);
    const JointPosterior batch = update_world_posterior(JointPosterior(prior, models), items);
    EXPECT_EQ(inc.world_weights(), batch.world_weights());

    std::vector<Rational> oracle;
    Rational total = 0;
    for (std::size_t k = 0; k < 3; ++k) {
      oracle.push_back(prior->world_weights[k] * forward_probability(*tab[k], items));
      total += oracle.back();
    }
    for (auto& w : oracle) w /= total;
    EXPECT_EQ(batch.world_weights(), oracle);
    EXPECT_EQ(sum(batch.world_weights()), 1);
    const auto dbl = batch.world_weights_double();
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(dbl[k], to_double(oracle[k]), 1e-12);
  }
}

// ---------------------------------------------------------------------------
// Policy posterior

class PolicyPosterior : public ::testing::Test {
 protected:
  InteractionSpaces s = binary_spaces(1);
  std::vector<ModelPtr> models{test::constant_model(s, "A", kA1)};
  JointPosterior post{shared_prior(models, 2), models};
};

TEST_F(PolicyPosterior, NonExploratoryEpisodeLeavesItUnchanged) {
  const auto next = update_policy_posterior(post, {{1, 0}}, false);
  EXPECT_EQ(next.policy_weights(), post.policy_weights());
  EXPECT_EQ(next.policy_likelihood(0), 1);
}

TEST_F(PolicyPosterior, DisagreeingDeterministicPoliciesCollapse) {
  const auto next = update_policy_posterior(post, {{0, 1}}, true);
  EXPECT_EQ(next.policy_weights(), (std::vector<Rational>{0, 1}));
}

TEST_F(PolicyPosterior, HalfAndQuarterGiveTwoThirdsOneThird) {
  const auto next = update_policy_posterior(post, {{ratio(1, 2), ratio(1, 4)}}, true);
  EXPECT_EQ(next.policy_weights(), (std::vector<Rational>{ratio(2, 3), ratio(1, 3)}));
  // Evidence accumulates over the steps of an episode.
  const auto two = update_policy_posterior(
      post, {{ratio(1, 2), ratio(1, 4)}, {ratio(1, 2), ratio(1, 4)}}, true);
  EXPECT_EQ(two.policy_weights(), (std::vector<Rational>{ratio(4, 5), ratio(1, 5)}));
}

TEST_F(PolicyPosterior, AllZeroThrowsInconsistentMentor) {
  EXPECT_THROW(update_policy_posterior(post, {{0, 0}}, true), InconsistentMentor);
  const auto only_second = update_policy_posterior(post, {{0, 1}}, true);
  EXPECT_THROW(update_policy_posterior(only_second, {{1, 0}}, true), InconsistentMentor);
}

TEST_F(PolicyPosterior, JointWeightFactorizes) {
  const auto next = update_policy_posterior(post, {{ratio(1, 3), ratio(2, 3)}}, true);
  Rational total = 0;
  for (std::size_t p = 0; p < 2; ++p) {
    EXPECT_EQ(next.joint_weight(0, p), next.world_weight(0) * next.policy_weight(p));
    EXPECT_NEAR(next.log_joint_weight(0, p), std::log(to_double(next.joint_weight(0, p))),
                1e-12);
    total += next.joint_weight(0, p);
  }
  EXPECT_EQ(total, 1);
}

// ---------------------------------------------------------------------------
// Mixture over exploratory episodes

std::vector<PolicyStatePtr> starts(const std::vector<MentorPtr>& mentors) {
  std::vector<PolicyStatePtr> out;
  for (const auto& m : mentors) out.push_back(m->start());
  return out;
}

TEST(Mixture, PointMassEqualsTheSinglePair) {
  const auto s = binary_spaces(2);
  std::vector<ModelPtr> models{
      iid_model(s, "x", {{{kA0, ratio(1, 3)}, {kB1, ratio(2, 3)}}, {{kA1, 1}}})};
  const auto mentor = test::stationary("m", {ratio(1, 4), ratio(3, 4)});
  JointPosterior post(shared_prior(models, 1), models);
  const auto xi = mixture_episode_distribution(post, starts({mentor}), s, 100000);
  const auto direct = outcome_distribution(*models[0]->start(), *mentor->start(), 2, 100000);
  EXPECT_EQ(xi, direct);
}

TEST(Mixture, TwoDeterministicPairsSplitEvenly) {
  const auto s = binary_spaces(1);
  std::vector<ModelPtr> models{test::constant_model(s, "A", kA1),
                               test::constant_model(s, "B", kB1)};
  const auto mentor = test::stationary("b", {0, 1});
  JointPosterior post(shared_prior(models, 1), models);
  const auto xi = mixture_episode_distribution(post, starts({mentor}), s, 1000);
  ASSERT_EQ(xi.size(), 2u);
  EXPECT_EQ(xi.at({Step{1, 1, 1}}), ratio(1, 2));
  EXPECT_EQ(xi.at({Step{1, 2, 1}}), ratio(1, 2));
}

TEST(Mixture, MatchesFullJointEnumeration) {
  const auto s = binary_spaces(2);
  const CounterRng rng(8);
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    std::vector<std::shared_ptr<const TabularModel>> tab;
    std::vector<ModelPtr> models;
    for (std::uint64_t k = 0; k < 3; ++k) {
      tab.push_back(random_tabular_model(s, 2, rng, 100 * trial + k));
      models.push_back(tab.back());
    }
    const std::vector<std::vector<Rational>> dists{{ratio(1, 3), ratio(2, 3)}, {1, 0}};
    std::vector<MentorPtr> mentors{test::stationary("p", dists[0]),
                                   test::stationary("q", dists[1])};
    const auto prior = shared_prior(models, 2);
    JointPosterior post(prior, models);
    const auto xi = mixture_episode_distribution(post, starts(mentors), s, 100000);

    Rational total = 0;
    std::size_t positive = 0;
    for (const auto& h : enumerate_episode_histories(s, 100000)) {
      Rational p = 0;
      for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t q = 0; q < 2; ++q) {
          Rational actions = 1;
          for (const Step& st : h) actions *= dists[q][st.action];
          p += prior->world_weights[k] * prior->policy_weights[q] *
               forward_probability(*tab[k], h) * actions;
        }
      if (p == 0) {
        EXPECT_FALSE(xi.count(h));
        continue;
      }
      ++positive;
      ASSERT_TRUE(xi.count(h));
      EXPECT_EQ(xi.at(h), p);
      total += p;
    }
    EXPECT_EQ(total, 1);
    EXPECT_EQ(xi.size(), positive);
  }
}

TEST(Mixture, CapIsEnforced) {
  const auto s = binary_spaces(2);
  std::vector<ModelPtr> models{
      iid_model(s, "x", {{{kA0, ratio(1, 2)}, {kB1, ratio(1, 2)}}, {{kA1, 1}}})};
  const auto mentor = test::stationary("u", {ratio(1, 2), ratio(1, 2)});
  JointPosterior post(shared_prior(models, 1), models);
  EXPECT_THROW(mixture_episode_distribution(post, starts({mentor}), s, 2), CapExceeded);
}

TEST(Snapshot, ListsEveryModelAndPolicy) {
  const auto s = binary_spaces(1);
  std::vector<ModelPtr> models{test::constant_model(s, "alpha", kA1),
                               test::constant_model(s, "beta", kB1)};
  JointPosterior post(shared_prior(models, 2), models);
  const std::string text = posterior_snapshot(post, models, {"p0", "p1"});
  for (const char* id : {"alpha", "beta", "p0", "p1", "1/2"})
    EXPECT_NE(text.find(id), std::string::npos) << id;
}

}  // namespace
}  // namespace bomai
