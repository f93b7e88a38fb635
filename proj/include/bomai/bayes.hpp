#pragma once

// Prior and joint posterior over (world-model, mentor-policy) pairs, the
// Bayes mixture over exploratory episodes, and prior entropy.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bomai/interaction.hpp"
#include "bomai/planning.hpp"
#include "bomai/policy.hpp"
#include "bomai/world_model.hpp"

namespace bomai {

using ModelPtr = std::shared_ptr<const WorldModel>;

struct Prior {
  /// Normalized, strictly positive.
  std::vector<Rational> world_weights;
  std::vector<Rational> policy_weights;
  Rational beta;
  Rational eta;
};

/// w(nu) proportional to base_weight(nu) * beta^space(nu); policies uniform.
/// Throws ConfigError unless 0 < beta < 1, eta > 0 and both classes are
/// non-empty with positive base weights.
Prior make_prior(const std::vector<ModelPtr>& models, std::size_t num_policies,
                 const Rational& beta, const Rational& eta);

/// Natural-log entropy of a normalized weight vector.
double entropy(const std::vector<Rational>& weights);

/// Entropy of the joint (world, policy) prior: the sum of both marginals'
/// entropies, since the joint prior is a product.
double entropy(const Prior& prior);

/// Posterior over world-models and mentor policies. World weights are
/// w(nu) * nu(h) normalized; policy weights are w(pi) times the probability
/// pi gives the actions of exploratory episodes, normalized. Models with
/// weight 0 are kept.
class JointPosterior {
 public:
  JointPosterior(std::shared_ptr<const Prior> prior, const std::vector<ModelPtr>& models);

  const Prior& prior() const { return *prior_; }
  std::size_t num_models() const { return world_likelihood_.size(); }
  std::size_t num_policies() const { return policy_likelihood_.size(); }

  /// nu(o,r | a) over the history so far.
  const Rational& world_likelihood(std::size_t k) const { return world_likelihood_.at(k); }
  /// Product of pi(a | h) over steps of exploratory episodes.
  const Rational& policy_likelihood(std::size_t p) const { return policy_likelihood_.at(p); }

  /// Unnormalized weight w(nu) nu(h); ratios equal posterior ratios.
  Rational world_score(std::size_t k) const;
  Rational policy_score(std::size_t p) const;

  Rational world_weight(std::size_t k) const;
  Rational policy_weight(std::size_t p) const;
  Rational joint_weight(std::size_t k, std::size_t p) const;
  std::vector<Rational> world_weights() const;
  std::vector<Rational> policy_weights() const;

  /// Floating mirrors computed in the log domain from the exact values.
  std::vector<double> world_weights_double() const;
  std::vector<double> policy_weights_double() const;
  /// log w(nu | h) + log w(pi | h, e); -inf when either is zero.
  double log_joint_weight(std::size_t k, std::size_t p) const;

  /// Filter of model k at the history, null when its weight is zero.
  const WorldModel::FilterPtr& filter(std::size_t k) const { return filters_.at(k); }

 private:
  friend JointPosterior update_world_posterior(JointPosterior, const Step&);
  friend JointPosterior update_world_posterior(JointPosterior, std::span<const Step>);
  friend JointPosterior update_policy_posterior(JointPosterior,
                                                const std::vector<std::vector<Rational>>&, bool);

  std::shared_ptr<const Prior> prior_;
  std::vector<Rational> world_likelihood_;
  std::vector<Rational> policy_likelihood_;
  std::vector<WorldModel::FilterPtr> filters_;
};

/// Conditions every world-model on one item. Throws ImpossibleObservation
/// when the mixture gives the percept probability zero.
JointPosterior update_world_posterior(JointPosterior post, const Step& step);

/// Conditions on several items at once; equal to item-by-item updates.
JointPosterior update_world_posterior(JointPosterior post, std::span<const Step> steps);

/// evidence[j][p]: probability policy p gave the action taken at step j of
/// the episode. When `explored` is false the posterior is returned
/// unchanged. Throws InconsistentMentor when every policy with positive
/// weight gives the episode's actions probability zero.
JointPosterior update_policy_posterior(JointPosterior post,
                                       const std::vector<std::vector<Rational>>& evidence,
                                       bool explored);

/// Visits every continuation of `steps` items that has positive mixture
/// probability when the policies act, in enumeration order. `world[k]` is
/// model k's probability of the percepts given the actions (0 for models
/// with zero weight); `policy[p]` is policy p's probability of the actions.
using ExploratoryVisitor = std::function<void(const std::vector<Step>& items,
                                              const std::vector<Rational>& world,
                                              const std::vector<Rational>& policy)>;
void for_each_exploratory_outcome(const JointPosterior& post,
                                  const std::vector<PolicyStatePtr>& policy_states,
                                  std::size_t steps, std::uint64_t cap,
                                  const ExploratoryVisitor& visit);

/// xi(h_i | h_<i, e_i = 1): the joint-posterior mixture over exploratory
/// episodes, keyed by episode items. `policy_states` holds each policy's
/// state at the current history, which must be at an episode start.
OutcomeDistribution mixture_episode_distribution(const JointPosterior& post,
                                                 const std::vector<PolicyStatePtr>& policy_states,
                                                 const InteractionSpaces& spaces,
                                                 std::uint64_t cap);

/// Debug listing: one line per model and per policy with exact and float
/// weights.
std::string posterior_snapshot(const JointPosterior& post, const std::vector<ModelPtr>& models,
                               const std::vector<std::string>& policy_ids);

}  // namespace bomai
