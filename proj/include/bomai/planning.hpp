#pragma once

// Exact finite-horizon evaluation inside one episode: values of policies,
// the expectimax plan, and enumeration of episode outcomes.

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "bomai/errors.hpp"
#include "bomai/interaction.hpp"
#include "bomai/policy.hpp"
#include "bomai/world_model.hpp"

namespace bomai {

/// Node budget shared by one exhaustive expansion. Throws CapExceeded once
/// more than `cap` nodes have been visited.
class ExpansionBudget {
 public:
  ExpansionBudget(const char* what, std::uint64_t cap) : what_(what), cap_(cap) {}
  void charge() {
    if (++used_ > cap_) throw CapExceeded(what_, used_, cap_);
  }
  std::uint64_t used() const { return used_; }

 private:
  const char* what_;
  std::uint64_t cap_;
  std::uint64_t used_ = 0;
};

/// Deterministic plan for the rest of an episode: one action for every
/// within-episode suffix reachable under the planning model.
class EpisodePlan {
 public:
  struct Node {
    ActionIndex action = 0;
    /// Expected remaining reward from this node.
    Rational value;
    /// Children for the chosen action, sorted by percept.
    std::vector<std::pair<Percept, std::shared_ptr<const Node>>> children;
  };

  EpisodePlan() : EpisodePlan(std::make_shared<const Node>(), 0) {}
  EpisodePlan(std::shared_ptr<const Node> root, std::size_t horizon)
      : root_(std::move(root)), horizon_(horizon) {}

  /// Expected remaining reward under the planning model.
  const Rational& value() const { return root_->value; }
  ActionIndex first_action() const { return root_->action; }
  std::size_t horizon() const { return horizon_; }
  const Node& root() const { return *root_; }

  /// Action after `suffix`, the items taken so far in the episode. Suffixes
  /// the planning model deems impossible get action 0.
  ActionIndex action_at(std::span<const Step> suffix) const;

  /// The plan as a policy starting at the plan's first timestep.
  PolicyStatePtr policy(std::size_t num_actions) const;

 private:
  std::shared_ptr<const Node> root_;
  std::size_t horizon_;
};

/// Exact V^pi_nu: expected sum of the next `steps` rewards when `policy`
/// acts against the model at `model`. Zero when steps == 0.
Rational value(const PolicyState& policy, const WorldModel::Filter& model,
               const InteractionSpaces& spaces, std::size_t steps, std::uint64_t cap);

/// Finite-horizon expectimax over the next `steps` timesteps. Action ties
/// go to the lowest action index.
EpisodePlan optimal_policy(const WorldModel::Filter& model, const InteractionSpaces& spaces,
                           std::size_t steps, std::uint64_t cap);

/// Remaining timesteps of the current episode.
inline std::size_t steps_left_in_episode(const History& history, std::size_t m) {
  return m - history.items.size() % m;
}

/// Probability of every positive-probability sequence of `steps` items
/// when `policy` acts against `model`, keyed by the items. Iteration order of
/// the map is the enumeration order of episode histories.
using OutcomeDistribution = std::map<std::vector<Step>, Rational>;

OutcomeDistribution outcome_distribution(const WorldModel::Filter& model,
                                         const PolicyState& policy, std::size_t steps,
                                         std::uint64_t cap);

/// max over sequences of |p(h) - q(h)|.
Rational max_abs_difference(const OutcomeDistribution& p, const OutcomeDistribution& q);

}  // namespace bomai
