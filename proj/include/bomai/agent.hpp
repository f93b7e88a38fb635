#pragma once

// The agent: MAP world-model selection, the per-episode expectimax plan,
// information-gain exploration and the composite policy that hands whole
// episodes to the mentor.

#include <cstdint>
#include <memory>
#include <vector>

#include "bomai/bayes.hpp"
#include "bomai/interaction.hpp"
#include "bomai/mentor.hpp"
#include "bomai/planning.hpp"
#include "bomai/rng.hpp"

namespace bomai {

struct MAPSelection {
  std::size_t index = 0;
  /// Exact normalized posterior weight of the selected model.
  Rational weight;
};

/// Exact argmax of the world posterior; ties go to the lowest index.
MAPSelection map_model(const JointPosterior& post);

/// Expected KL divergence from the joint posterior after a `steps`-item
/// exploratory continuation to the current one, natural log, computed by
/// exhaustive enumeration. `policy_states` are the policies' states at the
/// current history.
double info_gain(const JointPosterior& post, const std::vector<PolicyStatePtr>& policy_states,
                 std::size_t steps, std::uint64_t cap);

/// min(1, eta * ig).
double exploration_probability(double ig, const Rational& eta);

struct ExplorationDecision {
  double info_gain = 0;
  double p_exp = 0;
  bool explore = false;
  /// Raw draw compared against p_exp.
  std::uint64_t draw = 0;
};

/// The true environment: samples percepts from a world-model and tracks its
/// filter along the realized history.
class Environment {
 public:
  explicit Environment(ModelPtr model);

  const WorldModel& model() const { return *model_; }
  const ModelPtr& model_ptr() const { return model_; }
  const WorldModel::Filter& filter() const { return *filter_; }
  const WorldModel::FilterPtr& filter_ptr() const { return filter_; }

  /// Samples the percept for `action` at timestep `t` and advances.
  Percept respond(ActionIndex action, const CounterRng& rng, Timestep t);

 private:
  ModelPtr model_;
  WorldModel::FilterPtr filter_;
};

/// Everything fixed at the start of episode i, before e_i is drawn.
struct EpisodeStart {
  std::size_t episode = 0;
  MAPSelection map;
  EpisodePlan plan;
  double info_gain = 0;
  double p_exp = 0;
};

struct EpisodeResult {
  EpisodeStart start;
  ExplorationDecision decision;
  std::vector<Step> steps;
};

/// State of one agent replica. Sequential; never shared between replicas.
class Agent {
 public:
  /// `actor` supplies actions in exploratory episodes; defaults to the
  /// class's true mentor.
  Agent(InteractionSpaces spaces, std::vector<ModelPtr> models,
        std::shared_ptr<const PolicyClass> policies, std::shared_ptr<const Prior> prior,
        std::uint64_t cap, MentorPtr actor = nullptr);

  const InteractionSpaces& spaces() const { return spaces_; }
  const std::vector<ModelPtr>& models() const { return models_; }
  const PolicyClass& policies() const { return *policies_; }
  const History& history() const { return history_; }
  const JointPosterior& posterior() const { return posterior_; }
  const std::vector<PolicyStatePtr>& policy_states() const { return policy_states_; }
  std::uint64_t cap() const { return cap_; }

  /// MAP model, plan, IG and p_exp at the current episode start.
  EpisodeStart plan_episode() const;

  /// Draws e_i, runs the episode against `env` and updates the posteriors.
  EpisodeResult play_episode(EpisodeStart start, Environment& env, const CounterRng& rng);

 private:
  const PolicyState& actor_state() const;

  InteractionSpaces spaces_;
  std::vector<ModelPtr> models_;
  std::shared_ptr<const PolicyClass> policies_;
  std::uint64_t cap_;
  MentorPtr actor_;
  std::size_t actor_index_;  // index in the class, or size() when outside it
  PolicyStatePtr actor_state_;
  History history_;
  JointPosterior posterior_;
  std::vector<PolicyStatePtr> policy_states_;
};

/// plan_episode followed by play_episode.
EpisodeResult run_episode(Agent& agent, Environment& env, const CounterRng& rng);

}  // namespace bomai
