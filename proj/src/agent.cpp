#include "bomai/agent.hpp"

#include <algorithm>
#include <cmath>

#include "bomai/errors.hpp"

namespace bomai {

MAPSelection map_model(const JointPosterior& post) {
  std::size_t best = 0;
  Rational best_score = post.world_score(0);
  for (std::size_t k = 1; k < post.num_models(); ++k) {
    Rational score = post.world_score(k);
    if (score > best_score) {
      best = k;
      best_score = std::move(score);
    }
  }
  return {best, post.world_weight(best)};
}

double info_gain(const JointPosterior& post, const std::vector<PolicyStatePtr>& policy_states,
                 std::size_t steps, std::uint64_t cap) {
  const auto ww = post.world_weights_double();
  const auto pw = post.policy_weights_double();
  // The joint likelihood factorizes into a world part and a policy part, so
  // KL(posterior after h || posterior) splits into two sums per outcome.
  double ig = 0;
  std::vector<double> nu(ww.size());
  std::vector<double> pi(pw.size());
  for_each_exploratory_outcome(
      post, policy_states, steps, cap,
      [&](const std::vector<Step>&, const std::vector<Rational>& world,
          const std::vector<Rational>& policy) {
        double xw = 0;
        double xp = 0;
        for (std::size_t k = 0; k < world.size(); ++k) {
          nu[k] = world[k] > 0 ? to_double(world[k]) : 0.0;
          xw += ww[k] * nu[k];
        }
        for (std::size_t p = 0; p < policy.size(); ++p) {
          pi[p] = policy[p] > 0 ? to_double(policy[p]) : 0.0;
          xp += pw[p] * pi[p];
        }
        if (xw <= 0 || xp <= 0) return;
        double world_term = 0;
        for (std::size_t k = 0; k < nu.size(); ++k)
          if (ww[k] > 0 && nu[k] > 0) world_term += ww[k] * nu[k] * std::log(nu[k] / xw);
        double policy_term = 0;
        for (std::size_t p = 0; p < pi.size(); ++p)
          if (pw[p] > 0 && pi[p] > 0) policy_term += pw[p] * pi[p] * std::log(pi[p] / xp);
        ig += xp * world_term + xw * policy_term;
      });
  return std::max(0.0, ig);
}

double exploration_probability(double ig, const Rational& eta) {
  if (ig < 0) throw std::invalid_argument("information gain must be non-negative");
  if (!(eta > 0)) throw std::invalid_argument("eta must be positive");
  return std::min(1.0, to_double(eta) * ig);
}

Environment::Environment(ModelPtr model) : model_(std::move(model)), filter_(model_->start()) {}

Percept Environment::respond(ActionIndex action, const CounterRng& rng, Timestep t) {
  const PerceptDistribution dist = filter_->predict(action);
  std::vector<Rational> probs;
  probs.reserve(dist.size());
  for (const auto& entry : dist) probs.push_back(entry.second);
  const std::uint64_t draw = rng.bits({DrawPurpose::percept, t.episode, t.step});
  const Percept percept = dist.at(sample_index(probs, draw)).first;
  filter_ = filter_->observe(action, percept).next;
  return percept;
}

Agent::Agent(InteractionSpaces spaces, std::vector<ModelPtr> models,
             std::shared_ptr<const PolicyClass> policies, std::shared_ptr<const Prior> prior,
             std::uint64_t cap, MentorPtr actor)
    : spaces_(std::move(spaces)),
      models_(std::move(models)),
      policies_(std::move(policies)),
      cap_(cap),
      actor_(actor ? std::move(actor) : policies_->policies()[policies_->truth()]),
      actor_index_(policies_->size()),
      posterior_(std::move(prior), models_) {
  if (posterior_.num_policies() != policies_->size())
    throw InvariantViolation("prior and policy class sizes differ");
  for (std::size_t p = 0; p < policies_->size(); ++p) {
    policy_states_.push_back((*policies_)[p].start());
    if (policies_->policies()[p] == actor_) actor_index_ = p;
  }
  if (actor_index_ == policies_->size()) actor_state_ = actor_->start();
}

const PolicyState& Agent::actor_state() const {
  return actor_index_ < policy_states_.size() ? *policy_states_[actor_index_] : *actor_state_;
}

EpisodeStart Agent::plan_episode() const {
  const std::size_t m = spaces_.episode_length();
  if (!history_.at_episode_start(m))
    throw InvariantViolation("plan_episode called mid-episode");
  EpisodeStart start;
  start.episode = history_.completed_episodes(m);
  start.map = map_model(posterior_);
  start.plan = optimal_policy(*posterior_.filter(start.map.index), spaces_, m, cap_);
  start.info_gain = info_gain(posterior_, policy_states_, m, cap_);
  start.p_exp = exploration_probability(start.info_gain, posterior_.prior().eta);
  return start;
}

EpisodeResult Agent::play_episode(EpisodeStart start, Environment& env, const CounterRng& rng) {
  const std::size_t m = spaces_.episode_length();
  EpisodeResult result;
  result.decision.info_gain = start.info_gain;
  result.decision.p_exp = start.p_exp;
  result.decision.draw = rng.bits({DrawPurpose::exploration, start.episode, 0});
  result.decision.explore = bernoulli_from_bits(result.decision.draw, start.p_exp);
  history_.exploration_flags.push_back(result.decision.explore ? 1 : 0);

  std::vector<std::vector<Rational>> evidence;
  for (std::size_t j = 0; j < m; ++j) {
    ActionIndex action;
    if (result.decision.explore) {
      action = mentor_action(*actor_, history_, actor_state(), rng);
      std::vector<Rational> row(policy_states_.size());
      for (std::size_t p = 0; p < policy_states_.size(); ++p)
        row[p] = posterior_.policy_likelihood(p) > 0
                     ? policy_states_[p]->action_distribution().at(action)
                     : Rational(0);
      evidence.push_back(std::move(row));
    } else {
      action = start.plan.action_at(result.steps);
    }
    const Percept percept = env.respond(action, rng, {start.episode, j});
    const Step step{action, percept.observation, percept.reward};
    result.steps.push_back(step);
    history_.items.push_back(step);
    posterior_ = update_world_posterior(std::move(posterior_), step);
    for (auto& state : policy_states_) state = state->after(step);
    if (actor_state_) actor_state_ = actor_state_->after(step);
  }
  posterior_ = update_policy_posterior(std::move(posterior_), evidence, result.decision.explore);
  result.start = std::move(start);
  return result;
}

EpisodeResult run_episode(Agent& agent, Environment& env, const CounterRng& rng) {
  return agent.play_episode(agent.plan_episode(), env, rng);
}

}  // namespace bomai
