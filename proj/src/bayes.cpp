#include "bomai/bayes.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "bomai/errors.hpp"

namespace bomai {

namespace {

std::vector<Rational> normalized(std::vector<Rational> scores) {
  Rational total = 0;
  for (const auto& s : scores) total += s;
  if (total == 0) throw InvariantViolation("cannot normalize all-zero weights");
  for (auto& s : scores) s /= total;
  return scores;
}

// Softmax of log-scores; -inf entries map to 0.
std::vector<double> from_logs(const std::vector<double>& logs) {
  double top = -std::numeric_limits<double>::infinity();
  for (double l : logs) top = std::max(top, l);
  std::vector<double> out(logs.size(), 0.0);
  if (!std::isfinite(top)) return out;
  double total = 0;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    out[i] = std::isfinite(logs[i]) ? std::exp(logs[i] - top) : 0.0;
    total += out[i];
  }
  for (auto& x : out) x /= total;
  return out;
}

std::vector<double> log_scores(const std::vector<Rational>& prior,
                               const std::vector<Rational>& likelihood) {
  std::vector<double> logs(prior.size());
  for (std::size_t i = 0; i < prior.size(); ++i)
    logs[i] = likelihood[i] > 0 ? log_of(prior[i]) + log_of(likelihood[i])
                                : -std::numeric_limits<double>::infinity();
  return logs;
}

double log_normalizer(const std::vector<double>& logs) {
  double top = -std::numeric_limits<double>::infinity();
  for (double l : logs) top = std::max(top, l);
  double total = 0;
  for (double l : logs)
    if (std::isfinite(l)) total += std::exp(l - top);
  return top + std::log(total);
}

}  // namespace

Prior make_prior(const std::vector<ModelPtr>& models, std::size_t num_policies,
                 const Rational& beta, const Rational& eta) {
  if (models.empty()) throw ConfigError("the model class is empty");
  if (num_policies == 0) throw ConfigError("the policy class is empty");
  if (!(beta > 0 && beta < 1)) throw ConfigError("beta must lie strictly between 0 and 1");
  if (!(eta > 0)) throw ConfigError("eta must be positive");
  std::vector<Rational> world;
  world.reserve(models.size());
  for (const auto& model : models) {
    const auto& info = model->info();
    if (!(info.base_weight > 0))
      throw ConfigError("model '" + info.id + "' has a non-positive base weight");
    world.push_back(info.base_weight * power(beta, info.space));
  }
  Prior prior;
  prior.world_weights = normalized(std::move(world));
  prior.policy_weights.assign(num_policies, Rational(1, static_cast<unsigned long>(num_policies)));
  prior.beta = beta;
  prior.eta = eta;
  return prior;
}

double entropy(const std::vector<Rational>& weights) {
  double h = 0;
  for (const auto& w : weights)
    if (w > 0) h -= to_double(w) * log_of(w);
  return h;
}

double entropy(const Prior& prior) {
  return entropy(prior.world_weights) + entropy(prior.policy_weights);
}

JointPosterior::JointPosterior(std::shared_ptr<const Prior> prior,
                               const std::vector<ModelPtr>& models)
    : prior_(std::move(prior)),
      world_likelihood_(models.size(), Rational(1)),
      policy_likelihood_(prior_->policy_weights.size(), Rational(1)) {
  if (models.size() != prior_->world_weights.size())
    throw InvariantViolation("prior and model class sizes differ");
  filters_.reserve(models.size());
  for (const auto& model : models) filters_.push_back(model->start());
}

Rational JointPosterior::world_score(std::size_t k) const {
  return prior_->world_weights.at(k) * world_likelihood_.at(k);
}

Rational JointPosterior::policy_score(std::size_t p) const {
  return prior_->policy_weights.at(p) * policy_likelihood_.at(p);
}

std::vector<Rational> JointPosterior::world_weights() const {
  std::vector<Rational> scores;
  for (std::size_t k = 0; k < num_models(); ++k) scores.push_back(world_score(k));
  return normalized(std::move(scores));
}

std::vector<Rational> JointPosterior::policy_weights() const {
  std::vector<Rational> scores;
  for (std::size_t p = 0; p < num_policies(); ++p) scores.push_back(policy_score(p));
  return normalized(std::move(scores));
}

Rational JointPosterior::world_weight(std::size_t k) const { return world_weights().at(k); }
Rational JointPosterior::policy_weight(std::size_t p) const { return policy_weights().at(p); }

Rational JointPosterior::joint_weight(std::size_t k, std::size_t p) const {
  return world_weight(k) * policy_weight(p);
}

std::vector<double> JointPosterior::world_weights_double() const {
  return from_logs(log_scores(prior_->world_weights, world_likelihood_));
}

std::vector<double> JointPosterior::policy_weights_double() const {
  return from_logs(log_scores(prior_->policy_weights, policy_likelihood_));
}

double JointPosterior::log_joint_weight(std::size_t k, std::size_t p) const {
  const auto wl = log_scores(prior_->world_weights, world_likelihood_);
  const auto pl = log_scores(prior_->policy_weights, policy_likelihood_);
  if (!std::isfinite(wl.at(k)) || !std::isfinite(pl.at(p)))
    return -std::numeric_limits<double>::infinity();
  return wl[k] - log_normalizer(wl) + pl[p] - log_normalizer(pl);
}

JointPosterior update_world_posterior(JointPosterior post, const Step& step) {
  bool possible = false;
  for (std::size_t k = 0; k < post.num_models(); ++k) {
    auto& filter = post.filters_[k];
    if (!filter) continue;
    auto next = filter->observe(step.action, step.percept());
    post.world_likelihood_[k] *= next.probability;
    filter = std::move(next.next);
    if (filter) possible = true;
  }
  if (!possible)
    throw ImpossibleObservation("every world-model with positive weight rules out the percept");
  return post;
}

JointPosterior update_world_posterior(JointPosterior post, std::span<const Step> steps) {
  // Multiply whole-sequence probabilities, so each model is conditioned once
  // on the batch.
  bool possible = false;
  for (std::size_t k = 0; k < post.num_models(); ++k) {
    auto& filter = post.filters_[k];
    if (!filter) continue;
    Rational prob = 1;
    for (const auto& step : steps) {
      auto next = filter->observe(step.action, step.percept());
      prob *= next.probability;
      filter = std::move(next.next);
      if (!filter) break;
    }
    post.world_likelihood_[k] *= filter ? prob : Rational(0);
    if (filter) possible = true;
  }
  if (!possible && !steps.empty())
    throw ImpossibleObservation("every world-model with positive weight rules out the items");
  return post;
}

JointPosterior update_policy_posterior(JointPosterior post,
                                       const std::vector<std::vector<Rational>>& evidence,
                                       bool explored) {
  if (!explored) return post;
  std::vector<Rational> next = post.policy_likelihood_;
  bool possible = false;
  for (std::size_t p = 0; p < next.size(); ++p) {
    if (next[p] == 0) continue;
    for (const auto& step : evidence) next[p] *= step.at(p);
    if (next[p] > 0) possible = true;
  }
  if (!possible) throw InconsistentMentor("no policy in the class explains the mentor's actions");
  post.policy_likelihood_ = std::move(next);
  return post;
}

namespace {

struct Walk {
  std::size_t num_actions = 0;
  ExpansionBudget* budget = nullptr;
  const ExploratoryVisitor* visit = nullptr;
  std::vector<Step> prefix;

  void run(const std::vector<WorldModel::FilterPtr>& filters, const std::vector<Rational>& world,
           const std::vector<PolicyStatePtr>& states, const std::vector<Rational>& policy,
           std::size_t steps) {
    budget->charge();
    if (steps == 0) {
      (*visit)(prefix, world, policy);
      return;
    }
    std::vector<std::vector<Rational>> dists(states.size());
    for (std::size_t p = 0; p < states.size(); ++p)
      if (policy[p] > 0) dists[p] = states[p]->action_distribution();

    for (std::size_t a = 0; a < num_actions; ++a) {
      const auto action = static_cast<ActionIndex>(a);
      std::vector<Rational> next_policy(policy.size(), Rational(0));
      bool any_policy = false;
      for (std::size_t p = 0; p < policy.size(); ++p) {
        if (policy[p] == 0 || dists[p][a] == 0) continue;
        next_policy[p] = policy[p] * dists[p][a];
        any_policy = true;
      }
      if (!any_policy) continue;

      std::map<Percept, std::vector<Rational>> branch;
      for (std::size_t k = 0; k < filters.size(); ++k) {
        if (world[k] == 0) continue;
        for (const auto& [percept, prob] : filters[k]->predict(action)) {
          auto& masses = branch[percept];
          if (masses.empty()) masses.assign(filters.size(), Rational(0));
          masses[k] = world[k] * prob;
        }
      }
      for (const auto& [percept, masses] : branch) {
        const Step step{action, percept.observation, percept.reward};
        std::vector<WorldModel::FilterPtr> next_filters(filters.size());
        if (steps > 1)
          for (std::size_t k = 0; k < filters.size(); ++k)
            if (masses[k] > 0) next_filters[k] = filters[k]->observe(action, percept).next;
        std::vector<PolicyStatePtr> next_states(states.size());
        if (steps > 1)
          for (std::size_t p = 0; p < states.size(); ++p)
            if (next_policy[p] > 0) next_states[p] = states[p]->after(step);
        prefix.push_back(step);
        run(next_filters, masses, next_states, next_policy, steps - 1);
        prefix.pop_back();
      }
    }
  }
};

}  // namespace

void for_each_exploratory_outcome(const JointPosterior& post,
                                  const std::vector<PolicyStatePtr>& policy_states,
                                  std::size_t steps, std::uint64_t cap,
                                  const ExploratoryVisitor& visit) {
  if (policy_states.size() != post.num_policies())
    throw InvariantViolation("one policy state per policy is required");
  ExpansionBudget budget("exploratory episode enumeration", cap);
  std::vector<WorldModel::FilterPtr> filters(post.num_models());
  std::vector<Rational> world(post.num_models(), Rational(0));
  std::size_t num_actions = 0;
  for (std::size_t k = 0; k < post.num_models(); ++k) {
    if (post.world_likelihood(k) == 0) continue;
    filters[k] = post.filter(k);
    world[k] = 1;
  }
  std::vector<Rational> policy(post.num_policies(), Rational(0));
  for (std::size_t p = 0; p < post.num_policies(); ++p) {
    if (post.policy_likelihood(p) == 0) continue;
    policy[p] = 1;
    num_actions = policy_states[p]->action_distribution().size();
  }
  Walk walk;
  walk.num_actions = num_actions;
  walk.budget = &budget;
  walk.visit = &visit;
  walk.run(filters, world, policy_states, policy, steps);
}

OutcomeDistribution mixture_episode_distribution(const JointPosterior& post,
                                                 const std::vector<PolicyStatePtr>& policy_states,
                                                 const InteractionSpaces& spaces,
                                                 std::uint64_t cap) {
  const auto ww = post.world_weights();
  const auto pw = post.policy_weights();
  OutcomeDistribution out;
  for_each_exploratory_outcome(
      post, policy_states, spaces.episode_length(), cap,
      [&](const std::vector<Step>& items, const std::vector<Rational>& world,
          const std::vector<Rational>& policy) {
        Rational xw = 0;
        Rational xp = 0;
        for (std::size_t k = 0; k < world.size(); ++k)
          if (world[k] > 0) xw += ww[k] * world[k];
        for (std::size_t p = 0; p < policy.size(); ++p)
          if (policy[p] > 0) xp += pw[p] * policy[p];
        Rational prob = xw * xp;
        if (prob > 0) out.emplace(items, std::move(prob));
      });
  return out;
}

std::string posterior_snapshot(const JointPosterior& post, const std::vector<ModelPtr>& models,
                               const std::vector<std::string>& policy_ids) {
  std::ostringstream out;
  const auto ww = post.world_weights();
  const auto pw = post.policy_weights();
  const auto wd = post.world_weights_double();
  const auto pd = post.policy_weights_double();
  out.precision(9);
  for (std::size_t k = 0; k < ww.size(); ++k) {
    out << "model " << (k < models.size() ? models[k]->id() : std::to_string(k)) << ' ' << wd[k]
        << ' ' << to_string(ww[k]) << '\n';
  }
  for (std::size_t p = 0; p < pw.size(); ++p) {
    out << "policy " << (p < policy_ids.size() ? policy_ids[p] : std::to_string(p)) << ' '
        << pd[p] << ' ' << to_string(pw[p]) << '\n';
  }
  return out.str();
}

}  // namespace bomai
