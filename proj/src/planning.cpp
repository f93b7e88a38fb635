#include "bomai/planning.hpp"

#include <algorithm>

namespace bomai {

PolicyStatePtr advance(PolicyStatePtr state, std::span<const Step> steps) {
  for (const auto& step : steps) state = state->after(step);
  return state;
}

namespace {

std::vector<Rational> point_mass(std::size_t num_actions, ActionIndex action) {
  std::vector<Rational> dist(num_actions, Rational(0));
  dist.at(action) = 1;
  return dist;
}

class PlanState final : public PolicyState {
 public:
  PlanState(std::shared_ptr<const EpisodePlan::Node> node, std::size_t num_actions)
      : node_(std::move(node)), num_actions_(num_actions) {}

  std::vector<Rational> action_distribution() const override {
    return point_mass(num_actions_, node_ ? node_->action : 0);
  }

  PolicyStatePtr after(const Step& step) const override {
    std::shared_ptr<const EpisodePlan::Node> next;
    if (node_ && step.action == node_->action) {
      for (const auto& [percept, child] : node_->children)
        if (percept == step.percept()) next = child;
    }
    return std::make_shared<PlanState>(std::move(next), num_actions_);
  }

 private:
  std::shared_ptr<const EpisodePlan::Node> node_;
  std::size_t num_actions_;
};

Rational value_rec(const PolicyState& policy, const WorldModel::Filter& model,
                   const InteractionSpaces& spaces, std::size_t steps, ExpansionBudget& budget) {
  if (steps == 0) return 0;
  budget.charge();
  Rational total = 0;
  const auto dist = policy.action_distribution();
  for (std::size_t a = 0; a < dist.size(); ++a) {
    if (dist[a] == 0) continue;
    const auto action = static_cast<ActionIndex>(a);
    Rational q = 0;
    for (const auto& [percept, prob] : model.predict(action)) {
      const Step step{action, percept.observation, percept.reward};
      Rational rest = 0;
      if (steps > 1) {
        auto next = model.observe(action, percept);
        rest = value_rec(*policy.after(step), *next.next, spaces, steps - 1, budget);
      }
      q += prob * (spaces.reward_value(percept.reward) + rest);
    }
    total += dist[a] * q;
  }
  return total;
}

std::shared_ptr<const EpisodePlan::Node> plan_rec(const WorldModel::Filter& model,
                                                  const InteractionSpaces& spaces,
                                                  std::size_t steps, ExpansionBudget& budget) {
  budget.charge();
  auto best = std::make_shared<EpisodePlan::Node>();
  bool have_best = false;
  for (std::size_t a = 0; a < spaces.num_actions(); ++a) {
    const auto action = static_cast<ActionIndex>(a);
    EpisodePlan::Node candidate;
    candidate.action = action;
    candidate.value = 0;
    for (const auto& [percept, prob] : model.predict(action)) {
      Rational rest = 0;
      if (steps > 1) {
        auto next = model.observe(action, percept);
        auto child = plan_rec(*next.next, spaces, steps - 1, budget);
        rest = child->value;
        candidate.children.emplace_back(percept, std::move(child));
      }
      candidate.value += prob * (spaces.reward_value(percept.reward) + rest);
    }
    if (!have_best || candidate.value > best->value) {
      *best = std::move(candidate);
      have_best = true;
    }
  }
  return best;
}

void outcome_rec(const WorldModel::Filter& model, const PolicyState& policy,
                 std::size_t steps, const Rational& mass, std::vector<Step>& prefix,
                 OutcomeDistribution& out, ExpansionBudget& budget) {
  budget.charge();
  if (steps == 0) {
    out.emplace(prefix, mass);
    return;
  }
  const auto dist = policy.action_distribution();
  for (std::size_t a = 0; a < dist.size(); ++a) {
    if (dist[a] == 0) continue;
    const auto action = static_cast<ActionIndex>(a);
    for (const auto& [percept, prob] : model.predict(action)) {
      const Step step{action, percept.observation, percept.reward};
      prefix.push_back(step);
      Rational next_mass = mass * dist[a] * prob;
      if (steps == 1) {
        budget.charge();
        out.emplace(prefix, std::move(next_mass));
      } else {
        auto next = model.observe(action, percept);
        outcome_rec(*next.next, *policy.after(step), steps - 1, next_mass, prefix, out, budget);
      }
      prefix.pop_back();
    }
  }
}

}  // namespace

ActionIndex EpisodePlan::action_at(std::span<const Step> suffix) const {
  const Node* node = root_.get();
  for (const auto& step : suffix) {
    if (!node || step.action != node->action) return 0;
    const Node* next = nullptr;
    for (const auto& [percept, child] : node->children)
      if (percept == step.percept()) next = child.get();
    node = next;
  }
  return node ? node->action : 0;
}

PolicyStatePtr EpisodePlan::policy(std::size_t num_actions) const {
  return std::make_shared<PlanState>(root_, num_actions);
}

Rational value(const PolicyState& policy, const WorldModel::Filter& model,
               const InteractionSpaces& spaces, std::size_t steps, std::uint64_t cap) {
  ExpansionBudget budget("value", cap);
  return value_rec(policy, model, spaces, steps, budget);
}

EpisodePlan optimal_policy(const WorldModel::Filter& model, const InteractionSpaces& spaces,
                           std::size_t steps, std::uint64_t cap) {
  if (steps == 0) return EpisodePlan();
  ExpansionBudget budget("expectimax", cap);
  return EpisodePlan(plan_rec(model, spaces, steps, budget), steps);
}

OutcomeDistribution outcome_distribution(const WorldModel::Filter& model,
                                         const PolicyState& policy, std::size_t steps,
                                         std::uint64_t cap) {
  ExpansionBudget budget("outcome enumeration", cap);
  OutcomeDistribution out;
  std::vector<Step> prefix;
  outcome_rec(model, policy, steps, Rational(1), prefix, out, budget);
  return out;
}

Rational max_abs_difference(const OutcomeDistribution& p, const OutcomeDistribution& q) {
  Rational best = 0;
  auto consider = [&best](const Rational& d) {
    Rational a = abs(d);
    if (a > best) best = a;
  };
  for (const auto& [h, prob] : p) {
    auto it = q.find(h);
    consider(it == q.end() ? prob : Rational(prob - it->second));
  }
  for (const auto& [h, prob] : q)
    if (!p.contains(h)) consider(prob);
  return best;
}

}  // namespace bomai
