#include "bomai/mentor.hpp"

#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>

#include "bomai/errors.hpp"
#include "bomai/planning.hpp"

namespace bomai {

namespace {

class FixedState final : public PolicyState {
 public:
  explicit FixedState(std::vector<Rational> dist) : dist_(std::move(dist)) {}
  std::vector<Rational> action_distribution() const override { return dist_; }
  PolicyStatePtr after(const Step&) const override { return self_.lock(); }
  void bind(const std::shared_ptr<FixedState>& self) { self_ = self; }

 private:
  std::vector<Rational> dist_;
  std::weak_ptr<FixedState> self_;
};

class ExpertState final : public PolicyState {
 public:
  ExpertState(const WorldModel* model, const InteractionSpaces* spaces, std::uint64_t cap,
              WorldModel::FilterPtr filter, std::size_t items)
      : model_(model), spaces_(spaces), cap_(cap), filter_(std::move(filter)), items_(items) {}

  std::vector<Rational> action_distribution() const override {
    if (!cached_) {
      ActionIndex action = 0;
      if (filter_) {
        const std::size_t left = spaces_->episode_length() - items_ % spaces_->episode_length();
        action = optimal_policy(*filter_, *spaces_, left, cap_).first_action();
      }
      cached_ = action;
    }
    std::vector<Rational> dist(spaces_->num_actions(), Rational(0));
    dist[*cached_] = 1;
    return dist;
  }

  PolicyStatePtr after(const Step& step) const override {
    WorldModel::FilterPtr next;
    if (filter_) next = filter_->observe(step.action, step.percept()).next;
    return std::make_shared<ExpertState>(model_, spaces_, cap_, std::move(next), items_ + 1);
  }

 private:
  const WorldModel* model_;
  const InteractionSpaces* spaces_;
  std::uint64_t cap_;
  WorldModel::FilterPtr filter_;
  std::size_t items_;
  // Replica-confined lazy cache.
  mutable std::optional<ActionIndex> cached_;
};

class OpaqueState final : public PolicyState {
 public:
  std::vector<Rational> action_distribution() const override {
    throw InvariantViolation("an interactive mentor has no action distribution");
  }
  PolicyStatePtr after(const Step&) const override { return std::make_shared<OpaqueState>(); }
};

}  // namespace

StationaryMentor::StationaryMentor(std::string id, std::vector<Rational> distribution)
    : MentorPolicy(std::move(id), MentorKind::scripted) {
  Rational total = 0;
  for (const auto& p : distribution) {
    if (p < 0) throw std::invalid_argument("mentor '" + this->id() + "': negative probability");
    total += p;
  }
  if (distribution.empty() || total != 1)
    throw std::invalid_argument("mentor '" + this->id() + "': distribution sums to " +
                                to_string(total));
  auto state = std::make_shared<FixedState>(std::move(distribution));
  state->bind(state);
  state_ = state;
}

PolicyStatePtr StationaryMentor::start() const { return state_; }

ActionIndex StationaryMentor::act(const History&, const PolicyState& tracked,
                                  std::uint64_t draw) const {
  return static_cast<ActionIndex>(sample_index(tracked.action_distribution(), draw));
}

ExpertMentor::ExpertMentor(std::string id, std::shared_ptr<const WorldModel> model,
                           InteractionSpaces spaces, std::uint64_t cap)
    : MentorPolicy(std::move(id), MentorKind::scripted),
      model_(std::move(model)),
      spaces_(std::move(spaces)),
      cap_(cap) {}

PolicyStatePtr ExpertMentor::start() const {
  return std::make_shared<ExpertState>(model_.get(), &spaces_, cap_, model_->start(), 0);
}

ActionIndex ExpertMentor::act(const History&, const PolicyState& tracked,
                              std::uint64_t draw) const {
  return static_cast<ActionIndex>(sample_index(tracked.action_distribution(), draw));
}

InteractiveMentor::InteractiveMentor(std::string id, InteractionSpaces spaces, std::istream& in,
                                     std::ostream& out, int max_retries)
    : MentorPolicy(std::move(id), MentorKind::interactive),
      spaces_(std::move(spaces)),
      in_(in),
      out_(out),
      max_retries_(max_retries) {}

PolicyStatePtr InteractiveMentor::start() const { return std::make_shared<OpaqueState>(); }

ActionIndex InteractiveMentor::act(const History& history, const PolicyState&,
                                   std::uint64_t) const {
  const Timestep t = history.next_timestep(spaces_.episode_length());
  for (int attempt = 0; attempt <= max_retries_; ++attempt) {
    out_ << "history: " << render_steps(history.items, spaces_) << '\n';
    out_ << "episode " << t.episode << " step " << t.step << " actions:";
    for (const auto& a : spaces_.actions()) out_ << ' ' << a;
    out_ << "\n> " << std::flush;
    std::string token;
    if (!(in_ >> token)) throw Error("interactive mentor: input closed");
    if (auto action = spaces_.find_action(token)) return *action;
    out_ << "unknown action '" << token << "'\n";
  }
  throw Error("interactive mentor: no valid action after " + std::to_string(max_retries_ + 1) +
              " attempts");
}

ActionIndex mentor_action(const MentorPolicy& policy, const History& history,
                          const PolicyState& tracked, const CounterRng& rng) {
  // Keyed by the global timestep.
  const std::uint64_t draw = rng.bits({DrawPurpose::mentor, history.items.size(), 0});
  return policy.act(history, tracked, draw);
}

PolicyClass::PolicyClass(std::vector<MentorPtr> policies, std::size_t truth)
    : policies_(std::move(policies)), truth_(truth) {
  if (policies_.empty()) throw ConfigError("policy class is empty");
  if (truth_ >= policies_.size()) throw ConfigError("true mentor is not in the policy class");
  std::set<std::string> ids;
  for (const auto& p : policies_) {
    if (!p) throw ConfigError("policy class holds a null policy");
    if (p->kind() != MentorKind::scripted)
      throw ConfigError("policy '" + p->id() + "' is not scripted");
    if (!ids.insert(p->id()).second) throw ConfigError("duplicate policy id '" + p->id() + "'");
  }
}

std::size_t PolicyClass::find(const std::string& id) const {
  for (std::size_t i = 0; i < policies_.size(); ++i)
    if (policies_[i]->id() == id) return i;
  return policies_.size();
}

PolicyClass builtin_policy_class(const std::vector<std::string>& names,
                                 const std::string& true_mentor,
                                 std::shared_ptr<const WorldModel> mu,
                                 const InteractionSpaces& spaces, std::uint64_t cap) {
  std::vector<MentorPtr> policies;
  std::size_t truth = names.size();
  const std::size_t na = spaces.num_actions();
  for (std::size_t i = 0; i < names.size(); ++i) {
    const std::string& name = names[i];
    if (name == true_mentor) truth = i;
    if (name == "expert") {
      if (!mu) throw ConfigError("policy 'expert' needs a true environment");
      policies.push_back(std::make_shared<ExpertMentor>(name, mu, spaces, cap));
    } else if (name == "uniform") {
      policies.push_back(std::make_shared<StationaryMentor>(
          name, std::vector<Rational>(na, Rational(1, static_cast<unsigned long>(na)))));
    } else if (name.starts_with("always_")) {
      auto action = spaces.find_action(name.substr(7));
      if (!action) throw ConfigError("policy '" + name + "' names an unknown action");
      std::vector<Rational> dist(na, Rational(0));
      dist[*action] = 1;
      policies.push_back(std::make_shared<StationaryMentor>(name, std::move(dist)));
    } else {
      throw ConfigError("unknown policy '" + name + "'");
    }
  }
  if (truth == names.size())
    throw ConfigError("true mentor '" + true_mentor + "' is not in the policy class");
  return PolicyClass(std::move(policies), truth);
}

}  // namespace bomai
