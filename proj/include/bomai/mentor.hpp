#pragma once

// The mentor policy class: scripted stand-ins for the human mentor and an
// interactive mentor that reads actions from a prompt.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "bomai/interaction.hpp"
#include "bomai/policy.hpp"
#include "bomai/rng.hpp"
#include "bomai/world_model.hpp"

namespace bomai {

enum class MentorKind { scripted, interactive };

class MentorPolicy {
 public:
  MentorPolicy(std::string id, MentorKind kind) : id_(std::move(id)), kind_(kind) {}
  virtual ~MentorPolicy() = default;

  const std::string& id() const { return id_; }
  MentorKind kind() const { return kind_; }

  /// Policy state at the empty history. Interactive mentors have no
  /// distribution to report and throw InvariantViolation when asked.
  virtual PolicyStatePtr start() const = 0;

  /// Chooses an action. `tracked` is this policy's state at `history`;
  /// `draw` is the random draw reserved for this timestep.
  virtual ActionIndex act(const History& history, const PolicyState& tracked,
                          std::uint64_t draw) const = 0;

 private:
  std::string id_;
  MentorKind kind_;
};

using MentorPtr = std::shared_ptr<const MentorPolicy>;

/// Same distribution at every history.
class StationaryMentor final : public MentorPolicy {
 public:
  /// Throws std::invalid_argument unless `distribution` sums to 1.
  StationaryMentor(std::string id, std::vector<Rational> distribution);

  PolicyStatePtr start() const override;
  ActionIndex act(const History& history, const PolicyState& tracked,
                  std::uint64_t draw) const override;

 private:
  PolicyStatePtr state_;
};

/// Plays the expectimax plan against a fixed world-model, replanned at every
/// timestep for the rest of the current episode. Where that model gives the
/// history probability zero it plays action 0.
class ExpertMentor final : public MentorPolicy {
 public:
  ExpertMentor(std::string id, std::shared_ptr<const WorldModel> model,
               InteractionSpaces spaces, std::uint64_t cap);

  PolicyStatePtr start() const override;
  ActionIndex act(const History& history, const PolicyState& tracked,
                  std::uint64_t draw) const override;

 private:
  std::shared_ptr<const WorldModel> model_;
  InteractionSpaces spaces_;
  std::uint64_t cap_;
};

/// Prompts for one action token per timestep. Each prompt prints the
/// visible history and the action alphabet; invalid tokens re-prompt up to
/// `max_retries` times, after which Error is thrown.
class InteractiveMentor final : public MentorPolicy {
 public:
  InteractiveMentor(std::string id, InteractionSpaces spaces, std::istream& in,
                    std::ostream& out, int max_retries = 3);

  PolicyStatePtr start() const override;
  ActionIndex act(const History& history, const PolicyState& tracked,
                  std::uint64_t draw) const override;

 private:
  InteractionSpaces spaces_;
  std::istream& in_;
  std::ostream& out_;
  int max_retries_;
};

/// Samples the mentor's action at the history's next timestep, drawing from
/// the mentor stream of `rng`.
ActionIndex mentor_action(const MentorPolicy& policy, const History& history,
                          const PolicyState& tracked, const CounterRng& rng);

/// Ordered scripted policies with a designated true mentor.
class PolicyClass {
 public:
  /// Throws ConfigError when `truth` is out of range, ids repeat, or a
  /// member is not scripted.
  PolicyClass(std::vector<MentorPtr> policies, std::size_t truth);

  const std::vector<MentorPtr>& policies() const { return policies_; }
  std::size_t size() const { return policies_.size(); }
  std::size_t truth() const { return truth_; }
  const MentorPolicy& true_mentor() const { return *policies_[truth_]; }
  const MentorPolicy& operator[](std::size_t i) const { return *policies_.at(i); }

  /// Index of the policy with this id, or size() when absent.
  std::size_t find(const std::string& id) const;

 private:
  std::vector<MentorPtr> policies_;
  std::size_t truth_;
};

/// Builds a class from policy names:
///   expert      expectimax against `mu`
///   uniform     uniform over actions
///   always_<a>  always the action named <a>
/// Throws ConfigError for unknown names or when `true_mentor` is not listed.
PolicyClass builtin_policy_class(const std::vector<std::string>& names,
                                 const std::string& true_mentor,
                                 std::shared_ptr<const WorldModel> mu,
                                 const InteractionSpaces& spaces, std::uint64_t cap);

}  // namespace bomai
