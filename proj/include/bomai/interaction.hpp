#pragma once

// Alphabets, timesteps and episode-structured interaction histories.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bomai/rational.hpp"

namespace bomai {

using ActionIndex = std::uint16_t;
using ObservationIndex = std::uint16_t;
using RewardIndex = std::uint16_t;

/// Index of the empty observation in every observation alphabet.
inline constexpr ObservationIndex kEmptyObservation = 0;

struct Percept {
  ObservationIndex observation = kEmptyObservation;
  RewardIndex reward = 0;

  auto operator<=>(const Percept&) const = default;
};

/// One timestep of interaction: the action taken and the percept received.
struct Step {
  ActionIndex action = 0;
  ObservationIndex observation = kEmptyObservation;
  RewardIndex reward = 0;

  Percept percept() const { return {observation, reward}; }
  auto operator<=>(const Step&) const = default;
};

/// Finite action, observation and reward alphabets plus the episode length.
///
/// Observation index 0 is always the empty observation. The reward alphabet
/// must contain 0, the reward paired with the empty observation when a
/// world-model stops producing output or the room door opens.
class InteractionSpaces {
 public:
  /// Throws std::invalid_argument when an invariant fails.
  InteractionSpaces(std::vector<std::string> actions,
                    std::vector<std::string> real_observations,
                    std::vector<Rational> rewards, std::size_t episode_length);

  const std::vector<std::string>& actions() const { return actions_; }
  /// All observations, the empty one first.
  const std::vector<std::string>& observations() const { return observations_; }
  const std::vector<Rational>& rewards() const { return rewards_; }
  std::size_t episode_length() const { return episode_length_; }

  std::size_t num_actions() const { return actions_.size(); }
  std::size_t num_observations() const { return observations_.size(); }
  std::size_t num_real_observations() const { return observations_.size() - 1; }
  std::size_t num_rewards() const { return rewards_.size(); }
  /// |A| * |O| * |R|
  std::size_t num_steps() const { return num_actions() * num_observations() * num_rewards(); }

  RewardIndex zero_reward() const { return zero_reward_; }
  Percept empty_percept() const { return {kEmptyObservation, zero_reward_}; }
  const Rational& reward_value(RewardIndex r) const { return rewards_.at(r); }

  std::optional<ActionIndex> find_action(const std::string& name) const;

  bool operator==(const InteractionSpaces&) const = default;

 private:
  std::vector<std::string> actions_;
  std::vector<std::string> observations_;
  std::vector<Rational> rewards_;
  std::size_t episode_length_;
  RewardIndex zero_reward_ = 0;
};

/// (episode, step-within-episode). Ordered lexicographically.
struct Timestep {
  std::size_t episode = 0;
  std::size_t step = 0;

  auto operator<=>(const Timestep&) const = default;
};

/// Items taken so far plus one exploration flag per started episode.
///
/// The flag of an episode is drawn when the episode starts, so a history may
/// carry one more flag than it has completed episodes.
struct History {
  std::vector<Step> items;
  std::vector<std::uint8_t> exploration_flags;

  std::size_t completed_episodes(std::size_t m) const { return items.size() / m; }
  /// The timestep of the next item to be appended.
  Timestep next_timestep(std::size_t m) const {
    return {items.size() / m, items.size() % m};
  }
  bool at_episode_start(std::size_t m) const { return items.size() % m == 0; }

  bool operator==(const History&) const = default;
};

enum class HistoryFault { action, observation, reward, flag_value, flag_count };

struct HistoryError {
  HistoryFault fault;
  /// Offending item index, or flag index for flag faults.
  std::size_t index;
  std::string message;
};

/// First violation found, or nullopt when every symbol belongs to its
/// alphabet and the flag count matches the episode structure.
std::optional<HistoryError> validate_history(const History& history,
                                             const InteractionSpaces& spaces);

/// Every possible length-m episode, lexicographic in (a, o, r) per timestep
/// with the first timestep most significant. Throws CapExceeded when
/// (|A||O||R|)^m exceeds `cap`.
std::vector<std::vector<Step>> enumerate_episode_histories(const InteractionSpaces& spaces,
                                                           std::uint64_t cap);

/// Number of length-m episodes, saturating at UINT64_MAX.
std::uint64_t episode_history_count(const InteractionSpaces& spaces);

/// The m items of completed episode `episode`. Throws std::out_of_range.
std::span<const Step> episode_slice(const History& history, std::size_t episode, std::size_t m);

/// Human-readable single-line rendering, e.g. "work/o1/1 ask/-/0".
std::string render_steps(std::span<const Step> steps, const InteractionSpaces& spaces);

}  // namespace bomai
