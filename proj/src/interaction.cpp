#include "bomai/interaction.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <stdexcept>

#include "bomai/errors.hpp"

namespace bomai {

namespace {

template <typename T>
bool has_duplicates(const std::vector<T>& values) {
  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t j = i + 1; j < values.size(); ++j)
      if (values[i] == values[j]) return true;
  return false;
}

}  // namespace

InteractionSpaces::InteractionSpaces(std::vector<std::string> actions,
                                     std::vector<std::string> real_observations,
                                     std::vector<Rational> rewards, std::size_t episode_length)
    : actions_(std::move(actions)), rewards_(std::move(rewards)), episode_length_(episode_length) {
  if (actions_.empty()) throw std::invalid_argument("action alphabet is empty");
  if (real_observations.empty())
    throw std::invalid_argument("observation alphabet needs at least one non-empty observation");
  if (rewards_.empty()) throw std::invalid_argument("reward alphabet is empty");
  if (episode_length_ == 0) throw std::invalid_argument("episode length must be positive");
  if (has_duplicates(actions_)) throw std::invalid_argument("duplicate action");
  if (has_duplicates(real_observations)) throw std::invalid_argument("duplicate observation");
  if (has_duplicates(rewards_)) throw std::invalid_argument("duplicate reward");
  if (actions_.size() > std::numeric_limits<ActionIndex>::max() ||
      real_observations.size() >= std::numeric_limits<ObservationIndex>::max() ||
      rewards_.size() > std::numeric_limits<RewardIndex>::max())
    throw std::invalid_argument("alphabet too large");

  observations_.reserve(real_observations.size() + 1);
  observations_.emplace_back("-");
  for (auto& o : real_observations) {
    if (o == "-") throw std::invalid_argument("'-' is reserved for the empty observation");
    observations_.push_back(std::move(o));
  }

  bool found_zero = false;
  for (std::size_t r = 0; r < rewards_.size(); ++r) {
    if (!is_probability(rewards_[r]))
      throw std::invalid_argument("reward " + to_string(rewards_[r]) + " outside [0,1]");
    if (rewards_[r] == 0) {
      zero_reward_ = static_cast<RewardIndex>(r);
      found_zero = true;
    }
  }
  if (!found_zero) throw std::invalid_argument("reward alphabet must contain 0");
}

std::optional<ActionIndex> InteractionSpaces::find_action(const std::string& name) const {
  auto it = std::find(actions_.begin(), actions_.end(), name);
  if (it == actions_.end()) return std::nullopt;
  return static_cast<ActionIndex>(it - actions_.begin());
}

std::optional<HistoryError> validate_history(const History& history,
                                             const InteractionSpaces& spaces) {
  for (std::size_t i = 0; i < history.items.size(); ++i) {
    const Step& s = history.items[i];
    if (s.action >= spaces.num_actions())
      return HistoryError{HistoryFault::action, i,
                          "item " + std::to_string(i) + ": action index " +
                              std::to_string(s.action) + " not in A"};
    if (s.observation >= spaces.num_observations())
      return HistoryError{HistoryFault::observation, i,
                          "item " + std::to_string(i) + ": observation index " +
                              std::to_string(s.observation) + " not in O"};
    if (s.reward >= spaces.num_rewards())
      return HistoryError{HistoryFault::reward, i,
                          "item " + std::to_string(i) + ": reward index " +
                              std::to_string(s.reward) + " not in R"};
  }
  for (std::size_t f = 0; f < history.exploration_flags.size(); ++f) {
    if (history.exploration_flags[f] > 1)
      return HistoryError{HistoryFault::flag_value, f,
                          "flag " + std::to_string(f) + " is not a bit"};
  }

  const std::size_t m = spaces.episode_length();
  const std::size_t completed = history.items.size() / m;
  const bool in_progress = history.items.size() % m != 0;
  const std::size_t flags = history.exploration_flags.size();
  // An in-progress episode must have its flag; between episodes the next
  // flag may already have been drawn.
  const bool flags_ok =
      in_progress ? flags == completed + 1 : (flags == completed || flags == completed + 1);
  if (!flags_ok)
    return HistoryError{HistoryFault::flag_count, flags,
                        "history has " + std::to_string(history.items.size()) +
                            " items (m=" + std::to_string(m) + ") but " +
                            std::to_string(flags) + " exploration flags"};
  return std::nullopt;
}

std::uint64_t episode_history_count(const InteractionSpaces& spaces) {
  const std::uint64_t base = spaces.num_steps();
  std::uint64_t count = 1;
  for (std::size_t j = 0; j < spaces.episode_length(); ++j) {
    if (count > std::numeric_limits<std::uint64_t>::max() / base)
      return std::numeric_limits<std::uint64_t>::max();
    count *= base;
  }
  return count;
}

std::vector<std::vector<Step>> enumerate_episode_histories(const InteractionSpaces& spaces,
                                                           std::uint64_t cap) {
  const std::uint64_t count = episode_history_count(spaces);
  if (count > cap) throw CapExceeded("episode-history enumeration", count, cap);

  std::vector<Step> alphabet;
  alphabet.reserve(spaces.num_steps());
  for (std::size_t a = 0; a < spaces.num_actions(); ++a)
    for (std::size_t o = 0; o < spaces.num_observations(); ++o)
      for (std::size_t r = 0; r < spaces.num_rewards(); ++r)
        alphabet.push_back({static_cast<ActionIndex>(a), static_cast<ObservationIndex>(o),
                            static_cast<RewardIndex>(r)});

  const std::size_t m = spaces.episode_length();
  std::vector<std::vector<Step>> out;
  out.reserve(count);
  std::vector<std::size_t> digits(m, 0);
  for (std::uint64_t n = 0; n < count; ++n) {
    std::vector<Step> episode(m);
    for (std::size_t j = 0; j < m; ++j) episode[j] = alphabet[digits[j]];
    out.push_back(std::move(episode));
    // Odometer increment, last timestep least significant.
    for (std::size_t j = m; j-- > 0;) {
      if (++digits[j] < alphabet.size()) break;
      digits[j] = 0;
    }
  }
  return out;
}

std::span<const Step> episode_slice(const History& history, std::size_t episode, std::size_t m) {
  if (m == 0) throw std::invalid_argument("episode length must be positive");
  if (episode >= history.completed_episodes(m))
    throw std::out_of_range("episode " + std::to_string(episode) + " not completed (" +
                            std::to_string(history.completed_episodes(m)) + " completed)");
  return std::span<const Step>(history.items).subspan(episode * m, m);
}

std::string render_steps(std::span<const Step> steps, const InteractionSpaces& spaces) {
  std::string out;
  for (const Step& s : steps) {
    if (!out.empty()) out += ' ';
    out += spaces.actions().at(s.action);
    out += '/';
    out += spaces.observations().at(s.observation);
    out += '/';
    out += to_string(spaces.reward_value(s.reward));
  }
  return out;
}

}  // namespace bomai
