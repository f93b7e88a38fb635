#pragma once

// A policy evaluated along a history: an immutable state that knows the
// action distribution at the current history and how to advance.

#include <memory>
#include <vector>

#include "bomai/interaction.hpp"
#include "bomai/rational.hpp"

namespace bomai {

class PolicyState {
 public:
  virtual ~PolicyState() = default;

  /// Exact distribution over actions, indexed by action, summing to 1.
  virtual std::vector<Rational> action_distribution() const = 0;

  /// State after `step` is appended to the history.
  virtual std::shared_ptr<const PolicyState> after(const Step& step) const = 0;
};

using PolicyStatePtr = std::shared_ptr<const PolicyState>;

/// Advances `state` over `steps`.
PolicyStatePtr advance(PolicyStatePtr state, std::span<const Step> steps);

}  // namespace bomai
