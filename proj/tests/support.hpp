#pragma once

// Small builders shared by the unit tests.

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bomai/interaction.hpp"
#include "bomai/mentor.hpp"
#include "bomai/tabular.hpp"

namespace bomai::test {

/// Actions {a, b}, observations {A, B}, rewards {0, 1}.
inline InteractionSpaces binary_spaces(std::size_t m) {
  return InteractionSpaces({"a", "b"}, {"A", "B"}, {Rational(0), Rational(1)}, m);
}

using Outcomes = std::vector<std::pair<Percept, Rational>>;

/// One-state model: per_action[a] is the percept distribution of action a.
inline std::shared_ptr<const TabularModel> iid_model(const InteractionSpaces& spaces,
                                                     std::string id,
                                                     const std::vector<Outcomes>& per_action,
                                                     unsigned space = 1,
                                                     std::optional<bool> benign = std::nullopt) {
  std::vector<std::vector<std::vector<KernelOutcome>>> kernel(1);
  for (const auto& outcomes : per_action) {
    std::vector<KernelOutcome> row;
    for (const auto& [p, q] : outcomes) row.push_back({p, 0, q});
    kernel[0].push_back(std::move(row));
  }
  ModelInfo info;
  info.id = std::move(id);
  info.space = space;
  info.benign = benign;
  return std::make_shared<TabularModel>(std::move(info), spaces,
                                        std::vector<std::string>{"s"}, 0, std::move(kernel));
}

/// Model that emits `percept` with certainty whatever the action.
inline std::shared_ptr<const TabularModel> constant_model(const InteractionSpaces& spaces,
                                                          std::string id, Percept percept,
                                                          unsigned space = 1) {
  return iid_model(spaces, std::move(id),
                   std::vector<Outcomes>(spaces.num_actions(), Outcomes{{percept, Rational(1)}}),
                   space);
}

inline MentorPtr stationary(std::string id, std::vector<Rational> dist) {
  return std::make_shared<StationaryMentor>(std::move(id), std::move(dist));
}

}  // namespace bomai::test
