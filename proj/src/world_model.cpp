#include "bomai/world_model.hpp"

#include <algorithm>

#include "bomai/errors.hpp"

namespace bomai {

Rational probability_of(const PerceptDistribution& dist, Percept p) {
  auto it = std::lower_bound(dist.begin(), dist.end(), p,
                             [](const auto& entry, const Percept& key) { return entry.first < key; });
  if (it == dist.end() || it->first != p) return 0;
  return it->second;
}

Rational total_mass(const PerceptDistribution& dist) {
  Rational total = 0;
  for (const auto& [p, prob] : dist) total += prob;
  return total;
}

WorldModel::FilterPtr filter_history(const WorldModel& model, std::span<const Step> steps) {
  WorldModel::FilterPtr filter = model.start();
  for (std::size_t t = 0; t < steps.size(); ++t) {
    auto next = filter->observe(steps[t].action, steps[t].percept());
    if (!next.next)
      throw InconsistentHistory("model '" + model.id() + "' assigns probability 0 to item " +
                                std::to_string(t));
    filter = std::move(next.next);
  }
  return filter;
}

PerceptDistribution percept_distribution(const WorldModel& model, const History& history,
                                         ActionIndex next_action) {
  return filter_history(model, history.items)->predict(next_action);
}

Rational sequence_probability(const WorldModel::Filter& filter, std::span<const Step> steps) {
  if (steps.empty()) return 1;
  auto first = filter.observe(steps.front().action, steps.front().percept());
  if (!first.next) return 0;
  Rational rest = sequence_probability(*first.next, steps.subspan(1));
  return first.probability * rest;
}

}  // namespace bomai
