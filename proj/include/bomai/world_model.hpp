#pragma once

// Common interface of world-models: a stochastic map from history and
// action to a percept. Models are evaluated through filters, immutable
// belief states that summarize a history prefix.

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bomai/interaction.hpp"
#include "bomai/rational.hpp"

namespace bomai {

/// Sorted by percept; only strictly positive probabilities are present.
using PerceptDistribution = std::vector<std::pair<Percept, Rational>>;

/// Probability of `p` under `dist` (0 when absent).
Rational probability_of(const PerceptDistribution& dist, Percept p);

/// Sum of all probabilities in `dist`.
Rational total_mass(const PerceptDistribution& dist);

struct ModelInfo {
  std::string id;
  /// Intra-episode space bound (the bounded work tape length for machines).
  unsigned space = 1;
  /// Constructed label; nullopt when a model carries no label.
  std::optional<bool> benign;
  /// Prior weight before the space penalty, i.e. the dependence on the
  /// enumeration index. Uniform (1) unless a testbed says otherwise.
  Rational base_weight = 1;
};

class WorldModel {
 public:
  class Filter;
  using FilterPtr = std::shared_ptr<const Filter>;

  struct Conditioned {
    Rational probability;
    /// Null when probability is zero.
    FilterPtr next;
  };

  class Filter {
   public:
    virtual ~Filter() = default;
    virtual PerceptDistribution predict(ActionIndex action) const = 0;
    /// Conditions on (action, percept). Never throws for impossible
    /// percepts; reports probability zero instead.
    virtual Conditioned observe(ActionIndex action, Percept percept) const = 0;
  };

  explicit WorldModel(ModelInfo info) : info_(std::move(info)) {}
  virtual ~WorldModel() = default;

  WorldModel(const WorldModel&) = delete;
  WorldModel& operator=(const WorldModel&) = delete;

  const ModelInfo& info() const { return info_; }
  const std::string& id() const { return info_.id; }
  unsigned space() const { return info_.space; }

  /// Filter for the empty history.
  virtual FilterPtr start() const = 0;

 private:
  ModelInfo info_;
};

/// Filter after `steps`. Throws InconsistentHistory when the model assigns
/// them probability zero.
WorldModel::FilterPtr filter_history(const WorldModel& model, std::span<const Step> steps);

/// nu(. | history, next_action). Throws InconsistentHistory.
PerceptDistribution percept_distribution(const WorldModel& model, const History& history,
                                         ActionIndex next_action);

/// Probability the model assigns to the percepts of `steps` given their
/// actions, starting from `filter`.
Rational sequence_probability(const WorldModel::Filter& filter, std::span<const Step> steps);

/// Space bound of a model.
inline unsigned space_of(const WorldModel& model) { return model.space(); }

}  // namespace bomai
