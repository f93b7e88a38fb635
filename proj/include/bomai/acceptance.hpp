#pragma once

// The property suite behind the verify subcommand and the acceptance test
// binary: exact identities on a tiny instance, measured trends on the
// reference configuration, and oracle cross-checks.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bomai/experiment.hpp"
#include "bomai/tabular.hpp"
#include "bomai/tm.hpp"

namespace bomai {

/// Frozen thresholds measured on the reference configuration.
inline constexpr double kFinalPexpMedianMax = 0.05;
inline constexpr double kFinalPredErrMedianMax = 0.05;
inline constexpr double kValueGapFloor = -0.05;

/// Contents of configs/reference.conf.
ExperimentConfig reference_config();

/// Seed 42 and four more.
std::vector<std::uint64_t> reference_seeds();

// ---------------------------------------------------------------------------
// Tiny instance: two world-models, two mentors, m = 1, |A| = |O - {empty}|
// = |R| = 2, every model and policy with full support.

struct TinyInstance {
  InteractionSpaces spaces;
  std::vector<std::shared_ptr<const TabularModel>> tabular;
  std::vector<ModelPtr> models;
  std::shared_ptr<const PolicyClass> policies;
  std::shared_ptr<const Prior> prior;
  /// Stationary action distributions of the policies.
  std::vector<std::vector<Rational>> policy_dists;
};

TinyInstance make_tiny_instance();

/// nu(o_1 r_1 ... | a_1 ...) by forward filtering over the kernel.
Rational forward_probability(const TabularModel& model, std::span<const Step> steps);

// ---------------------------------------------------------------------------
// Oracles

/// A random tabular model over `spaces` with up to `max_states` states and
/// up to three outcomes per kernel row, drawn from `rng` under `tag`.
std::shared_ptr<const TabularModel> random_tabular_model(const InteractionSpaces& spaces,
                                                         std::size_t max_states,
                                                         const CounterRng& rng,
                                                         std::uint64_t tag);

/// Best value over every deterministic policy for the next `steps`
/// timesteps, each valued by enumerating its paths. Starts from a belief over
/// the model's internal states.
Rational brute_force_optimal_value(const TabularModel& model, const InteractionSpaces& spaces,
                                   const std::vector<Rational>& belief, std::size_t steps);

/// A random machine with up to `max_states` states and space up to
/// `max_space`, entries drawn from the standard vocabulary.
TMSpec random_machine(const InteractionSpaces& spaces, std::size_t max_states, unsigned max_space,
                      const CounterRng& rng, std::uint64_t tag);

// ---------------------------------------------------------------------------
// Suite

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};

std::string format_result(const CriterionResult& r);

double median(std::vector<double> values);

class AcceptanceSuite {
 public:
  explicit AcceptanceSuite(ExperimentConfig reference = reference_config(),
                           std::vector<std::uint64_t> seeds = reference_seeds(),
                           std::ostream* log = nullptr);

  CriterionResult exactness();
  CriterionResult exploration_bound();
  CriterionResult prediction_decay();
  CriterionResult value_gap();
  CriterionResult benignity();
  CriterionResult expectimax_oracle();
  CriterionResult tm_semantics();
  /// Byte-identical CSV on reruns, and every result in `earlier` passed.
  CriterionResult determinism(const std::vector<CriterionResult>& earlier);

  /// Every criterion in order; `on_result` sees each as it completes.
  std::vector<CriterionResult> run_all(
      const std::function<void(const CriterionResult&)>& on_result = {});

 private:
  struct Runs {
    std::vector<RunSummary> reference;
    std::vector<RunSummary> weak;
    std::vector<SweepPoint> sweep;
  };
  const Runs& runs();

  ExperimentConfig reference_;
  std::vector<std::uint64_t> seeds_;
  std::ostream* log_;
  std::optional<Runs> runs_;
};

}  // namespace bomai
