#pragma once

// Experiment configuration, the metric-producing run loop, diagnostics
// keyed to the convergence results, beta sweeps and CSV output.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bomai/agent.hpp"
#include "bomai/bayes.hpp"
#include "bomai/mentor.hpp"
#include "bomai/tabular.hpp"
#include "bomai/tm.hpp"

namespace bomai {

enum class ModelClassKind { tabular, tm, mixed };

struct ExperimentConfig {
  std::vector<std::string> actions = {"a", "b"};
  /// Real observations; the empty observation is implicit.
  std::vector<std::string> observations = {"A", "B"};
  std::vector<Rational> rewards = {Rational(0), Rational(1)};
  std::size_t m = 2;

  ModelClassKind model_class = ModelClassKind::tabular;
  BoxedRoomParams room;

  std::size_t tm_max_states = 1;
  unsigned tm_max_space = 1;
  std::size_t tm_cap = 8;
  std::string tm_vocabulary = "minimal";
  /// Index of the true environment among the machines (tm class only).
  std::size_t tm_env_index = 0;
  std::uint32_t tm_step_budget = kDefaultStepBudget;

  std::vector<std::string> mentor_class = {"expert", "uniform", "always_b"};
  std::string true_mentor = "expert";

  Rational beta = ratio(1, 100);
  Rational eta = 1;
  std::size_t num_episodes = 5000;
  std::uint64_t seed = 42;
  std::size_t metric_cadence = 1;
  std::uint64_t enumeration_cap = 1000000;
  std::vector<Rational> beta_sweep = {ratio(1, 2), ratio(1, 10), ratio(1, 100)};
  Rational burn_in_fraction = ratio(1, 5);
  bool record_wallclock = false;

  InteractionSpaces spaces() const;
};

/// Parses key=value lines. Blank lines and lines starting with '#' are
/// skipped. Lists are comma separated. Throws ConfigError naming the line.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parse_config(format_config(c)) reproduces c.
std::string format_config(const ExperimentConfig& config);

/// Everything a run needs, built from a config.
struct ExperimentSetup {
  InteractionSpaces spaces;
  std::vector<ModelPtr> models;
  /// Index of the true environment in `models`.
  std::size_t truth = 0;
  std::shared_ptr<const PolicyClass> policies;
  std::shared_ptr<const Prior> prior;
};

/// Builds the model class, the mentor class and the prior. Enforces that
/// the true environment is in the model class and the true mentor in the
/// mentor class. Throws ConfigError.
ExperimentSetup build_setup(const ExperimentConfig& config);

struct MetricsRow {
  std::size_t episode = 0;
  bool e_i = false;
  double p_exp = 0;
  double info_gain = 0;
  std::string map_id;
  unsigned map_space = 1;
  /// Constructed label of the MAP model; nullopt when unlabeled.
  std::optional<bool> map_benign;
  double pred_err_star = 0;
  double pred_err_mentor = 0;
  double v_star_true = 0;
  double v_mentor_true = 0;
  double value_gap = 0;
  double z_inv_posterior = 0;
  double cum_pexp_sq = 0;
  double wallclock_ms = 0;

  bool operator==(const MetricsRow&) const = default;
};

/// Per-run quantities that are not per-episode.
struct RunSummary {
  std::vector<MetricsRow> rows;
  /// eta * Ent(w) / (w(mentor) * w(mu)).
  double exploration_bound = 0;
  /// Sum of p_exp^2 over every episode run.
  double cum_pexp_sq = 0;
  unsigned truth_space = 1;
  /// Episode starts where the plan's value under the MAP model fell below
  /// the true mentor's value under it.
  std::size_t pistar_violations = 0;
  std::size_t pistar_checks = 0;
};

/// A component error raised while running an episode.
class EpisodeError : public Error {
 public:
  EpisodeError(std::size_t episode, const std::string& what)
      : Error("episode " + std::to_string(episode) + ": " + what), episode_(episode) {}
  std::size_t episode() const { return episode_; }

 private:
  std::size_t episode_;
};

/// Runs config.num_episodes episodes and collects one row every
/// metric_cadence episodes. `actor`, when given, supplies the actions of
/// exploratory episodes in place of the true mentor (e.g. an interactive
/// mentor); metrics still refer to the true mentor. Throws EpisodeError.
RunSummary run_experiment(const ExperimentConfig& config);
RunSummary run_experiment(const ExperimentConfig& config, const ExperimentSetup& setup,
                          MentorPtr actor = nullptr);

/// max over episode histories of |P^pi_mu - P^pi_nu| for the rest of the
/// episode, by full enumeration.
Rational onpolicy_prediction_error(const WorldModel::Filter& mu, const WorldModel::Filter& nu,
                                   const PolicyState& policy, std::size_t steps,
                                   std::uint64_t cap);

/// V^{pi_B}_mu - V^{pi_h}_mu with V^{pi_B} = p V^{pi_h} + (1 - p) V^{pi*}.
Rational value_gap(const Rational& v_star, const Rational& v_mentor, const Rational& p_exp);

struct BoundCheck {
  double bound = 0;
  bool pass = false;
};

/// Bound from the joint prior; passes iff cum_pexp_sq <= bound.
BoundCheck exploration_bound_check(double cum_pexp_sq, const Prior& prior,
                                   std::size_t truth_world, std::size_t truth_policy);

/// The joint posterior and the agent's view at an episode start, as needed
/// by the martingale checks.
struct MartingaleState {
  const JointPosterior* posterior = nullptr;
  /// Every class policy's state at the history.
  const std::vector<PolicyStatePtr>* policy_states = nullptr;
  /// Filter of the true environment at the history.
  const WorldModel::Filter* mu = nullptr;
  std::size_t truth_world = 0;
  std::size_t truth_policy = 0;
  /// Policy followed when e_i = 0.
  const PolicyState* exploit = nullptr;
  Rational p_exp;
  std::size_t m = 1;
  std::uint64_t cap = 0;
};

/// z_i = 1 / w(mu, mentor | h, e).
Rational z_value(const JointPosterior& post, std::size_t truth_world, std::size_t truth_policy);

/// E[z_{i+1} | h, e] under pi_B acting in mu, by enumeration over e_i and
/// the episode's items.
Rational expected_next_z(const MartingaleState& s);

/// |E[z_{i+1} | h, e] - z_i|, exactly.
Rational z_martingale_check(const MartingaleState& s);

/// max over models k of |E_xi[w(k | h h_i)] - w(k | h)|, where the episode
/// is generated by the world mixture with `policy` acting. Zero for any
/// policy.
Rational posterior_consistency_check(const JointPosterior& post, const PolicyState& policy,
                                     std::size_t m, std::uint64_t cap);

struct SweepPoint {
  Rational beta;
  std::uint64_t seed = 0;
  /// Post-burn-in fraction of episodes with Space(MAP) > Space(mu).
  double space_violation_freq = 0;
  /// Post-burn-in fraction of episodes whose MAP model is labeled non-benign.
  double nonbenign_freq = 0;
  RunSummary run;
};

/// First episode counted after burn-in.
std::size_t burn_in_end(std::size_t num_episodes, const Rational& fraction);

/// Space and benignity frequencies over the rows after burn-in.
void summarize_sweep_point(SweepPoint& point, std::size_t num_episodes,
                           const Rational& burn_in_fraction);

/// One run per (beta, seed), executed concurrently; results in input
/// order, betas outermost.
std::vector<SweepPoint> beta_sweep(const ExperimentConfig& base, const std::vector<Rational>& betas,
                                   const std::vector<std::uint64_t>& seeds);

/// Runs several configs concurrently; results in input order.
std::vector<RunSummary> run_replicas(const std::vector<ExperimentConfig>& configs);

// ---------------------------------------------------------------------------
// CSV

extern const char* const kMetricsHeader;

void write_csv(std::ostream& out, const std::vector<MetricsRow>& rows);
/// Throws Error naming the path on I/O failure.
void emit_csv(const std::vector<MetricsRow>& rows, const std::filesystem::path& path);
/// Throws Error on malformed input.
std::vector<MetricsRow> parse_csv(std::istream& in);

/// Long format for plotting: "episode,series,value" with one line per
/// numeric column of every row.
void write_plot_data(std::ostream& out, const std::vector<MetricsRow>& rows);

}  // namespace bomai
