#include "bomai/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <future>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "bomai/errors.hpp"

namespace bomai {

// ---------------------------------------------------------------------------
// Config

InteractionSpaces ExperimentConfig::spaces() const {
  return InteractionSpaces(actions, observations, rewards, m);
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(trim(item));
  if (out.empty() || std::any_of(out.begin(), out.end(), [](auto& s) { return s.empty(); }))
    throw std::invalid_argument("empty list element");
  return out;
}

template <typename T>
T parse_unsigned(const std::string& value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw std::invalid_argument("expected a non-negative integer, got '" + value + "'");
  return out;
}

bool parse_bool(const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("expected true or false, got '" + value + "'");
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

std::string join(const std::vector<Rational>& items) {
  std::vector<std::string> s;
  for (const auto& q : items) s.push_back(to_string(q));
  return join(s);
}

const char* model_class_name(ModelClassKind k) {
  switch (k) {
    case ModelClassKind::tabular: return "tabular";
    case ModelClassKind::tm: return "tm";
    case ModelClassKind::mixed: return "mixed";
  }
  return "?";
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"actions", [](auto& c, auto& v) { c.actions = split_list(v); }},
      {"observations", [](auto& c, auto& v) { c.observations = split_list(v); }},
      {"rewards",
       [](auto& c, auto& v) {
         c.rewards.clear();
         for (const auto& s : split_list(v)) c.rewards.push_back(parse_rational(s));
       }},
      {"m", [](auto& c, auto& v) { c.m = parse_unsigned<std::size_t>(v); }},
      {"model_class",
       [](auto& c, auto& v) {
         if (v == "tabular") c.model_class = ModelClassKind::tabular;
         else if (v == "tm") c.model_class = ModelClassKind::tm;
         else if (v == "mixed") c.model_class = ModelClassKind::mixed;
         else throw std::invalid_argument("model_class must be tabular, tm or mixed");
       }},
      {"door_press_prob", [](auto& c, auto& v) { c.room.door_press_prob = parse_rational(v); }},
      {"blurt_reward_prob", [](auto& c, auto& v) { c.room.blurt_reward_prob = parse_rational(v); }},
      {"biased_task_prob", [](auto& c, auto& v) { c.room.biased_task_prob = parse_rational(v); }},
      {"truth_space", [](auto& c, auto& v) { c.room.truth_space = parse_unsigned<unsigned>(v); }},
      {"biased_space", [](auto& c, auto& v) { c.room.biased_space = parse_unsigned<unsigned>(v); }},
      {"hijack_weight", [](auto& c, auto& v) { c.room.hijack_weight = parse_rational(v); }},
      {"tm_max_states", [](auto& c, auto& v) { c.tm_max_states = parse_unsigned<std::size_t>(v); }},
      {"tm_max_space", [](auto& c, auto& v) { c.tm_max_space = parse_unsigned<unsigned>(v); }},
      {"tm_cap", [](auto& c, auto& v) { c.tm_cap = parse_unsigned<std::size_t>(v); }},
      {"tm_vocabulary",
       [](auto& c, auto& v) {
         if (v != "minimal" && v != "standard")
           throw std::invalid_argument("tm_vocabulary must be minimal or standard");
         c.tm_vocabulary = v;
       }},
      {"tm_env_index", [](auto& c, auto& v) { c.tm_env_index = parse_unsigned<std::size_t>(v); }},
      {"tm_step_budget",
       [](auto& c, auto& v) { c.tm_step_budget = parse_unsigned<std::uint32_t>(v); }},
      {"mentor_class", [](auto& c, auto& v) { c.mentor_class = split_list(v); }},
      {"true_mentor", [](auto& c, auto& v) { c.true_mentor = v; }},
      {"beta", [](auto& c, auto& v) { c.beta = parse_rational(v); }},
      {"eta", [](auto& c, auto& v) { c.eta = parse_rational(v); }},
      {"num_episodes", [](auto& c, auto& v) { c.num_episodes = parse_unsigned<std::size_t>(v); }},
      {"seed", [](auto& c, auto& v) { c.seed = parse_unsigned<std::uint64_t>(v); }},
      {"metric_cadence",
       [](auto& c, auto& v) { c.metric_cadence = parse_unsigned<std::size_t>(v); }},
      {"enumeration_cap",
       [](auto& c, auto& v) { c.enumeration_cap = parse_unsigned<std::uint64_t>(v); }},
      {"beta_sweep",
       [](auto& c, auto& v) {
         c.beta_sweep.clear();
         for (const auto& s : split_list(v)) c.beta_sweep.push_back(parse_rational(s));
       }},
      {"burn_in_fraction", [](auto& c, auto& v) { c.burn_in_fraction = parse_rational(v); }},
      {"record_wallclock", [](auto& c, auto& v) { c.record_wallclock = parse_bool(v); }},
  };
  return table;
}

void validate_config(const ExperimentConfig& c) {
  try {
    (void)c.spaces();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("interaction spaces: ") + e.what());
  }
  auto in_unit = [](const Rational& q) { return q > 0 && q < 1; };
  if (!in_unit(c.beta)) throw ConfigError("beta must lie strictly between 0 and 1");
  if (!(c.eta > 0)) throw ConfigError("eta must be positive");
  if (c.metric_cadence == 0) throw ConfigError("metric_cadence must be at least 1");
  if (c.burn_in_fraction < 0 || c.burn_in_fraction >= 1)
    throw ConfigError("burn_in_fraction must lie in [0, 1)");
  for (const auto& b : c.beta_sweep)
    if (!in_unit(b)) throw ConfigError("beta_sweep values must lie strictly between 0 and 1");
  if (c.tm_step_budget == 0) throw ConfigError("tm_step_budget must be at least 1");
  if (std::find(c.mentor_class.begin(), c.mentor_class.end(), c.true_mentor) ==
      c.mentor_class.end())
    throw ConfigError("true mentor '" + c.true_mentor + "' is not in mentor_class");
  if (c.model_class != ModelClassKind::tabular && (c.tm_max_states == 0 || c.tm_max_space == 0))
    throw ConfigError("tm_max_states and tm_max_space must be at least 1");
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig config;
  std::set<std::string> seen;
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const auto where = "line " + std::to_string(number) + ": ";
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key=value");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(where + "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");
    try {
      it->second(config, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where + key + ": " + e.what());
    }
  }
  validate_config(config);
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    return parse_config(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string format_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "actions=" << join(c.actions) << "\n"
      << "observations=" << join(c.observations) << "\n"
      << "rewards=" << join(c.rewards) << "\n"
      << "m=" << c.m << "\n"
      << "model_class=" << model_class_name(c.model_class) << "\n"
      << "door_press_prob=" << to_string(c.room.door_press_prob) << "\n"
      << "blurt_reward_prob=" << to_string(c.room.blurt_reward_prob) << "\n"
      << "biased_task_prob=" << to_string(c.room.biased_task_prob) << "\n"
      << "truth_space=" << c.room.truth_space << "\n"
      << "biased_space=" << c.room.biased_space << "\n"
      << "hijack_weight=" << to_string(c.room.hijack_weight) << "\n"
      << "tm_max_states=" << c.tm_max_states << "\n"
      << "tm_max_space=" << c.tm_max_space << "\n"
      << "tm_cap=" << c.tm_cap << "\n"
      << "tm_vocabulary=" << c.tm_vocabulary << "\n"
      << "tm_env_index=" << c.tm_env_index << "\n"
      << "tm_step_budget=" << c.tm_step_budget << "\n"
      << "mentor_class=" << join(c.mentor_class) << "\n"
      << "true_mentor=" << c.true_mentor << "\n"
      << "beta=" << to_string(c.beta) << "\n"
      << "eta=" << to_string(c.eta) << "\n"
      << "num_episodes=" << c.num_episodes << "\n"
      << "seed=" << c.seed << "\n"
      << "metric_cadence=" << c.metric_cadence << "\n"
      << "enumeration_cap=" << c.enumeration_cap << "\n"
      << "beta_sweep=" << join(c.beta_sweep) << "\n"
      << "burn_in_fraction=" << to_string(c.burn_in_fraction) << "\n"
      << "record_wallclock=" << (c.record_wallclock ? "true" : "false") << "\n";
  return out.str();
}

ExperimentSetup build_setup(const ExperimentConfig& config) {
  validate_config(config);
  ExperimentSetup setup{config.spaces(), {}, 0, nullptr, nullptr};
  try {
    if (config.model_class != ModelClassKind::tm) {
      BoxedRoomFamily family = make_boxed_room_family(config.room);
      if (!(family.spaces == setup.spaces))
        throw ConfigError(
            "the boxed-room testbed needs actions=a,b observations=A,B rewards=0,1 m=2");
      setup.models = family.models;
      setup.truth = family.truth;
    }
    if (config.model_class != ModelClassKind::tabular) {
      const TransitionVocabulary vocab = config.tm_vocabulary == "standard"
                                             ? TransitionVocabulary::standard(setup.spaces)
                                             : TransitionVocabulary::minimal();
      const auto machines = enumerate_machines(config.tm_max_states, config.tm_max_space,
                                               config.tm_cap, vocab, setup.spaces.num_actions());
      if (config.model_class == ModelClassKind::tm) {
        if (config.tm_env_index >= machines.size())
          throw ConfigError("tm_env_index " + std::to_string(config.tm_env_index) +
                            " is outside the " + std::to_string(machines.size()) +
                            " enumerated machines, so the true environment is not in the class");
        setup.truth = config.tm_env_index;
      }
      for (const auto& tm : machines)
        setup.models.push_back(
            std::make_shared<TMWorldModel>(tm, setup.spaces, config.tm_step_budget));
    }
    if (setup.models.empty()) throw ConfigError("empty model class");
    setup.policies = std::make_shared<const PolicyClass>(
        builtin_policy_class(config.mentor_class, config.true_mentor, setup.models[setup.truth],
                             setup.spaces, config.enumeration_cap));
    setup.prior = std::make_shared<const Prior>(
        make_prior(setup.models, setup.policies->size(), config.beta, config.eta));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return setup;
}

// ---------------------------------------------------------------------------
// Metrics

Rational onpolicy_prediction_error(const WorldModel::Filter& mu, const WorldModel::Filter& nu,
                                   const PolicyState& policy, std::size_t steps,
                                   std::uint64_t cap) {
  return max_abs_difference(outcome_distribution(mu, policy, steps, cap),
                            outcome_distribution(nu, policy, steps, cap));
}

Rational value_gap(const Rational& v_star, const Rational& v_mentor, const Rational& p_exp) {
  const Rational v_b = p_exp * v_mentor + (1 - p_exp) * v_star;
  return v_b - v_mentor;
}

BoundCheck exploration_bound_check(double cum_pexp_sq, const Prior& prior,
                                   std::size_t truth_world, std::size_t truth_policy) {
  BoundCheck check;
  check.bound = to_double(prior.eta) * entropy(prior) /
                (to_double(prior.policy_weights.at(truth_policy)) *
                 to_double(prior.world_weights.at(truth_world)));
  check.pass = cum_pexp_sq <= check.bound;
  return check;
}

Rational z_value(const JointPosterior& post, std::size_t truth_world, std::size_t truth_policy) {
  const Rational w = post.joint_weight(truth_world, truth_policy);
  if (w == 0) throw InvariantViolation("posterior weight on the truth is zero");
  return 1 / w;
}

namespace {

std::vector<std::vector<Rational>> mentor_evidence(const JointPosterior& post,
                                                   std::vector<PolicyStatePtr> states,
                                                   const std::vector<Step>& items) {
  std::vector<std::vector<Rational>> evidence;
  for (const Step& step : items) {
    std::vector<Rational> row(states.size());
    for (std::size_t p = 0; p < states.size(); ++p) {
      if (post.policy_likelihood(p) > 0) row[p] = states[p]->action_distribution().at(step.action);
      states[p] = states[p]->after(step);
    }
    evidence.push_back(std::move(row));
  }
  return evidence;
}

}  // namespace

Rational expected_next_z(const MartingaleState& s) {
  const JointPosterior& post = *s.posterior;
  Rational expectation = 0;
  if (s.p_exp > 0) {
    const PolicyState& mentor = *s.policy_states->at(s.truth_policy);
    for (const auto& [items, prob] : outcome_distribution(*s.mu, mentor, s.m, s.cap)) {
      JointPosterior next = update_world_posterior(post, std::span<const Step>(items));
      next = update_policy_posterior(std::move(next), mentor_evidence(post, *s.policy_states, items),
                                     true);
      expectation += s.p_exp * prob * z_value(next, s.truth_world, s.truth_policy);
    }
  }
  if (s.p_exp < 1) {
    for (const auto& [items, prob] : outcome_distribution(*s.mu, *s.exploit, s.m, s.cap)) {
      const JointPosterior next = update_world_posterior(post, std::span<const Step>(items));
      expectation += (1 - s.p_exp) * prob * z_value(next, s.truth_world, s.truth_policy);
    }
  }
  return expectation;
}

Rational z_martingale_check(const MartingaleState& s) {
  return abs(expected_next_z(s) - z_value(*s.posterior, s.truth_world, s.truth_policy));
}

Rational posterior_consistency_check(const JointPosterior& post, const PolicyState& policy,
                                     std::size_t m, std::uint64_t cap) {
  const std::vector<Rational> weights = post.world_weights();
  OutcomeDistribution mixture;
  for (std::size_t k = 0; k < post.num_models(); ++k) {
    if (!post.filter(k)) continue;
    for (const auto& [items, prob] : outcome_distribution(*post.filter(k), policy, m, cap))
      mixture[items] += weights[k] * prob;
  }
  std::vector<Rational> expected(post.num_models());
  for (const auto& [items, prob] : mixture) {
    const JointPosterior next = update_world_posterior(post, std::span<const Step>(items));
    for (std::size_t k = 0; k < post.num_models(); ++k) expected[k] += prob * next.world_weight(k);
  }
  Rational worst = 0;
  for (std::size_t k = 0; k < post.num_models(); ++k)
    worst = std::max(worst, Rational(abs(expected[k] - weights[k])));
  return worst;
}

// ---------------------------------------------------------------------------
// Run loop

RunSummary run_experiment(const ExperimentConfig& config) {
  return run_experiment(config, build_setup(config));
}

RunSummary run_experiment(const ExperimentConfig& config, const ExperimentSetup& setup,
                          MentorPtr actor) {
  using Clock = std::chrono::steady_clock;
  const std::size_t m = setup.spaces.episode_length();
  const std::uint64_t cap = config.enumeration_cap;
  const std::size_t truth_policy = setup.policies->truth();
  Agent agent(setup.spaces, setup.models, setup.policies, setup.prior, cap, std::move(actor));
  Environment env(setup.models[setup.truth]);
  const CounterRng rng(config.seed);

  RunSummary summary;
  summary.truth_space = setup.models[setup.truth]->space();
  summary.exploration_bound =
      exploration_bound_check(0, *setup.prior, setup.truth, truth_policy).bound;

  for (std::size_t i = 0; i < config.num_episodes; ++i) {
    try {
      const auto t0 = Clock::now();
      EpisodeStart start = agent.plan_episode();
      const WorldModel& map_model_ref = *setup.models[start.map.index];
      const WorldModel::Filter& nu = *agent.posterior().filter(start.map.index);
      const PolicyState& mentor = *agent.policy_states()[truth_policy];

      ++summary.pistar_checks;
      if (start.plan.value() < value(mentor, nu, setup.spaces, m, cap)) ++summary.pistar_violations;

      const bool emit = i % config.metric_cadence == 0;
      MetricsRow row;
      if (emit) {
        const PolicyStatePtr plan_policy = start.plan.policy(setup.spaces.num_actions());
        const auto& mu = env.filter();
        const Rational v_star = value(*plan_policy, mu, setup.spaces, m, cap);
        const Rational v_mentor = value(mentor, mu, setup.spaces, m, cap);
        row.episode = i;
        row.p_exp = start.p_exp;
        row.info_gain = start.info_gain;
        row.map_id = map_model_ref.id();
        row.map_space = map_model_ref.space();
        row.map_benign = map_model_ref.info().benign;
        row.pred_err_star = to_double(onpolicy_prediction_error(mu, nu, *plan_policy, m, cap));
        row.pred_err_mentor = to_double(onpolicy_prediction_error(mu, nu, mentor, m, cap));
        row.v_star_true = to_double(v_star);
        row.v_mentor_true = to_double(v_mentor);
        row.value_gap = to_double(value_gap(v_star, v_mentor, Rational(start.p_exp)));
        row.z_inv_posterior =
            std::exp(-agent.posterior().log_joint_weight(setup.truth, truth_policy));
      }
      summary.cum_pexp_sq += start.p_exp * start.p_exp;
      const EpisodeResult result = agent.play_episode(std::move(start), env, rng);
      if (emit) {
        row.e_i = result.decision.explore;
        row.cum_pexp_sq = summary.cum_pexp_sq;
        if (config.record_wallclock)
          row.wallclock_ms =
              std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        summary.rows.push_back(std::move(row));
      }
    } catch (const Error& e) {
      throw EpisodeError(i, e.what());
    }
  }
  return summary;
}

// ---------------------------------------------------------------------------
// Sweeps

std::size_t burn_in_end(std::size_t num_episodes, const Rational& fraction) {
  const Rational x = Rational(num_episodes) * fraction;
  const mpz_class floor_x = x.get_num() / x.get_den();
  return floor_x.get_ui();
}

void summarize_sweep_point(SweepPoint& point, std::size_t num_episodes,
                           const Rational& burn_in_fraction) {
  const std::size_t start = burn_in_end(num_episodes, burn_in_fraction);
  std::size_t counted = 0;
  std::size_t violations = 0;
  std::size_t nonbenign = 0;
  for (const auto& row : point.run.rows) {
    if (row.episode < start) continue;
    ++counted;
    if (row.map_space > point.run.truth_space) ++violations;
    if (row.map_benign == false) ++nonbenign;
  }
  point.space_violation_freq = counted ? double(violations) / double(counted) : 0.0;
  point.nonbenign_freq = counted ? double(nonbenign) / double(counted) : 0.0;
}

std::vector<RunSummary> run_replicas(const std::vector<ExperimentConfig>& configs) {
  const std::size_t width = std::max(1u, std::thread::hardware_concurrency());
  std::vector<RunSummary> out;
  out.reserve(configs.size());
  for (std::size_t begin = 0; begin < configs.size(); begin += width) {
    const std::size_t end = std::min(configs.size(), begin + width);
    std::vector<std::future<RunSummary>> batch;
    for (std::size_t i = begin; i < end; ++i)
      batch.push_back(std::async(std::launch::async,
                                 [&config = configs[i]] { return run_experiment(config); }));
    for (auto& f : batch) out.push_back(f.get());
  }
  return out;
}

std::vector<SweepPoint> beta_sweep(const ExperimentConfig& base, const std::vector<Rational>& betas,
                                   const std::vector<std::uint64_t>& seeds) {
  std::vector<ExperimentConfig> configs;
  std::vector<SweepPoint> points;
  for (const auto& beta : betas)
    for (std::uint64_t seed : seeds) {
      ExperimentConfig c = base;
      c.beta = beta;
      c.seed = seed;
      configs.push_back(c);
      SweepPoint p;
      p.beta = beta;
      p.seed = seed;
      points.push_back(std::move(p));
    }
  std::vector<RunSummary> runs = run_replicas(configs);
  for (std::size_t i = 0; i < points.size(); ++i) {
    points[i].run = std::move(runs[i]);
    summarize_sweep_point(points[i], base.num_episodes, base.burn_in_fraction);
  }
  return points;
}

// ---------------------------------------------------------------------------
// CSV

const char* const kMetricsHeader =
    "episode,e_i,p_exp,info_gain,map_id,map_space,map_benign,pred_err_star,pred_err_mentor,"
    "v_star_true,v_mentor_true,value_gap,z_inv_posterior,cum_pexp_sq,wallclock_ms";

namespace {

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw InvariantViolation("double formatting failed");
  return std::string(buf, ptr);
}

double parse_double(const std::string& s) {
  double x = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error("bad number '" + s + "' in metrics CSV");
  return x;
}

const char* benign_text(const std::optional<bool>& b) {
  return !b ? "na" : *b ? "true" : "false";
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << kMetricsHeader << '\n';
  for (const auto& r : rows) {
    out << r.episode << ',' << (r.e_i ? 1 : 0) << ',' << format_double(r.p_exp) << ','
        << format_double(r.info_gain) << ',' << r.map_id << ',' << r.map_space << ','
        << benign_text(r.map_benign) << ',' << format_double(r.pred_err_star) << ','
        << format_double(r.pred_err_mentor) << ',' << format_double(r.v_star_true) << ','
        << format_double(r.v_mentor_true) << ',' << format_double(r.value_gap) << ','
        << format_double(r.z_inv_posterior) << ',' << format_double(r.cum_pexp_sq) << ','
        << format_double(r.wallclock_ms) << '\n';
  }
}

void emit_csv(const std::vector<MetricsRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_csv(out, rows);
  out.flush();
  if (!out) throw Error("write to " + path.string() + " failed");
}

std::vector<MetricsRow> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) throw Error("metrics CSV header mismatch");
  std::vector<MetricsRow> rows;
  for (std::size_t number = 2; std::getline(in, line); ++number) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 15)
      throw Error("metrics CSV line " + std::to_string(number) + ": expected 15 fields");
    MetricsRow r;
    try {
      r.episode = parse_unsigned<std::size_t>(f[0]);
      r.e_i = parse_bool(f[1]);
      r.map_space = parse_unsigned<unsigned>(f[5]);
    } catch (const std::invalid_argument& e) {
      throw Error("metrics CSV line " + std::to_string(number) + ": " + e.what());
    }
    r.p_exp = parse_double(f[2]);
    r.info_gain = parse_double(f[3]);
    r.map_id = f[4];
    if (f[6] == "true") r.map_benign = true;
    else if (f[6] == "false") r.map_benign = false;
    else if (f[6] != "na") throw Error("metrics CSV line " + std::to_string(number) + ": bad map_benign");
    r.pred_err_star = parse_double(f[7]);
    r.pred_err_mentor = parse_double(f[8]);
    r.v_star_true = parse_double(f[9]);
    r.v_mentor_true = parse_double(f[10]);
    r.value_gap = parse_double(f[11]);
    r.z_inv_posterior = parse_double(f[12]);
    r.cum_pexp_sq = parse_double(f[13]);
    r.wallclock_ms = parse_double(f[14]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_plot_data(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << "episode,series,value\n";
  for (const auto& r : rows) {
    auto emit = [&](const char* name, double v) {
      out << r.episode << ',' << name << ',' << format_double(v) << '\n';
    };
    emit("e_i", r.e_i ? 1 : 0);
    emit("p_exp", r.p_exp);
    emit("info_gain", r.info_gain);
    emit("map_space", r.map_space);
    if (r.map_benign) emit("map_benign", *r.map_benign ? 1 : 0);
    emit("pred_err_star", r.pred_err_star);
    emit("pred_err_mentor", r.pred_err_mentor);
    emit("v_star_true", r.v_star_true);
    emit("v_mentor_true", r.v_mentor_true);
    emit("value_gap", r.value_gap);
    emit("z_inv_posterior", r.z_inv_posterior);
    emit("cum_pexp_sq", r.cum_pexp_sq);
    emit("wallclock_ms", r.wallclock_ms);
  }
}

}  // namespace bomai
