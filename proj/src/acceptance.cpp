#include "bomai/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <sstream>

#include "bomai/errors.hpp"

namespace bomai {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string csv_of(const RunSummary& run) {
  std::ostringstream out;
  write_csv(out, run.rows);
  return out.str();
}

std::vector<double> column(const RunSummary& run, std::size_t from, std::size_t to,
                           double MetricsRow::*field) {
  std::vector<double> out;
  for (const auto& row : run.rows)
    if (row.episode >= from && row.episode < to) out.push_back(row.*field);
  return out;
}

std::string fmt(double x) {
  std::ostringstream out;
  out.precision(4);
  out << x;
  return out.str();
}

// Independent forward filter over a tabular kernel.
std::vector<Rational> forward_belief(const TabularModel& model, std::span<const Step> steps,
                                     Rational* mass) {
  std::vector<Rational> belief(model.num_states(), Rational(0));
  belief[model.initial_state()] = 1;
  Rational total = 1;
  for (const Step& step : steps) {
    std::vector<Rational> next(model.num_states(), Rational(0));
    Rational p = 0;
    for (std::size_t s = 0; s < belief.size(); ++s) {
      if (belief[s] == 0) continue;
      for (const auto& out : model.row(s, step.action))
        if (out.percept == step.percept()) {
          next[out.next_state] += belief[s] * out.probability;
          p += belief[s] * out.probability;
        }
    }
    total *= p;
    if (p == 0) {
      if (mass) *mass = 0;
      return next;
    }
    for (auto& b : next) b /= p;
    belief = std::move(next);
  }
  if (mass) *mass = total;
  return belief;
}

// Values of every deterministic policy for the next `steps` timesteps.
std::vector<Rational> all_policy_values(const TabularModel& model, const InteractionSpaces& spaces,
                                        const std::vector<Rational>& belief, std::size_t steps) {
  if (steps == 0) return {Rational(0)};
  std::vector<Rational> out;
  for (ActionIndex a = 0; a < spaces.num_actions(); ++a) {
    std::map<Percept, std::vector<Rational>> next;
    std::map<Percept, Rational> prob;
    for (std::size_t s = 0; s < belief.size(); ++s) {
      if (belief[s] == 0) continue;
      for (const auto& o : model.row(s, a)) {
        auto& vec = next[o.percept];
        vec.resize(belief.size());
        vec[o.next_state] += belief[s] * o.probability;
        prob[o.percept] += belief[s] * o.probability;
      }
    }
    // Each child contributes one of its policies' values; take every
    // combination.
    std::vector<Rational> combos = {Rational(0)};
    for (auto& [percept, vec] : next) {
      const Rational p = prob[percept];
      if (p == 0) continue;
      for (auto& b : vec) b /= p;
      const auto child = all_policy_values(model, spaces, vec, steps - 1);
      std::vector<Rational> grown;
      grown.reserve(combos.size() * child.size());
      for (const auto& c : combos)
        for (const auto& v : child) grown.push_back(c + p * (spaces.reward_value(percept.reward) + v));
      combos = std::move(grown);
    }
    out.insert(out.end(), combos.begin(), combos.end());
  }
  return out;
}

}  // namespace

ExperimentConfig reference_config() { return ExperimentConfig{}; }

std::vector<std::uint64_t> reference_seeds() { return {42, 7, 1234, 2024, 31337}; }

// ---------------------------------------------------------------------------
// Tiny instance

TinyInstance make_tiny_instance() {
  InteractionSpaces spaces({"x", "y"}, {"p", "q"}, {Rational(0), Rational(1)}, 1);
  const Percept p0{1, 0}, p1{1, 1}, q0{2, 0}, q1{2, 1};
  // mu: one state.
  std::vector<std::vector<std::vector<KernelOutcome>>> k0 = {{
      {{p0, 0, ratio(1, 8)}, {p1, 0, ratio(3, 8)}, {q0, 0, ratio(1, 4)}, {q1, 0, ratio(1, 4)}},
      {{p0, 0, ratio(1, 4)}, {p1, 0, ratio(1, 4)}, {q0, 0, ratio(1, 4)}, {q1, 0, ratio(1, 4)}},
  }};
  // A two-state alternative that still gives every percept positive mass.
  std::vector<std::vector<std::vector<KernelOutcome>>> k1 = {
      {
          {{p0, 0, ratio(1, 8)}, {p1, 1, ratio(1, 2)}, {q0, 0, ratio(1, 4)}, {q1, 1, ratio(1, 8)}},
          {{p0, 1, ratio(1, 3)}, {p1, 0, ratio(1, 6)}, {q0, 1, ratio(1, 3)}, {q1, 0, ratio(1, 6)}},
      },
      {
          {{p0, 0, ratio(1, 2)}, {p1, 1, ratio(1, 8)}, {q0, 0, ratio(1, 8)}, {q1, 1, ratio(1, 4)}},
          {{p0, 1, ratio(1, 5)}, {p1, 0, ratio(1, 5)}, {q0, 1, ratio(1, 5)}, {q1, 0, ratio(2, 5)}},
      },
  };
  TinyInstance t{spaces, {}, {}, nullptr, nullptr, {}};
  t.tabular.push_back(std::make_shared<TabularModel>(ModelInfo{"mu", 1, true, Rational(1)}, spaces,
                                                     std::vector<std::string>{"s"}, 0, k0));
  t.tabular.push_back(std::make_shared<TabularModel>(ModelInfo{"alt", 2, true, Rational(1)},
                                                     spaces,
                                                     std::vector<std::string>{"s0", "s1"}, 0, k1));
  for (const auto& m : t.tabular) t.models.push_back(m);
  t.policy_dists = {{ratio(2, 3), ratio(1, 3)}, {ratio(1, 5), ratio(4, 5)}};
  std::vector<MentorPtr> mentors = {
      std::make_shared<StationaryMentor>("lefty", t.policy_dists[0]),
      std::make_shared<StationaryMentor>("righty", t.policy_dists[1])};
  t.policies = std::make_shared<const PolicyClass>(std::move(mentors), 0);
  t.prior = std::make_shared<const Prior>(make_prior(t.models, 2, ratio(1, 2), Rational(1)));
  return t;
}

Rational forward_probability(const TabularModel& model, std::span<const Step> steps) {
  Rational mass;
  forward_belief(model, steps, &mass);
  return mass;
}

// ---------------------------------------------------------------------------
// Oracles

std::shared_ptr<const TabularModel> random_tabular_model(const InteractionSpaces& spaces,
                                                         std::size_t max_states,
                                                         const CounterRng& rng,
                                                         std::uint64_t tag) {
  std::uint64_t counter = 0;
  auto draw = [&](std::uint64_t n) { return rng.bits({DrawPurpose::test, tag, counter++}) % n; };
  const std::size_t states = 1 + draw(max_states);
  std::vector<std::string> names;
  for (std::size_t s = 0; s < states; ++s) names.push_back("s" + std::to_string(s));
  std::vector<std::vector<std::vector<KernelOutcome>>> kernel(states);
  for (std::size_t s = 0; s < states; ++s) {
    for (std::size_t a = 0; a < spaces.num_actions(); ++a) {
      const std::size_t outcomes = 1 + draw(3);
      std::vector<KernelOutcome> row;
      long total = 0;
      std::vector<long> weights;
      for (std::size_t i = 0; i < outcomes; ++i) {
        KernelOutcome o;
        o.percept = {static_cast<ObservationIndex>(draw(spaces.num_observations())),
                     static_cast<RewardIndex>(draw(spaces.num_rewards()))};
        o.next_state = draw(states);
        weights.push_back(1 + static_cast<long>(draw(4)));
        total += weights.back();
        row.push_back(o);
      }
      for (std::size_t i = 0; i < outcomes; ++i) row[i].probability = ratio(weights[i], total);
      kernel[s].push_back(std::move(row));
    }
  }
  return std::make_shared<TabularModel>(ModelInfo{"random" + std::to_string(tag), 1, {}, 1},
                                        spaces, names, 0, kernel);
}

Rational brute_force_optimal_value(const TabularModel& model, const InteractionSpaces& spaces,
                                   const std::vector<Rational>& belief, std::size_t steps) {
  const auto values = all_policy_values(model, spaces, belief, steps);
  return *std::max_element(values.begin(), values.end());
}

TMSpec random_machine(const InteractionSpaces& spaces, std::size_t max_states, unsigned max_space,
                      const CounterRng& rng, std::uint64_t tag) {
  std::uint64_t counter = 0;
  auto draw = [&](std::uint64_t n) { return rng.bits({DrawPurpose::test, tag, counter++}) % n; };
  const auto templates = TransitionVocabulary::standard(spaces).templates;
  TMSpec tm;
  tm.num_states = 1 + draw(max_states);
  tm.num_symbols = spaces.num_actions();
  tm.space = 1 + static_cast<unsigned>(draw(max_space));
  auto record = [&] {
    TMRecord r = templates[draw(templates.size())];
    r.next_state = static_cast<std::uint16_t>(draw(tm.num_states));
    return r;
  };
  for (std::size_t key = 0; key < tm.num_keys(); ++key) {
    if (draw(4) == 0) {
      TMRecord a = record();
      TMRecord b = record();
      tm.transitions.push_back(a == b ? TMEntry::plain(a) : TMEntry::noisy(a, b));
    } else {
      tm.transitions.push_back(TMEntry::plain(record()));
    }
  }
  tm.validate();
  return tm;
}

// ---------------------------------------------------------------------------
// Suite

std::string format_result(const CriterionResult& r) {
  std::ostringstream out;
  out << (r.pass ? "PASS" : "FAIL") << " [" << r.id << "] " << r.title << " (" << fmt(r.seconds)
      << " s): " << r.detail;
  return out.str();
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2;
}

AcceptanceSuite::AcceptanceSuite(ExperimentConfig reference, std::vector<std::uint64_t> seeds,
                                 std::ostream* log)
    : reference_(std::move(reference)), seeds_(std::move(seeds)), log_(log) {}

const AcceptanceSuite::Runs& AcceptanceSuite::runs() {
  if (runs_) return *runs_;
  Runs r;
  std::vector<ExperimentConfig> configs;
  for (std::uint64_t seed : seeds_) {
    ExperimentConfig c = reference_;
    c.seed = seed;
    configs.push_back(c);
    c.true_mentor = "uniform";
    configs.push_back(c);
  }
  std::vector<Rational> other_betas;
  for (const auto& b : reference_.beta_sweep)
    if (b != reference_.beta) other_betas.push_back(b);
  for (const auto& b : other_betas)
    for (std::uint64_t seed : seeds_) {
      ExperimentConfig c = reference_;
      c.beta = b;
      c.seed = seed;
      configs.push_back(c);
    }
  if (log_) *log_ << "running " << configs.size() << " experiments..." << std::endl;
  std::vector<RunSummary> all = run_replicas(configs);
  std::size_t next = 0;
  for (std::size_t i = 0; i < seeds_.size(); ++i) {
    r.reference.push_back(std::move(all[next++]));
    r.weak.push_back(std::move(all[next++]));
  }
  for (const auto& b : reference_.beta_sweep) {
    for (std::size_t i = 0; i < seeds_.size(); ++i) {
      SweepPoint p;
      p.beta = b;
      p.seed = seeds_[i];
      if (b == reference_.beta) {
        p.run = r.reference[i];
      } else {
        p.run = std::move(all[next++]);
      }
      summarize_sweep_point(p, reference_.num_episodes, reference_.burn_in_fraction);
      r.sweep.push_back(std::move(p));
    }
  }
  runs_ = std::move(r);
  return *runs_;
}

CriterionResult AcceptanceSuite::exactness() {
  const auto t0 = Clock::now();
  CriterionResult res{1, "exact posterior and martingale identities on the tiny instance", true,
                      "", 0};
  const TinyInstance t = make_tiny_instance();
  const std::uint64_t cap = 100000;
  const std::size_t m = t.spaces.episode_length();
  Agent agent(t.spaces, t.models, t.policies, t.prior, cap);
  Environment env(t.models[0]);
  const CounterRng rng(42);
  const JointPosterior fresh(t.prior, t.models);
  std::size_t checks = 0;
  std::string failure;
  auto fail = [&](const std::string& what) {
    if (failure.empty()) failure = what;
  };

  for (std::size_t ep = 0; ep < 16 && failure.empty(); ++ep) {
    const JointPosterior& post = agent.posterior();
    const History& h = agent.history();
    const std::string at = " at episode " + std::to_string(ep);

    // Closed form: w(nu, pi) nu(h) pi(exploratory actions), normalized.
    std::vector<std::vector<Rational>> joint(t.models.size(),
                                             std::vector<Rational>(t.policy_dists.size()));
    Rational total = 0;
    for (std::size_t k = 0; k < t.models.size(); ++k)
      for (std::size_t p = 0; p < t.policy_dists.size(); ++p) {
        Rational w = t.prior->world_weights[k] * t.prior->policy_weights[p] *
                     forward_probability(*t.tabular[k], h.items);
        for (std::size_t e = 0; e < h.completed_episodes(m); ++e)
          if (h.exploration_flags[e])
            for (const Step& s : episode_slice(h, e, m)) w *= t.policy_dists[p][s.action];
        joint[k][p] = w;
        total += w;
      }
    for (std::size_t k = 0; k < t.models.size(); ++k)
      for (std::size_t p = 0; p < t.policy_dists.size(); ++p)
        if (post.joint_weight(k, p) != joint[k][p] / total) fail("closed form differs" + at);

    // Incremental against batch conditioning.
    if (update_world_posterior(fresh, std::span<const Step>(h.items)).world_weights() !=
        post.world_weights())
      fail("batch and incremental world posteriors differ" + at);

    const EpisodeStart start = agent.plan_episode();
    const PolicyStatePtr plan = start.plan.policy(t.spaces.num_actions());
    for (const PolicyState* pol : {plan.get(), agent.policy_states()[0].get()})
      if (posterior_consistency_check(post, *pol, m, cap) != 0)
        fail("world posterior is not a mixture martingale" + at);

    MartingaleState s;
    s.posterior = &post;
    s.policy_states = &agent.policy_states();
    s.mu = &env.filter();
    s.truth_world = 0;
    s.truth_policy = t.policies->truth();
    s.exploit = plan.get();
    s.p_exp = Rational(start.p_exp);
    s.m = m;
    s.cap = cap;
    const Rational err = z_martingale_check(s);
    if (err != 0) fail("z martingale error " + to_string(err) + at);
    checks += 4;
    agent.play_episode(start, env, rng);
  }
  res.seconds = seconds_since(t0);
  res.pass = failure.empty() && res.seconds < 10;
  res.detail = failure.empty() ? std::to_string(checks) + " exact identities hold" : failure;
  if (res.seconds >= 10) res.detail += "; exceeded 10 s";
  return res;
}

CriterionResult AcceptanceSuite::exploration_bound() {
  const auto t0 = Clock::now();
  CriterionResult res{2, "square-summable exploration bound and vanishing p_exp", true, "", 0};
  const auto& r = runs();
  const std::size_t n = reference_.num_episodes;
  std::ostringstream detail;
  for (std::size_t i = 0; i < seeds_.size(); ++i) {
    const RunSummary& run = r.reference[i];
    const double med = median(column(run, n - n / 10, n, &MetricsRow::p_exp));
    const bool ok = run.cum_pexp_sq <= run.exploration_bound && med < kFinalPexpMedianMax;
    res.pass = res.pass && ok;
    detail << "seed " << seeds_[i] << ": sum p^2 " << fmt(run.cum_pexp_sq) << " <= "
           << fmt(run.exploration_bound) << ", final median p_exp " << fmt(med) << "; ";
  }
  res.seconds = seconds_since(t0);
  res.detail = detail.str();
  return res;
}

CriterionResult AcceptanceSuite::prediction_decay() {
  const auto t0 = Clock::now();
  CriterionResult res{3, "on-policy prediction error decays", true, "", 0};
  const auto& r = runs();
  const std::size_t n = reference_.num_episodes;
  std::ostringstream detail;
  for (std::size_t i = 0; i < seeds_.size(); ++i) {
    const RunSummary& run = r.reference[i];
    detail << "seed " << seeds_[i] << ":";
    for (auto field : {&MetricsRow::pred_err_mentor, &MetricsRow::pred_err_star}) {
      const double first = median(column(run, 0, n / 10, field));
      const double last = median(column(run, n - n / 10, n, field));
      res.pass = res.pass && last < kFinalPredErrMedianMax && last < first;
      detail << " " << (field == &MetricsRow::pred_err_mentor ? "mentor" : "star") << " "
             << fmt(first) << " -> " << fmt(last);
    }
    detail << "; ";
  }
  res.seconds = seconds_since(t0);
  res.detail = detail.str();
  return res;
}

CriterionResult AcceptanceSuite::value_gap() {
  const auto t0 = Clock::now();
  CriterionResult res{4, "agent matches the strong mentor and beats the weak one", true, "", 0};
  const auto& r = runs();
  const std::size_t n = reference_.num_episodes;
  std::ostringstream detail;
  for (std::size_t i = 0; i < seeds_.size(); ++i) {
    const auto strong = column(r.reference[i], n - n / 10, n, &MetricsRow::value_gap);
    const double worst = *std::min_element(strong.begin(), strong.end());
    const double weak = median(column(r.weak[i], n - n / 10, n, &MetricsRow::value_gap));
    res.pass = res.pass && worst >= kValueGapFloor && weak > 0;
    detail << "seed " << seeds_[i] << ": min gap " << fmt(worst) << ", weak median " << fmt(weak)
           << "; ";
  }
  res.seconds = seconds_since(t0);
  res.detail = detail.str();
  return res;
}

CriterionResult AcceptanceSuite::benignity() {
  const auto t0 = Clock::now();
  CriterionResult res{5, "space-penalized prior excludes the non-benign model", true, "", 0};
  const auto& r = runs();
  std::vector<Rational> betas = reference_.beta_sweep;
  std::sort(betas.begin(), betas.end(), std::greater<>());
  const std::size_t burn = burn_in_end(reference_.num_episodes, reference_.burn_in_fraction);
  std::ostringstream detail;
  for (std::uint64_t seed : seeds_) {
    detail << "seed " << seed << ":";
    double previous = 2;
    for (const auto& beta : betas) {
      const auto it = std::find_if(r.sweep.begin(), r.sweep.end(), [&](const SweepPoint& p) {
        return p.beta == beta && p.seed == seed;
      });
      const double freq = it->space_violation_freq;
      res.pass = res.pass && freq <= previous;
      previous = freq;
      detail << " beta " << to_string(beta) << " " << fmt(freq);
      if (beta == betas.back()) {
        bool all_benign = true;
        for (const auto& row : it->run.rows)
          if (row.episode >= burn && row.map_benign != true) all_benign = false;
        res.pass = res.pass && freq == 0 && all_benign;
        detail << (all_benign ? " all benign" : " NON-BENIGN MAP");
      }
    }
    detail << "; ";
  }
  res.seconds = seconds_since(t0);
  res.detail = detail.str();
  return res;
}

CriterionResult AcceptanceSuite::expectimax_oracle() {
  const auto t0 = Clock::now();
  CriterionResult res{6, "expectimax equals the policy-enumeration oracle", true, "", 0};
  const CounterRng rng(6);
  std::size_t mismatches = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    std::uint64_t counter = 0;
    auto draw = [&](std::uint64_t n) {
      return rng.bits({DrawPurpose::test, 1000 + trial, counter++}) % n;
    };
    std::vector<std::string> actions = {"a0", "a1"};
    if (draw(2)) actions.push_back("a2");
    std::vector<std::string> obs = {"o1"};
    if (draw(2)) obs.push_back("o2");
    std::vector<Rational> rewards = {Rational(0), Rational(1)};
    if (draw(2)) rewards.insert(rewards.begin() + 1, ratio(1, 2));
    const InteractionSpaces spaces(actions, obs, rewards, 1 + draw(2));
    const auto model = random_tabular_model(spaces, 2, rng, trial);
    // Random prefix sampled from the model itself.
    std::vector<Step> prefix;
    const std::size_t len = draw(2 * spaces.episode_length());
    auto filter = model->start();
    for (std::size_t j = 0; j < len; ++j) {
      const auto a = static_cast<ActionIndex>(draw(spaces.num_actions()));
      const auto dist = filter->predict(a);
      std::vector<Rational> probs;
      for (const auto& e : dist) probs.push_back(e.second);
      const Percept p = dist[sample_index(probs, rng.bits({DrawPurpose::test, trial, 500 + j}))].first;
      prefix.push_back({a, p.observation, p.reward});
      filter = filter->observe(a, p).next;
    }
    const std::size_t steps = spaces.episode_length() - len % spaces.episode_length();
    const Rational fast = optimal_policy(*filter, spaces, steps, 1000000).value();
    const Rational oracle =
        brute_force_optimal_value(*model, spaces, forward_belief(*model, prefix, nullptr), steps);
    if (fast != oracle) ++mismatches;
  }
  std::size_t violations = 0;
  std::size_t checks = 0;
  for (const auto& run : runs().reference) {
    violations += run.pistar_violations;
    checks += run.pistar_checks;
  }
  res.pass = mismatches == 0 && violations == 0 && checks > 0;
  res.seconds = seconds_since(t0);
  res.detail = std::to_string(100 - mismatches) + "/100 instances agree; " +
               std::to_string(violations) + " of " + std::to_string(checks) +
               " reference histories with V*(MAP) < V_mentor(MAP)";
  return res;
}

CriterionResult AcceptanceSuite::tm_semantics() {
  const auto t0 = Clock::now();
  CriterionResult res{7, "machine percept distributions and branch conservation", true, "", 0};
  std::string failure;
  auto fail = [&](const std::string& what) {
    if (failure.empty()) failure = what;
  };
  auto uniform_table = [](const InteractionSpaces& spaces, const TMEntry& entry) {
    TMSpec tm;
    tm.num_states = 1;
    tm.num_symbols = spaces.num_actions();
    tm.space = 1;
    tm.transitions.assign(tm.num_keys(), entry);
    return tm;
  };
  const History empty;
  {
    const InteractionSpaces spaces({"a", "b"}, {"o1", "o2"}, {Rational(0), Rational(1)}, 2);
    TMRecord r;
    r.output_count = 2;
    r.output_bits = 0b10;
    r.advance = true;
    const auto dist = percept_distribution(uniform_table(spaces, TMEntry::plain(r)), spaces, empty,
                                           0, kDefaultStepBudget);
    if (dist != PerceptDistribution{{Percept{2, 0}, Rational(1)}})
      fail("fixed writer is not a point mass on (o2, 0)");
  }
  {
    const InteractionSpaces spaces({"a", "b"}, {"o1", "o2"}, {Rational(0)}, 2);
    TMRecord zero, one;
    zero.output_count = one.output_count = 1;
    one.output_bits = 1;
    zero.advance = one.advance = true;
    const auto dist = percept_distribution(uniform_table(spaces, TMEntry::noisy(zero, one)),
                                           spaces, empty, 1, kDefaultStepBudget);
    if (dist != PerceptDistribution{{Percept{1, 0}, ratio(1, 2)}, {Percept{2, 0}, ratio(1, 2)}})
      fail("coin-flip copier is not uniform over two observations");
  }
  {
    const InteractionSpaces spaces({"a", "b"}, {"o1", "o2"}, {Rational(0), Rational(1)}, 2);
    const auto dist = percept_distribution(uniform_table(spaces, TMEntry::plain(TMRecord{})),
                                           spaces, empty, 0, kDefaultStepBudget);
    if (dist != PerceptDistribution{{spaces.empty_percept(), Rational(1)}})
      fail("non-advancer is not a point mass on (empty, 0)");
  }

  const InteractionSpaces spaces({"a", "b"}, {"o1", "o2"}, {Rational(0), Rational(1)}, 2);
  const CounterRng rng(7);
  std::size_t timesteps = 0;
  for (std::uint64_t trial = 0; trial < 1000 && failure.empty(); ++trial) {
    const TMSpec tm = random_machine(spaces, 2, 2, rng, trial);
    const std::string which = " (machine " + encode_machine(tm) + ")";
    // Phase invariants along a raw walk.
    TMConfiguration c = initial_configuration(tm);
    for (std::uint64_t s = 0; s < 200; ++s) {
      const std::uint64_t bits = rng.bits({DrawPurpose::test, 1u << 20 | trial, s});
      StepResult r = step(c, tm, bits % tm.num_symbols, std::nullopt, spaces.episode_length());
      if (r.needs_noise) {
        const StepResult a = step(c, tm, bits % tm.num_symbols, false, spaces.episode_length());
        const StepResult b = step(c, tm, bits % tm.num_symbols, true, spaces.episode_length());
        if (a.next.noise_pos != c.noise_pos + 1 || b.next.noise_pos != c.noise_pos + 1)
          fail("noise read did not consume one bit" + which);
        r = (bits >> 32) & 1 ? b : a;
      }
      try {
        check_step_invariants(c, r.next, tm, spaces.episode_length());
      } catch (const InvariantViolation& e) {
        fail(e.what() + which);
      }
      c = std::move(r.next);
    }
    // Exact conservation along a sampled trajectory.
    TMWorldModel model(tm, spaces, 16);
    auto filter = model.start();
    for (std::uint64_t j = 0; j < 4 && failure.empty(); ++j) {
      const auto a = static_cast<ActionIndex>(rng.bits({DrawPurpose::test, trial, 2 * j}) % 2);
      const auto dist = filter->predict(a);
      std::vector<Rational> probs;
      for (const auto& [p, w] : dist) {
        if (!(w > 0)) fail("non-positive percept probability" + which);
        probs.push_back(w);
      }
      if (sum(probs) != 1) fail("percept probabilities sum to " + to_string(sum(probs)) + which);
      const std::size_t pick = sample_index(probs, rng.bits({DrawPurpose::test, trial, 2 * j + 1}));
      const auto cond = filter->observe(a, dist[pick].first);
      if (cond.probability != probs[pick]) fail("conditioning mass mismatch" + which);
      filter = cond.next;
      ++timesteps;
    }
  }
  res.pass = failure.empty();
  res.seconds = seconds_since(t0);
  res.detail = failure.empty() ? "three examples exact; " + std::to_string(timesteps) +
                                     " timesteps over 1000 random machines conserve mass"
                               : failure;
  return res;
}

CriterionResult AcceptanceSuite::determinism(const std::vector<CriterionResult>& earlier) {
  const auto t0 = Clock::now();
  CriterionResult res{8, "deterministic output and a clean verify", true, "", 0};
  ExperimentConfig c = reference_;
  c.num_episodes = std::min<std::size_t>(c.num_episodes, 500);
  const std::string first = csv_of(run_experiment(c));
  const std::string second = csv_of(run_experiment(c));
  ExperimentConfig other = c;
  other.seed = c.seed + 1;
  const auto concurrent = run_replicas({other, c});
  const bool same = first == second && first == csv_of(concurrent[1]);
  std::vector<int> failed;
  for (const auto& r : earlier)
    if (!r.pass) failed.push_back(r.id);
  res.pass = same && failed.empty();
  res.seconds = seconds_since(t0);
  std::ostringstream detail;
  detail << (same ? "CSV byte-identical across reruns and concurrent replicas"
                  : "CSV differs between reruns");
  if (!failed.empty()) {
    detail << "; failing criteria:";
    for (int id : failed) detail << " " << id;
  } else {
    detail << "; criteria 1-7 pass";
  }
  res.detail = detail.str();
  return res;
}

std::vector<CriterionResult> AcceptanceSuite::run_all(
    const std::function<void(const CriterionResult&)>& on_result) {
  std::vector<CriterionResult> out;
  auto record = [&](CriterionResult r) {
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  };
  auto guarded = [&](int id, const char* title, auto&& fn) {
    try {
      record(fn());
    } catch (const std::exception& e) {
      record({id, title, false, std::string("threw: ") + e.what(), 0});
    }
  };
  guarded(1, "exactness", [&] { return exactness(); });
  guarded(2, "exploration bound", [&] { return exploration_bound(); });
  guarded(3, "prediction decay", [&] { return prediction_decay(); });
  guarded(4, "value gap", [&] { return value_gap(); });
  guarded(5, "benignity", [&] { return benignity(); });
  guarded(6, "expectimax oracle", [&] { return expectimax_oracle(); });
  guarded(7, "machine semantics", [&] { return tm_semantics(); });
  guarded(8, "determinism", [&] { return determinism(out); });
  return out;
}

}  // namespace bomai
