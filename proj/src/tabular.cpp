#include "bomai/tabular.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "bomai/errors.hpp"

namespace bomai {

// ---------------------------------------------------------------------------
// TabularModel

class TabularModel::Belief final : public WorldModel::Filter {
 public:
  using Entries = std::vector<std::pair<std::size_t, Rational>>;

  Belief(const TabularModel* model, Entries entries)
      : model_(model), entries_(std::move(entries)) {}

  PerceptDistribution predict(ActionIndex action) const override {
    std::map<Percept, Rational> acc;
    for (const auto& [state, weight] : entries_)
      for (const auto& out : model_->row(state, action))
        acc[out.percept] += weight * out.probability;
    PerceptDistribution dist;
    dist.reserve(acc.size());
    for (auto& [p, prob] : acc)
      if (prob > 0) dist.emplace_back(p, std::move(prob));
    return dist;
  }

  Conditioned observe(ActionIndex action, Percept percept) const override {
    std::map<std::size_t, Rational> next;
    Rational total = 0;
    for (const auto& [state, weight] : entries_) {
      for (const auto& out : model_->row(state, action)) {
        if (out.percept != percept) continue;
        Rational mass = weight * out.probability;
        total += mass;
        next[out.next_state] += mass;
      }
    }
    if (total == 0) return {0, nullptr};
    Entries entries;
    entries.reserve(next.size());
    for (auto& [state, mass] : next) {
      if (mass == 0) continue;
      mass /= total;
      entries.emplace_back(state, std::move(mass));
    }
    return {total, std::make_shared<Belief>(model_, std::move(entries))};
  }

  const Entries& entries() const { return entries_; }

 private:
  const TabularModel* model_;
  Entries entries_;
};

TabularModel::TabularModel(ModelInfo info, const InteractionSpaces& spaces,
                           std::vector<std::string> state_names, std::size_t initial_state,
                           std::vector<std::vector<std::vector<KernelOutcome>>> kernel)
    : WorldModel(std::move(info)),
      state_names_(std::move(state_names)),
      initial_state_(initial_state),
      num_actions_(spaces.num_actions()) {
  const std::string where = "tabular model '" + id() + "'";
  if (state_names_.empty()) throw std::invalid_argument(where + ": no states");
  if (initial_state_ >= state_names_.size())
    throw std::invalid_argument(where + ": initial state out of range");
  if (kernel.size() != state_names_.size())
    throw std::invalid_argument(where + ": kernel has " + std::to_string(kernel.size()) +
                                " states, expected " + std::to_string(state_names_.size()));
  rows_.resize(state_names_.size() * num_actions_);
  for (std::size_t s = 0; s < kernel.size(); ++s) {
    if (kernel[s].size() != num_actions_)
      throw std::invalid_argument(where + ": state " + state_names_[s] + " lacks a row per action");
    for (std::size_t a = 0; a < num_actions_; ++a) {
      // Merge duplicate (percept, next) entries and drop zeros.
      std::map<std::pair<Percept, std::size_t>, Rational> merged;
      Rational total = 0;
      for (const auto& out : kernel[s][a]) {
        if (out.probability < 0)
          throw std::invalid_argument(where + ": negative probability");
        if (out.percept.observation >= spaces.num_observations() ||
            out.percept.reward >= spaces.num_rewards())
          throw std::invalid_argument(where + ": percept outside the alphabets");
        if (out.next_state >= state_names_.size())
          throw std::invalid_argument(where + ": next state out of range");
        merged[{out.percept, out.next_state}] += out.probability;
        total += out.probability;
      }
      if (total != 1)
        throw std::invalid_argument(where + ": row (" + state_names_[s] + ", " +
                                    spaces.actions()[a] + ") sums to " + to_string(total));
      auto& row = rows_[s * num_actions_ + a];
      for (auto& [key, prob] : merged)
        if (prob > 0) row.push_back({key.first, key.second, std::move(prob)});
    }
  }
}

WorldModel::FilterPtr TabularModel::start() const {
  return std::make_shared<Belief>(this, Belief::Entries{{initial_state_, Rational(1)}});
}

const std::vector<KernelOutcome>& TabularModel::row(std::size_t state, ActionIndex action) const {
  return rows_.at(state * num_actions_ + action);
}

PerceptDistribution TabularModel::row_percepts(std::size_t state, ActionIndex action) const {
  std::map<Percept, Rational> acc;
  for (const auto& out : row(state, action)) acc[out.percept] += out.probability;
  return {acc.begin(), acc.end()};
}

std::vector<std::pair<std::size_t, Rational>> TabularModel::belief_after(
    std::span<const Step> steps) const {
  auto filter = filter_history(*this, steps);
  return static_cast<const Belief&>(*filter).entries();
}

bool is_benign(const WorldModel& model) { return model.info().benign.value_or(false); }

// ---------------------------------------------------------------------------
// Boxed room

namespace {

void check_distribution(const std::vector<Rational>& dist, std::size_t size,
                        const std::string& what) {
  if (dist.size() != size) throw std::invalid_argument(what + ": wrong length");
  Rational total = 0;
  for (const auto& p : dist) {
    if (p < 0) throw std::invalid_argument(what + ": negative probability");
    total += p;
  }
  if (total != 1) throw std::invalid_argument(what + ": sums to " + to_string(total));
}

RewardIndex max_reward(const InteractionSpaces& spaces) {
  RewardIndex best = 0;
  for (std::size_t r = 1; r < spaces.num_rewards(); ++r)
    if (spaces.reward_value(static_cast<RewardIndex>(r)) > spaces.reward_value(best))
      best = static_cast<RewardIndex>(r);
  return best;
}

}  // namespace

std::shared_ptr<const TabularModel> make_boxed_room_model(const BoxedRoomSpec& spec,
                                                          const InteractionSpaces& spaces,
                                                          std::string id, unsigned space,
                                                          Rational base_weight) {
  const std::size_t rooms = spec.room_states.size();
  const std::size_t outsides = spec.outside_states.size();
  const std::size_t m = spaces.episode_length();
  const std::size_t num_actions = spaces.num_actions();
  if (rooms == 0 || outsides == 0) throw std::invalid_argument("boxed room needs states");
  if (spec.room_dynamics.size() != rooms) throw std::invalid_argument("room_dynamics size");
  if (spec.episode_start.size() != outsides || spec.outside_update.size() != outsides ||
      spec.hijacked.size() != outsides)
    throw std::invalid_argument("outside tables size");
  if (spec.initial_outside >= outsides) throw std::invalid_argument("initial_outside");
  for (std::size_t o = 0; o < outsides; ++o) {
    check_distribution(spec.episode_start[o], rooms, "episode_start");
    check_distribution(spec.outside_update[o][0], outsides, "outside_update");
    check_distribution(spec.outside_update[o][1], outsides, "outside_update");
  }
  for (std::size_t r = 0; r < rooms; ++r) {
    if (spec.room_dynamics[r].size() != num_actions)
      throw std::invalid_argument("room_dynamics needs a row per action");
    for (const auto& row : spec.room_dynamics[r]) {
      Rational total = 0;
      for (const auto& out : row) {
        if (out.next_room >= rooms) throw std::invalid_argument("next_room out of range");
        total += out.probability;
      }
      if (total != 1) throw std::invalid_argument("room dynamics row sums to " + to_string(total));
    }
  }

  // State layout: (outside, j, slot) with slot a room, `undrawn` or `door`.
  const std::size_t undrawn = rooms;
  const std::size_t door = rooms + 1;
  const std::size_t slots = rooms + 2;
  auto index = [&](std::size_t outside, std::size_t j, std::size_t slot) {
    return (outside * m + j) * slots + slot;
  };
  const std::size_t num_states = outsides * m * slots;

  std::vector<std::string> names(num_states);
  for (std::size_t o = 0; o < outsides; ++o)
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t s = 0; s < slots; ++s)
        names[index(o, j, s)] =
            spec.outside_states[o] + "/" + std::to_string(j) + "/" +
            (s == undrawn ? std::string("undrawn") : s == door ? std::string("door")
                                                               : spec.room_states[s]);

  const Percept empty = spaces.empty_percept();
  const RewardIndex hijack_reward = max_reward(spaces);

  std::vector<std::vector<std::vector<KernelOutcome>>> kernel(
      num_states, std::vector<std::vector<KernelOutcome>>(num_actions));

  for (std::size_t o = 0; o < outsides; ++o) {
    for (std::size_t j = 0; j < m; ++j) {
      const bool last = j + 1 == m;
      // Emits one outcome, routing the successor through the inter-episode
      // update when the episode ends.
      auto emit = [&](std::vector<KernelOutcome>& row, Percept percept, bool door_open,
                      std::size_t next_room, const Rational& prob) {
        if (prob == 0) return;
        if (!last) {
          row.push_back({percept, index(o, j + 1, door_open ? door : next_room), prob});
          return;
        }
        const auto& update = spec.outside_update[o][door_open ? 1 : 0];
        for (std::size_t o2 = 0; o2 < outsides; ++o2)
          if (update[o2] > 0) row.push_back({percept, index(o2, 0, undrawn), prob * update[o2]});
      };

      auto room_row = [&](std::vector<KernelOutcome>& row, std::size_t room, ActionIndex a,
                          const Rational& weight) {
        if (spec.door_action && *spec.door_action == a) {
          emit(row, empty, true, 0, weight);
          return;
        }
        for (const auto& out : spec.room_dynamics[room][a]) {
          if (out.door_opens) {
            emit(row, empty, true, 0, weight * out.probability);
            continue;
          }
          RewardIndex reward = out.reward;
          if (spec.channel == RewardChannel::hijack && spec.hijacked[o]) reward = hijack_reward;
          emit(row, Percept{out.observation, reward}, false, out.next_room,
               weight * out.probability);
        }
      };

      for (std::size_t a = 0; a < num_actions; ++a) {
        const auto action = static_cast<ActionIndex>(a);
        emit(kernel[index(o, j, door)][a], empty, true, 0, Rational(1));
        for (std::size_t r = 0; r < rooms; ++r) room_row(kernel[index(o, j, r)][a], r, action, 1);
        for (std::size_t r = 0; r < rooms; ++r)
          room_row(kernel[index(o, j, undrawn)][a], r, action, spec.episode_start[o][r]);
      }
    }
  }

  ModelInfo info;
  info.id = std::move(id);
  info.space = space;
  info.benign = spec.channel == RewardChannel::operator_given;
  info.base_weight = std::move(base_weight);
  return std::make_shared<TabularModel>(std::move(info), spaces, std::move(names),
                                        index(spec.initial_outside, 0, undrawn),
                                        std::move(kernel));
}

InteractionSpaces boxed_room_spaces() {
  return InteractionSpaces({"a", "b"}, {"A", "B"}, {Rational(0), Rational(1)}, 2);
}

BoxedRoomSpec reference_room_spec(const BoxedRoomParams& params) {
  constexpr ObservationIndex kObsA = 1;
  constexpr ObservationIndex kObsB = 2;
  constexpr RewardIndex kZero = 0;
  constexpr RewardIndex kOne = 1;
  // Rooms: fresh task A/B, then awaiting the answer for task A/B.
  enum : std::size_t { task_a, task_b, answer_a, answer_b };

  BoxedRoomSpec spec;
  spec.room_states = {"taskA", "taskB", "answerA", "answerB"};
  spec.outside_states = {"calm", "tampered"};
  spec.room_dynamics.resize(4);

  const Rational& press = params.door_press_prob;
  const Rational& pays = params.blurt_reward_prob;
  for (std::size_t task : {task_a, task_b}) {
    const ObservationIndex reveal = task == task_a ? kObsA : kObsB;
    const std::size_t answer = task == task_a ? answer_a : answer_b;
    spec.room_dynamics[task] = {
        // a: ask for the task
        {RoomOutcome{1, reveal, kZero, answer, false}},
        // b: blurt a guess
        {RoomOutcome{press, kObsA, kZero, answer, true},
         RoomOutcome{(1 - press) * pays, kObsA, kOne, answer, false},
         RoomOutcome{(1 - press) * (1 - pays), kObsA, kZero, answer, false}},
    };
  }
  for (std::size_t answer : {answer_a, answer_b}) {
    const ObservationIndex echo = answer == answer_a ? kObsA : kObsB;
    const ActionIndex correct = answer == answer_a ? 0 : 1;
    spec.room_dynamics[answer].resize(2);
    for (ActionIndex a = 0; a < 2; ++a)
      spec.room_dynamics[answer][a] = {
          RoomOutcome{1, echo, a == correct ? kOne : kZero, answer, false}};
  }

  spec.episode_start = {{ratio(1, 2), ratio(1, 2), 0, 0}, {ratio(1, 2), ratio(1, 2), 0, 0}};
  // The real outside world is unaffected by the door.
  spec.outside_update = {std::array<std::vector<Rational>, 2>{{{1, 0}, {1, 0}}},
                         std::array<std::vector<Rational>, 2>{{{0, 1}, {0, 1}}}};
  spec.initial_outside = 0;
  spec.channel = RewardChannel::operator_given;
  spec.hijacked = {false, true};
  return spec;
}

BoxedRoomFamily make_boxed_room_family(const BoxedRoomParams& params) {
  if (params.truth_space < 1 || params.biased_space < 1)
    throw std::invalid_argument("space labels must be positive");
  if (!is_probability(params.door_press_prob) || !is_probability(params.blurt_reward_prob) ||
      !is_probability(params.biased_task_prob))
    throw std::invalid_argument("testbed probabilities must lie in [0,1]");
  if (params.hijack_weight <= 0) throw std::invalid_argument("hijack_weight must be positive");

  InteractionSpaces spaces = boxed_room_spaces();
  const BoxedRoomSpec truth = reference_room_spec(params);
  const unsigned l0 = params.truth_space;

  BoxedRoomSpec hijack = truth;
  hijack.channel = RewardChannel::hijack;
  // Opening the door lets the outside world tamper with stored rewards.
  hijack.outside_update[0] = {std::vector<Rational>{1, 0}, std::vector<Rational>{0, 1}};

  BoxedRoomSpec biased = truth;
  for (auto& start : biased.episode_start)
    start = {params.biased_task_prob, 1 - params.biased_task_prob, 0, 0};

  BoxedRoomSpec optimist = truth;
  for (std::size_t task : {0u, 1u}) {
    const std::size_t answer = task + 2;
    optimist.room_dynamics[task][1] = {RoomOutcome{1, 1, 1, answer, false}};
  }

  BoxedRoomSpec tampered = truth;
  tampered.channel = RewardChannel::hijack;
  tampered.initial_outside = 1;

  BoxedRoomFamily family{spaces, {}, 0, 1};
  family.models.push_back(make_boxed_room_model(truth, spaces, "mu", l0));
  family.models.push_back(
      make_boxed_room_model(hijack, spaces, "hijack", l0 + 1, params.hijack_weight));
  family.models.push_back(make_boxed_room_model(biased, spaces, "biased", params.biased_space));
  family.models.push_back(make_boxed_room_model(truth, spaces, "verbose", l0 + 1));
  family.models.push_back(make_boxed_room_model(optimist, spaces, "optimist", l0));
  family.models.push_back(make_boxed_room_model(tampered, spaces, "tampered", l0 + 2));

  if (auto diff = door_closed_difference(*family.models[family.truth],
                                         *family.models[family.hijack], spaces, 2, 1'000'000))
    throw Error("boxed-room construction self-check failed: " + *diff);
  return family;
}

std::optional<std::string> door_closed_difference(const WorldModel& a, const WorldModel& b,
                                                  const InteractionSpaces& spaces,
                                                  std::size_t episodes, std::uint64_t cap) {
  const std::size_t depth = episodes * spaces.episode_length();
  std::uint64_t visited = 0;
  std::vector<Step> prefix;

  auto visit = [&](auto&& self, const WorldModel::FilterPtr& fa,
                   const WorldModel::FilterPtr& fb) -> std::optional<std::string> {
    if (++visited > cap) throw CapExceeded("door-closed comparison", visited, cap);
    if (prefix.size() == depth) return std::nullopt;
    for (std::size_t act = 0; act < spaces.num_actions(); ++act) {
      const auto action = static_cast<ActionIndex>(act);
      const PerceptDistribution da = fa->predict(action);
      const PerceptDistribution db = fb->predict(action);
      if (da != db)
        return "after [" + render_steps(prefix, spaces) + "] action " + spaces.actions()[act] +
               " predictions differ";
      for (const auto& [percept, prob] : da) {
        if (percept.observation == kEmptyObservation) continue;
        prefix.push_back({action, percept.observation, percept.reward});
        auto result = self(self, fa->observe(action, percept).next, fb->observe(action, percept).next);
        prefix.pop_back();
        if (result) return result;
      }
    }
    return std::nullopt;
  };
  return visit(visit, a.start(), b.start());
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr const char* kFamilyHeader = "bomai-tabular-family v1";

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

std::size_t parse_index(const std::string& s, std::size_t line_no) {
  try {
    std::size_t pos = 0;
    unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ConfigError("line " + std::to_string(line_no) + ": expected an index, got '" + s + "'");
  }
}

}  // namespace

void write_tabular_family(std::ostream& out, const InteractionSpaces& spaces,
                          const std::vector<std::shared_ptr<const TabularModel>>& models) {
  out << kFamilyHeader << '\n';
  out << "actions";
  for (const auto& a : spaces.actions()) out << ' ' << a;
  out << "\nobservations";
  for (std::size_t o = 1; o < spaces.num_observations(); ++o) out << ' ' << spaces.observations()[o];
  out << "\nrewards";
  for (const auto& r : spaces.rewards()) out << ' ' << to_string(r);
  out << "\nm " << spaces.episode_length() << '\n';
  for (const auto& model : models) {
    const auto& info = model->info();
    out << "model " << info.id << " space " << info.space << " benign "
        << (info.benign ? (*info.benign ? "yes" : "no") : "unknown") << " weight "
        << to_string(info.base_weight) << " states " << model->num_states() << " initial "
        << model->initial_state() << '\n';
    for (std::size_t s = 0; s < model->num_states(); ++s)
      out << "state " << s << ' ' << model->state_names()[s] << '\n';
    for (std::size_t s = 0; s < model->num_states(); ++s) {
      for (std::size_t a = 0; a < model->num_actions(); ++a) {
        out << "row " << s << ' ' << a;
        for (const auto& o : model->row(s, static_cast<ActionIndex>(a)))
          out << ' ' << to_string(o.probability) << ':' << o.percept.observation << ':'
              << o.percept.reward << ':' << o.next_state;
        out << '\n';
      }
    }
    out << "end\n";
  }
}

TabularFamilyFile read_tabular_family(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> std::optional<std::vector<std::string>> {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line[0] == '#') continue;
      return split_ws(line);
    }
    return std::nullopt;
  };
  auto fail = [&](const std::string& msg) -> ConfigError {
    return ConfigError("tabular family, line " + std::to_string(line_no) + ": " + msg);
  };

  if (!std::getline(in, line) || line != kFamilyHeader)
    throw ConfigError("tabular family: missing header '" + std::string(kFamilyHeader) + "'");
  ++line_no;

  std::vector<std::string> actions;
  std::vector<std::string> observations;
  std::vector<Rational> rewards;
  std::size_t m = 0;
  for (int k = 0; k < 4; ++k) {
    auto toks = next_line();
    if (!toks || toks->empty()) throw fail("truncated spaces block");
    const std::string key = (*toks)[0];
    std::vector<std::string> rest(toks->begin() + 1, toks->end());
    if (key == "actions") actions = rest;
    else if (key == "observations") observations = rest;
    else if (key == "rewards")
      for (const auto& r : rest) rewards.push_back(parse_rational(r));
    else if (key == "m" && rest.size() == 1) m = parse_index(rest[0], line_no);
    else throw fail("unexpected '" + key + "'");
  }
  TabularFamilyFile file{InteractionSpaces(actions, observations, rewards, m), {}};

  while (auto toks = next_line()) {
    const auto& t = *toks;
    if (t.size() != 12 || t[0] != "model" || t[2] != "space" || t[4] != "benign" ||
        t[6] != "weight" || t[8] != "states" || t[10] != "initial")
      throw fail("expected a model header");
    ModelInfo info;
    info.id = t[1];
    info.space = static_cast<unsigned>(parse_index(t[3], line_no));
    if (t[5] == "yes") info.benign = true;
    else if (t[5] == "no") info.benign = false;
    else if (t[5] != "unknown") throw fail("benign must be yes, no or unknown");
    info.base_weight = parse_rational(t[7]);
    const std::size_t n = parse_index(t[9], line_no);
    const std::size_t initial = parse_index(t[11], line_no);
    const std::size_t na = file.spaces.num_actions();

    std::vector<std::string> names(n);
    for (std::size_t s = 0; s < n; ++s) {
      auto st = next_line();
      if (!st || st->size() != 3 || (*st)[0] != "state" || parse_index((*st)[1], line_no) != s)
        throw fail("expected 'state " + std::to_string(s) + " <name>'");
      names[s] = (*st)[2];
    }
    std::vector<std::vector<std::vector<KernelOutcome>>> kernel(
        n, std::vector<std::vector<KernelOutcome>>(na));
    for (std::size_t r = 0; r < n * na; ++r) {
      auto row = next_line();
      if (!row || row->size() < 3 || (*row)[0] != "row") throw fail("expected a row");
      const std::size_t s = parse_index((*row)[1], line_no);
      const std::size_t a = parse_index((*row)[2], line_no);
      if (s >= n || a >= na) throw fail("row index out of range");
      for (std::size_t k = 3; k < row->size(); ++k) {
        std::vector<std::string> parts;
        std::stringstream ss((*row)[k]);
        for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
        if (parts.size() != 4) throw fail("outcome must be prob:obs:reward:next");
        KernelOutcome out;
        try {
          out.probability = parse_rational(parts[0]);
        } catch (const std::invalid_argument& e) {
          throw fail(e.what());
        }
        out.percept.observation = static_cast<ObservationIndex>(parse_index(parts[1], line_no));
        out.percept.reward = static_cast<RewardIndex>(parse_index(parts[2], line_no));
        out.next_state = parse_index(parts[3], line_no);
        kernel[s][a].push_back(std::move(out));
      }
    }
    auto end = next_line();
    if (!end || end->size() != 1 || (*end)[0] != "end") throw fail("expected 'end'");
    try {
      file.models.push_back(std::make_shared<TabularModel>(std::move(info), file.spaces,
                                                           std::move(names), initial,
                                                           std::move(kernel)));
    } catch (const std::invalid_argument& e) {
      throw fail(e.what());
    }
  }
  return file;
}

}  // namespace bomai
