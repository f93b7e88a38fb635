#include "bomai/tm.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <stdexcept>

#include "bomai/errors.hpp"

namespace bomai {

namespace {

unsigned bits_for(std::size_t count) {
  unsigned bits = 0;
  while ((std::size_t{1} << bits) < count) ++bits;
  return bits;
}

char move_char(Move m) { return m == Move::left ? 'L' : m == Move::right ? 'R' : 'S'; }

Move parse_move(char c) {
  switch (c) {
    case 'L': return Move::left;
    case 'S': return Move::stay;
    case 'R': return Move::right;
    default: throw std::invalid_argument(std::string("bad move '") + c + "'");
  }
}

void check_record(const TMRecord& r, const TMSpec& tm) {
  if (r.next_state >= tm.num_states) throw std::invalid_argument("next state out of range");
  if (r.bounded_write > 1 || r.unbounded_write > 1)
    throw std::invalid_argument("tape symbols are bits");
  if (r.output_count > 2) throw std::invalid_argument("at most two output bits per step");
  if (r.output_bits >= (1u << r.output_count))
    throw std::invalid_argument("output bits exceed the output count");
}

}  // namespace

void TMSpec::validate() const {
  if (num_states == 0 || num_states > 0xFFFF) throw std::invalid_argument("bad state count");
  if (num_symbols == 0) throw std::invalid_argument("no action symbols");
  if (space == 0) throw std::invalid_argument("space must be at least 1");
  if (transitions.size() != num_keys())
    throw std::invalid_argument("transition table has " + std::to_string(transitions.size()) +
                                " entries, expected " + std::to_string(num_keys()));
  for (const auto& e : transitions) {
    check_record(e.on_zero, *this);
    check_record(e.on_one, *this);
    if (!e.consumes_noise && e.on_one != e.on_zero)
      throw std::invalid_argument("plain entry with two different records");
  }
}

bool never_reads_unbounded(const TMSpec& tm) {
  for (std::size_t s = 0; s < tm.num_states; ++s)
    for (std::size_t a = 0; a < tm.num_symbols; ++a)
      for (unsigned b = 0; b < 2; ++b)
        if (tm.entry(s, a, b, 0) != tm.entry(s, a, b, 1)) return false;
  return true;
}

bool BehaviorLess::operator()(const TMConfiguration& a, const TMConfiguration& b) const {
  auto tie = [](const TMConfiguration& c) {
    return std::tie(c.stalled, c.phase, c.state, c.action_pos, c.bounded_pos, c.bounded,
                    c.unbounded_pos, c.unbounded, c.output, c.steps_used);
  };
  return tie(a) < tie(b);
}

TMConfiguration initial_configuration(const TMSpec& tm) {
  TMConfiguration c;
  c.bounded.assign(tm.space, 0);
  return c;
}

void check_step_invariants(const TMConfiguration& before, const TMConfiguration& after,
                           const TMSpec& tm, std::size_t m) {
  auto fail = [](const std::string& what) { throw InvariantViolation("TM phase rule: " + what); };
  if (after.bounded.size() != tm.space || after.bounded_pos >= tm.space)
    fail("bounded head left the bounded tape");
  if (after.action_pos < before.action_pos || after.action_pos > before.action_pos + 1)
    fail("action head moved left or skipped");
  if (after.noise_pos < before.noise_pos || after.noise_pos > before.noise_pos + 1)
    fail("noise head moved left or skipped");
  if (before.phase == Phase::episode) {
    if (after.unbounded_pos != before.unbounded_pos)
      fail("unbounded head moved during the episode phase");
    if (after.phase == Phase::inter_episode &&
        (before.action_pos % m != 0 || after.action_pos != before.action_pos))
      fail("left the episode phase away from an episode boundary");
  } else {
    if (after.output_pos != before.output_pos || !after.output.empty())
      fail("output written during the inter-episode phase");
    if (after.phase == Phase::episode && after.action_pos != before.action_pos + 1)
      fail("entered the episode phase without advancing");
    if (after.phase == Phase::inter_episode && after.action_pos != before.action_pos)
      fail("action head moved without leaving the inter-episode phase");
  }
}

StepResult step(const TMConfiguration& config, const TMSpec& tm, std::size_t action_symbol,
                std::optional<bool> noise_bit, std::size_t m) {
  if (config.stalled) throw InvariantViolation("stepping a stalled machine");
  if (action_symbol >= tm.num_symbols) throw InvariantViolation("action symbol out of range");
  const unsigned bounded_bit = config.bounded.at(config.bounded_pos);
  auto cell = config.unbounded.find(config.unbounded_pos);
  const unsigned unbounded_bit = cell == config.unbounded.end() ? 0 : cell->second;
  const TMEntry& entry = tm.entry(config.state, action_symbol, bounded_bit, unbounded_bit);

  StepResult result;
  if (entry.consumes_noise && !noise_bit) {
    result.needs_noise = true;
    result.next = config;
    return result;
  }
  const TMRecord& rec = entry.consumes_noise && *noise_bit ? entry.on_one : entry.on_zero;
  TMConfiguration next = config;
  if (entry.consumes_noise) ++next.noise_pos;
  next.state = rec.next_state;

  next.bounded[next.bounded_pos] = rec.bounded_write;
  if (rec.bounded_move == Move::left && next.bounded_pos > 0) --next.bounded_pos;
  if (rec.bounded_move == Move::right && next.bounded_pos + 1 < tm.space) ++next.bounded_pos;

  if (rec.unbounded_write) next.unbounded[next.unbounded_pos] = 1;
  else next.unbounded.erase(next.unbounded_pos);
  if (config.phase == Phase::inter_episode) next.unbounded_pos += static_cast<int>(rec.unbounded_move);

  if (config.phase == Phase::episode) {
    for (int i = rec.output_count - 1; i >= 0; --i)
      next.output.push_back(static_cast<std::uint8_t>((rec.output_bits >> i) & 1));
    next.output_pos += rec.output_count;
  }
  ++next.steps_used;

  if (rec.advance) {
    if (config.phase == Phase::episode) {
      result.emitted = std::move(next.output);
      next.output.clear();
      next.steps_used = 0;
      if (config.action_pos % m == 0) next.phase = Phase::inter_episode;
      else ++next.action_pos;
    } else {
      ++next.action_pos;
      next.phase = Phase::episode;
    }
  }
#ifndef NDEBUG
  check_step_invariants(config, next, tm, m);
#endif
  result.next = std::move(next);
  return result;
}

Percept decode(const std::vector<std::uint8_t>& bits, const InteractionSpaces& spaces) {
  const std::size_t num_obs = spaces.num_real_observations();
  const std::size_t num_rew = spaces.num_rewards();
  const unsigned ob = bits_for(num_obs);
  const unsigned rb = bits_for(num_rew);
  if (bits.size() < ob + rb) return spaces.empty_percept();
  std::size_t o = 0;
  for (unsigned i = 0; i < ob; ++i) o = o * 2 + bits[i];
  std::size_t r = 0;
  for (unsigned i = 0; i < rb; ++i) r = r * 2 + bits[ob + i];
  return {static_cast<ObservationIndex>(1 + o % num_obs), static_cast<RewardIndex>(r % num_rew)};
}

// ---------------------------------------------------------------------------

class TMWorldModel::Frontier final : public WorldModel::Filter {
 public:
  using Configs = std::map<TMConfiguration, Rational, BehaviorLess>;
  using Expansion = std::map<Percept, Configs>;

  Frontier(const TMWorldModel* model, std::uint64_t emitted, ActionIndex last_action,
           Configs configs)
      : model_(model), emitted_(emitted), last_action_(last_action), configs_(std::move(configs)) {}

  PerceptDistribution predict(ActionIndex action) const override {
    PerceptDistribution dist;
    for (const auto& [percept, configs] : expand(action)) {
      Rational total = 0;
      for (const auto& [c, w] : configs) total += w;
      if (total > 0) dist.emplace_back(percept, std::move(total));
    }
    return dist;
  }

  Conditioned observe(ActionIndex action, Percept percept) const override {
    const Expansion& ex = expand(action);
    auto it = ex.find(percept);
    if (it == ex.end()) return {0, nullptr};
    Rational total = 0;
    for (const auto& [c, w] : it->second) total += w;
    if (total == 0) return {0, nullptr};
    Configs next;
    for (const auto& [c, w] : it->second) next.emplace(c, w / total);
    return {total, std::make_shared<Frontier>(model_, emitted_ + 1, action, std::move(next))};
  }

 private:
  const Expansion& expand(ActionIndex action) const {
    auto it = cache_.find(action);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(action, compute(action)).first->second;
  }

  Expansion compute(ActionIndex action) const {
    const TMSpec& tm = model_->spec_;
    const std::size_t m = model_->spaces_.episode_length();
    Expansion out;
    Rational stalled = 0;
    Configs active;
    for (const auto& [c, w] : configs_) {
      if (c.stalled) stalled += w;
      else active.emplace(c, w);
    }
    for (std::uint32_t used = 0; used < model_->budget_ && !active.empty(); ++used) {
      Configs next_active;
      auto place = [&](StepResult&& r, const Rational& w) {
        if (r.emitted) {
          out[decode(*r.emitted, model_->spaces_)][std::move(r.next)] += w;
        } else {
          next_active[std::move(r.next)] += w;
        }
      };
      for (const auto& [c, w] : active) {
        std::size_t symbol;
        if (c.action_pos == emitted_ + 1) symbol = action;
        else if (c.action_pos == emitted_) symbol = last_action_;
        else throw InvariantViolation("action head outside the known action cells");
        StepResult r = step(c, tm, symbol, std::nullopt, m);
        if (r.needs_noise) {
          Rational half = w / 2;
          place(step(c, tm, symbol, false, m), half);
          place(step(c, tm, symbol, true, m), half);
        } else {
          place(std::move(r), w);
        }
      }
      if (next_active.size() > model_->frontier_cap_)
        throw CapExceeded("TM branch frontier", next_active.size(), model_->frontier_cap_);
      active = std::move(next_active);
    }
    for (const auto& [c, w] : active) stalled += w;
    if (stalled > 0) {
      TMConfiguration dead;
      dead.stalled = true;
      out[model_->spaces_.empty_percept()][dead] += stalled;
    }
    return out;
  }

  const TMWorldModel* model_;
  std::uint64_t emitted_;
  ActionIndex last_action_;
  Configs configs_;
  // Replica-confined memo; results never depend on it.
  mutable std::map<ActionIndex, Expansion> cache_;
};

TMWorldModel::TMWorldModel(TMSpec spec, InteractionSpaces spaces, std::uint32_t budget,
                           std::size_t frontier_cap)
    : WorldModel(ModelInfo{"tm" + std::to_string(spec.k), spec.space,
                           never_reads_unbounded(spec), Rational(1)}),
      spec_(std::move(spec)),
      spaces_(std::move(spaces)),
      budget_(budget),
      frontier_cap_(frontier_cap) {
  spec_.validate();
  if (spec_.num_symbols != spaces_.num_actions())
    throw std::invalid_argument("machine reads " + std::to_string(spec_.num_symbols) +
                                " action symbols but there are " +
                                std::to_string(spaces_.num_actions()) + " actions");
  if (budget_ == 0) throw std::invalid_argument("step budget must be at least 1");
}

WorldModel::FilterPtr TMWorldModel::start() const {
  Frontier::Configs configs;
  configs.emplace(initial_configuration(spec_), Rational(1));
  return std::make_shared<Frontier>(this, 0, 0, std::move(configs));
}

PerceptDistribution percept_distribution(const TMSpec& tm, const InteractionSpaces& spaces,
                                         const History& history, ActionIndex next_action,
                                         std::uint32_t budget) {
  TMWorldModel model(tm, spaces, budget);
  return filter_history(model, history.items)->predict(next_action);
}

// ---------------------------------------------------------------------------
// Enumeration

TransitionVocabulary TransitionVocabulary::minimal() {
  TransitionVocabulary v;
  TMRecord wait;
  TMRecord advance;
  advance.advance = true;
  v.templates = {wait, advance};
  return v;
}

TransitionVocabulary TransitionVocabulary::standard(const InteractionSpaces& spaces) {
  const unsigned need = bits_for(spaces.num_real_observations()) + bits_for(spaces.num_rewards());
  std::vector<std::pair<std::uint8_t, std::uint8_t>> outputs = {{0, 0}};
  if (need <= 2)
    for (std::uint8_t bits = 0; bits < (1u << need); ++bits) outputs.emplace_back(need, bits);
  else
    for (std::uint8_t bits = 0; bits < 4; ++bits) outputs.emplace_back(2, bits);
  TransitionVocabulary v;
  v.allow_noise = true;
  for (auto [count, bits] : outputs)
    for (bool adv : {false, true})
      for (std::uint8_t bw : {0, 1})
        for (Move bm : {Move::left, Move::stay, Move::right})
          for (auto [uw, um] : std::vector<std::pair<std::uint8_t, Move>>{
                   {0, Move::stay}, {1, Move::stay}, {0, Move::right}, {1, Move::right}}) {
            TMRecord r;
            r.output_count = count;
            r.output_bits = bits;
            r.advance = adv;
            r.bounded_write = bw;
            r.bounded_move = bm;
            r.unbounded_write = uw;
            r.unbounded_move = um;
            v.templates.push_back(r);
          }
  return v;
}

std::vector<TMEntry> TransitionVocabulary::entries(std::size_t num_states) const {
  std::vector<TMRecord> records;
  for (const auto& t : templates)
    for (std::size_t s = 0; s < num_states; ++s) {
      TMRecord r = t;
      r.next_state = static_cast<std::uint16_t>(s);
      records.push_back(r);
    }
  std::vector<TMEntry> out;
  for (const auto& r : records) out.push_back(TMEntry::plain(r));
  if (allow_noise)
    for (const auto& a : records)
      for (const auto& b : records)
        if (a != b) out.push_back(TMEntry::noisy(a, b));
  return out;
}

bool is_canonical(const TMSpec& tm) {
  std::vector<int> label(tm.num_states, -1);
  std::deque<std::size_t> queue{0};
  label[0] = 0;
  int next = 1;
  while (!queue.empty()) {
    const std::size_t s = queue.front();
    queue.pop_front();
    for (std::size_t a = 0; a < tm.num_symbols; ++a)
      for (unsigned b = 0; b < 2; ++b)
        for (unsigned u = 0; u < 2; ++u) {
          const TMEntry& e = tm.entry(s, a, b, u);
          for (const TMRecord* r : {&e.on_zero, &e.on_one}) {
            if (label[r->next_state] < 0) {
              label[r->next_state] = next++;
              queue.push_back(r->next_state);
            }
          }
        }
  }
  for (std::size_t s = 0; s < tm.num_states; ++s)
    if (label[s] != static_cast<int>(s)) return false;
  return true;
}

std::vector<TMSpec> enumerate_machines(std::size_t max_states, unsigned max_space,
                                       std::size_t cap, const TransitionVocabulary& vocabulary,
                                       std::size_t num_symbols) {
  std::vector<TMSpec> out;
  if (cap == 0 || max_space == 0 || vocabulary.templates.empty()) return out;
  for (std::size_t n = 1; n <= max_states; ++n) {
    const auto choices = vocabulary.entries(n);
    TMSpec tm;
    tm.num_states = n;
    tm.num_symbols = num_symbols;
    std::vector<std::size_t> digits(tm.num_keys(), 0);
    tm.transitions.assign(tm.num_keys(), choices[0]);
    while (true) {
      if (is_canonical(tm)) {
        for (unsigned space = 1; space <= max_space; ++space) {
          TMSpec copy = tm;
          copy.space = space;
          copy.k = out.size();
          out.push_back(std::move(copy));
          if (out.size() == cap) return out;
        }
      }
      std::size_t pos = digits.size();
      while (pos > 0) {
        --pos;
        if (++digits[pos] < choices.size()) {
          tm.transitions[pos] = choices[digits[pos]];
          break;
        }
        digits[pos] = 0;
        tm.transitions[pos] = choices[0];
        if (pos == 0) {
          pos = digits.size() + 1;  // wrapped
          break;
        }
      }
      if (pos == digits.size() + 1 || digits.empty()) break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Text encoding

namespace {

std::string encode_record(const TMRecord& r) {
  std::string s = std::to_string(r.next_state) + ".";
  s += static_cast<char>('0' + r.bounded_write);
  s += move_char(r.bounded_move);
  s += '.';
  s += static_cast<char>('0' + r.unbounded_write);
  s += move_char(r.unbounded_move);
  s += '.';
  if (r.output_count == 0) s += '-';
  for (int i = r.output_count - 1; i >= 0; --i) s += static_cast<char>('0' + ((r.output_bits >> i) & 1));
  s += '.';
  s += r.advance ? 'a' : 'w';
  return s;
}

TMRecord decode_record(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, '.');) parts.push_back(part);
  if (parts.size() != 5 || parts[1].size() != 2 || parts[2].size() != 2 || parts[4].size() != 1)
    throw std::invalid_argument("malformed record '" + text + "'");
  TMRecord r;
  std::size_t used = 0;
  const unsigned long next = std::stoul(parts[0], &used);
  if (used != parts[0].size() || next > 0xFFFF) throw std::invalid_argument("bad next state");
  r.next_state = static_cast<std::uint16_t>(next);
  auto bit = [&](char c) -> std::uint8_t {
    if (c != '0' && c != '1') throw std::invalid_argument("malformed record '" + text + "'");
    return static_cast<std::uint8_t>(c - '0');
  };
  r.bounded_write = bit(parts[1][0]);
  r.bounded_move = parse_move(parts[1][1]);
  r.unbounded_write = bit(parts[2][0]);
  r.unbounded_move = parse_move(parts[2][1]);
  if (parts[3] != "-") {
    if (parts[3].empty() || parts[3].size() > 2)
      throw std::invalid_argument("malformed record '" + text + "'");
    r.output_count = static_cast<std::uint8_t>(parts[3].size());
    for (char c : parts[3]) r.output_bits = static_cast<std::uint8_t>(r.output_bits * 2 + bit(c));
  }
  if (parts[4] == "a") r.advance = true;
  else if (parts[4] != "w") throw std::invalid_argument("malformed record '" + text + "'");
  return r;
}

}  // namespace

std::string encode_machine(const TMSpec& tm) {
  std::string s = "tm1 " + std::to_string(tm.num_states) + " " + std::to_string(tm.num_symbols) +
                  " " + std::to_string(tm.space);
  for (const auto& e : tm.transitions) {
    s += ' ';
    if (e.consumes_noise) s += "?" + encode_record(e.on_zero) + "|" + encode_record(e.on_one);
    else s += encode_record(e.on_zero);
  }
  return s;
}

TMSpec decode_machine(const std::string& text) {
  std::istringstream in(text);
  std::string tag;
  TMSpec tm;
  if (!(in >> tag) || tag != "tm1") throw std::invalid_argument("expected 'tm1' header");
  if (!(in >> tm.num_states >> tm.num_symbols >> tm.space))
    throw std::invalid_argument("expected '<states> <symbols> <space>'");
  for (std::string tok; in >> tok;) {
    if (tok[0] == '?') {
      const auto bar = tok.find('|');
      if (bar == std::string::npos) throw std::invalid_argument("noisy entry without '|'");
      tm.transitions.push_back(
          TMEntry::noisy(decode_record(tok.substr(1, bar - 1)), decode_record(tok.substr(bar + 1))));
    } else {
      tm.transitions.push_back(TMEntry::plain(decode_record(tok)));
    }
  }
  tm.validate();
  return tm;
}

}  // namespace bomai
