#pragma once

// Two-phase space-bounded Turing machines as world-models.
//
// Tapes: a read-only action tape (unidirectional), a noise tape of fair
// coin flips (unidirectional), a bounded work tape of `space` bits, an
// unbounded work tape and a write-only output tape.
//
// The machine starts in the inter-episode phase with the action head on a
// dummy cell at position 0. Cell p >= 1 holds the action of global timestep
// p - 1. An advance in the inter-episode phase moves the action head right,
// enters the episode phase and emits nothing. An advance in the episode
// phase decodes the output written since the previous advance into the
// percept of the current timestep; at a position that is a multiple of m it
// enters the inter-episode phase instead of moving. In the episode phase the
// unbounded head cannot move; in the inter-episode phase output is dropped.
// The bounded head stays in place at the tape edges.
//
// Each timestep may use at most `budget` transitions. A branch that exhausts
// it stalls: it emits (empty observation, reward 0) at this and every later
// timestep.

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bomai/interaction.hpp"
#include "bomai/world_model.hpp"

namespace bomai {

enum class Move : std::int8_t { left = -1, stay = 0, right = 1 };

struct TMRecord {
  std::uint16_t next_state = 0;
  std::uint8_t bounded_write = 0;
  Move bounded_move = Move::stay;
  std::uint8_t unbounded_write = 0;
  Move unbounded_move = Move::stay;
  /// Number of output bits, 0 to 2.
  std::uint8_t output_count = 0;
  /// Output bits, first emitted bit most significant.
  std::uint8_t output_bits = 0;
  bool advance = false;

  auto operator<=>(const TMRecord&) const = default;
};

/// A transition. When `consumes_noise` is set the machine reads one noise
/// bit and applies `on_zero` or `on_one`; otherwise `on_zero` applies and
/// `on_one` equals it.
struct TMEntry {
  bool consumes_noise = false;
  TMRecord on_zero;
  TMRecord on_one;

  static TMEntry plain(const TMRecord& r) { return {false, r, r}; }
  static TMEntry noisy(const TMRecord& zero, const TMRecord& one) { return {true, zero, one}; }
  auto operator<=>(const TMEntry&) const = default;
};

struct TMSpec {
  /// Enumeration index.
  std::uint64_t k = 0;
  std::size_t num_states = 1;
  /// Size of the action alphabet read from the action tape.
  std::size_t num_symbols = 1;
  /// Bounded work tape length.
  unsigned space = 1;
  /// Indexed by key(state, symbol, bounded bit, unbounded bit). State 0 is
  /// initial; no state halts.
  std::vector<TMEntry> transitions;

  std::size_t num_keys() const { return num_states * num_symbols * 4; }
  std::size_t key(std::size_t state, std::size_t symbol, unsigned bounded_bit,
                  unsigned unbounded_bit) const {
    return ((state * num_symbols + symbol) * 2 + bounded_bit) * 2 + unbounded_bit;
  }
  const TMEntry& entry(std::size_t state, std::size_t symbol, unsigned bounded_bit,
                       unsigned unbounded_bit) const {
    return transitions.at(key(state, symbol, bounded_bit, unbounded_bit));
  }

  /// Throws std::invalid_argument unless the table is total and well formed.
  void validate() const;

  bool operator==(const TMSpec&) const = default;
};

inline unsigned space_of(const TMSpec& tm) { return tm.space; }

/// Benign label of a machine: no transition depends on the unbounded-tape
/// bit, so in-episode percepts cannot depend on anything stored outside the
/// bounded tape.
bool never_reads_unbounded(const TMSpec& tm);

enum class Phase : std::uint8_t { episode, inter_episode };

struct TMConfiguration {
  Phase phase = Phase::inter_episode;
  std::uint16_t state = 0;
  std::uint64_t action_pos = 0;
  std::uint64_t noise_pos = 0;
  std::uint32_t bounded_pos = 0;
  std::vector<std::uint8_t> bounded;
  std::int64_t unbounded_pos = 0;
  /// Cells holding 1; every other cell holds 0.
  std::map<std::int64_t, std::uint8_t> unbounded;
  std::uint64_t output_pos = 0;
  /// Bits written since the last action-head advance.
  std::vector<std::uint8_t> output;
  std::uint32_t steps_used = 0;
  bool stalled = false;

  bool operator==(const TMConfiguration&) const = default;
};

/// Order on configurations that ignores the noise and output head
/// positions, which do not influence future behavior.
struct BehaviorLess {
  bool operator()(const TMConfiguration& a, const TMConfiguration& b) const;
};

TMConfiguration initial_configuration(const TMSpec& tm);

struct StepResult {
  bool needs_noise = false;
  TMConfiguration next;
  /// Set when the step advanced the action head in the episode phase; holds
  /// the bits to decode.
  std::optional<std::vector<std::uint8_t>> emitted;
};

/// Applies one transition. `action_symbol` is the symbol under the action
/// head. Returns needs_noise when the transition reads noise and `noise_bit`
/// is absent. Throws InvariantViolation if a phase rule is broken.
StepResult step(const TMConfiguration& config, const TMSpec& tm, std::size_t action_symbol,
                std::optional<bool> noise_bit, std::size_t m);

/// Checks the phase invariants between two consecutive configurations.
/// Throws InvariantViolation.
void check_step_invariants(const TMConfiguration& before, const TMConfiguration& after,
                           const TMSpec& tm, std::size_t m);

/// First ceil(log2 |O - {empty}|) bits, most significant first, select a
/// real observation modulo their count; the next ceil(log2 |R|) bits select
/// a reward modulo |R|. Too few bits give (empty, 0).
Percept decode(const std::vector<std::uint8_t>& bits, const InteractionSpaces& spaces);

inline constexpr std::uint32_t kDefaultStepBudget = 256;

class TMWorldModel final : public WorldModel {
 public:
  /// Throws std::invalid_argument when the machine's symbol count differs
  /// from |A| or the budget is zero.
  TMWorldModel(TMSpec spec, InteractionSpaces spaces, std::uint32_t budget = kDefaultStepBudget,
               std::size_t frontier_cap = 1 << 16);

  FilterPtr start() const override;

  const TMSpec& spec() const { return spec_; }
  const InteractionSpaces& spaces() const { return spaces_; }
  std::uint32_t budget() const { return budget_; }

 private:
  class Frontier;

  TMSpec spec_;
  InteractionSpaces spaces_;
  std::uint32_t budget_;
  std::size_t frontier_cap_;
};

/// nu(. | history, next_action) for one machine. Throws InconsistentHistory
/// when every branch contradicts the history.
PerceptDistribution percept_distribution(const TMSpec& tm, const InteractionSpaces& spaces,
                                         const History& history, ActionIndex next_action,
                                         std::uint32_t budget);

/// Building blocks of enumerated transition tables.
struct TransitionVocabulary {
  /// Records with next_state ignored; every next state is combined with each.
  std::vector<TMRecord> templates;
  /// Also offer noisy entries over every ordered pair of distinct records.
  bool allow_noise = false;

  /// Two templates (wait, advance without output) and no noise.
  static TransitionVocabulary minimal();
  /// Output of a full percept or nothing, bounded-tape writes and moves,
  /// advance or wait, plus noisy entries.
  static TransitionVocabulary standard(const InteractionSpaces& spaces);

  /// Entry choices for machines with `num_states` states, in enumeration order.
  std::vector<TMEntry> entries(std::size_t num_states) const;
};

/// Machines with 1..max_states states and space 1..max_space, in canonical
/// form (states numbered in breadth-first order of first reference from
/// state 0, every state reachable), with k assigned in order and the list
/// truncated to `cap`. Tables are enumerated in odometer order with the last
/// key varying fastest; each table is listed once per space.
std::vector<TMSpec> enumerate_machines(std::size_t max_states, unsigned max_space,
                                       std::size_t cap, const TransitionVocabulary& vocabulary,
                                       std::size_t num_symbols);

/// True when the table is in canonical form.
bool is_canonical(const TMSpec& tm);

/// Versioned text encoding, one line:
///   tm1 <states> <symbols> <space> <entry>...
/// Entries follow key order. A plain entry is a record, a noisy entry is
/// "?<record>|<record>". A record is
///   <next>.<bounded write><L|S|R>.<unbounded write><L|S|R>.<bits or ->.<a|w>
/// where a advances the action head and w waits.
std::string encode_machine(const TMSpec& tm);

/// Inverse of encode_machine; k is set to 0. Throws std::invalid_argument.
TMSpec decode_machine(const std::string& text);

}  // namespace bomai
