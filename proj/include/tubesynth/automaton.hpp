#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace tubesynth::automaton {

using StateId = std::string;
using Proposition = std::string;

struct Transition {
  StateId from;
  Proposition label;
  StateId to;

  auto operator<=>(const Transition&) const = default;
};

/// Nondeterministic Buchi automaton whose edges carry a single atomic
/// proposition.  Instances are validated on construction and immutable.
class Nba {
 public:
  Nba(std::set<StateId> states, std::set<StateId> initial,
      std::set<StateId> accepting, std::set<Proposition> alphabet,
      std::set<Transition> transitions);

  const std::set<StateId>& states() const noexcept { return states_; }
  const std::set<StateId>& initial() const noexcept { return initial_; }
  const std::set<StateId>& accepting() const noexcept { return accepting_; }
  const std::set<Proposition>& alphabet() const noexcept { return alphabet_; }
  const std::set<Transition>& transitions() const noexcept { return transitions_; }

  bool is_accepting(const StateId& q) const { return accepting_.count(q) != 0; }

  /// Labels of all parallel edges from -> to, sorted.
  std::vector<Proposition> labels(const StateId& from, const StateId& to) const;
  bool has_edge(const StateId& from, const StateId& to) const;
  bool has_edge(const StateId& from, const Proposition& label, const StateId& to) const;

  /// Distinct successors other than `q` itself, sorted.
  std::vector<StateId> successors(const StateId& q) const;

  bool operator==(const Nba&) const = default;

 private:
  std::set<StateId> states_;
  std::set<StateId> initial_;
  std::set<StateId> accepting_;
  std::set<Proposition> alphabet_;
  std::set<Transition> transitions_;
};

/// Reads the JSON automaton document (keys states, initial, accepting,
/// propositions, transitions).
Nba parse_nba(std::string_view text);
std::string serialize_nba(const Nba& nba);

/// One unrolling of an accepting lasso: prefix ++ cycle ++ (cycle[0], cycle[1]).
struct RunFragment {
  std::vector<StateId> prefix;
  std::vector<StateId> cycle;
  /// Label chosen for the first edge of the flattened run.
  Proposition initial_proposition;

  std::vector<StateId> flattened() const;
  /// One label per consecutive pair of flattened(): the first edge carries
  /// initial_proposition, every other edge its smallest parallel label.
  std::vector<Proposition> edge_labels(const Nba& nba) const;

  auto operator<=>(const RunFragment&) const = default;
};

/// Checks the fragment invariants against `nba`; throws Structural on failure.
void validate_fragment(const Nba& nba, const RunFragment& fragment);

/// Shortest prefix, then shortest cycle, then lexicographically smallest
/// flattened run among fragments whose first edge is labelled `p`.
RunFragment find_accepting_fragment(const Nba& nba, const Proposition& p);

/// Exhaustive enumeration of fragments with |prefix| <= max_prefix and
/// |cycle| <= max_cycle (counted in states).  Exponential; meant as an oracle.
std::vector<RunFragment> enumerate_fragments(const Nba& nba, std::size_t max_prefix,
                                             std::size_t max_cycle);

struct Triplet {
  StateId q;
  StateId q_prime;
  StateId q_double_prime;
  Proposition label_in;
  Proposition label_out;
  /// Every self-loop label at q_prime, sorted; empty when there is no self-loop.
  std::vector<Proposition> self_labels;

  /// "q,q',q''" -- used to key per-triplet configuration.
  std::string key() const;
  /// label_in, label_out and self_labels, sorted without duplicates.
  std::vector<Proposition> allowed_labels() const;

  auto operator<=>(const Triplet&) const = default;
};

struct TripletDecomposition {
  std::vector<Triplet> triplets;
  /// Index of the first triplet of the periodic part; execution wraps from
  /// the last triplet back to this one.
  std::size_t cycle_start = 0;

  std::size_t next(std::size_t index) const {
    return index + 1 < triplets.size() ? index + 1 : cycle_start;
  }
};

TripletDecomposition triplets(const Nba& nba, const RunFragment& fragment);

/// Finite transition system that sequences the reach-avoid controllers.
/// State indices: [0, initial_states.size()) are automaton initial states,
/// the rest index into triplet_states with an offset of initial_states.size().
struct Switcher {
  struct Edge {
    std::size_t from;
    Proposition label;
    std::size_t to;
    auto operator<=>(const Edge&) const = default;
  };

  std::vector<StateId> initial_states;
  std::vector<Triplet> triplet_states;
  std::vector<Edge> edges;
  /// Positions into triplet_states, in execution order of the periodic part.
  std::vector<std::size_t> cyclic_order;

  std::size_t size() const { return initial_states.size() + triplet_states.size(); }
  std::size_t triplet_node(std::size_t triplet_state) const {
    return initial_states.size() + triplet_state;
  }
  std::vector<Edge> outgoing(std::size_t node) const;
};

Switcher build_switcher(const Nba& nba, const RunFragment& fragment);

/// Stable text listing used by the decompose command.
std::string describe(const Nba& nba, const RunFragment& fragment,
                     const TripletDecomposition& decomposition, const Switcher& switcher);

}  // namespace tubesynth::automaton
