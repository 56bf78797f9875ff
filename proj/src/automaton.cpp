#include "tubesynth/automaton.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <sstream>

#include "json_util.hpp"
#include "tubesynth/error.hpp"

namespace tubesynth::automaton {

Nba::Nba(std::set<StateId> states, std::set<StateId> initial, std::set<StateId> accepting,
         std::set<Proposition> alphabet, std::set<Transition> transitions)
    : states_(std::move(states)),
      initial_(std::move(initial)),
      accepting_(std::move(accepting)),
      alphabet_(std::move(alphabet)),
      transitions_(std::move(transitions)) {
  auto require_state = [&](const StateId& q, const std::string& where) {
    if (!states_.count(q)) fail(ErrorKind::Validation, where + ": undeclared state '" + q + "'");
  };
  if (initial_.empty()) fail(ErrorKind::Validation, "initial: set of initial states is empty");
  for (const auto& q : initial_) require_state(q, "initial");
  for (const auto& q : accepting_) require_state(q, "accepting");
  for (const auto& t : transitions_) {
    require_state(t.from, "transition " + t.from + " -" + t.label + "-> " + t.to);
    require_state(t.to, "transition " + t.from + " -" + t.label + "-> " + t.to);
    if (!alphabet_.count(t.label))
      fail(ErrorKind::Validation, "transition " + t.from + " -" + t.label + "-> " + t.to +
                                      ": unlisted proposition '" + t.label + "'");
  }
}

std::vector<Proposition> Nba::labels(const StateId& from, const StateId& to) const {
  std::vector<Proposition> out;
  auto it = transitions_.lower_bound(Transition{from, "", ""});
  for (; it != transitions_.end() && it->from == from; ++it)
    if (it->to == to) out.push_back(it->label);
  return out;  // std::set order keeps labels sorted
}

bool Nba::has_edge(const StateId& from, const StateId& to) const {
  return !labels(from, to).empty();
}

bool Nba::has_edge(const StateId& from, const Proposition& label, const StateId& to) const {
  return transitions_.count(Transition{from, label, to}) != 0;
}

std::vector<StateId> Nba::successors(const StateId& q) const {
  std::set<StateId> out;
  auto it = transitions_.lower_bound(Transition{q, "", ""});
  for (; it != transitions_.end() && it->from == q; ++it)
    if (it->to != q) out.insert(it->to);
  return {out.begin(), out.end()};
}

namespace {

std::set<std::string> string_set(const json& doc, const char* key) {
  const json& arr = json_util::require(doc, key);
  if (!arr.is_array()) fail(ErrorKind::Parse, std::string(key) + ": expected a list");
  std::set<std::string> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_string())
      fail(ErrorKind::Parse, std::string(key) + "[" + std::to_string(i) + "]: expected a string");
    out.insert(arr[i].get<std::string>());
  }
  return out;
}

}  // namespace

Nba parse_nba(std::string_view text) {
  json doc = json_util::parse_document(text, "automaton");
  if (!doc.is_object()) fail(ErrorKind::Parse, "automaton: top level must be an object");
  auto states = string_set(doc, "states");
  auto initial = string_set(doc, "initial");
  auto accepting = string_set(doc, "accepting");
  auto props = string_set(doc, "propositions");
  const json& arr = json_util::require(doc, "transitions");
  if (!arr.is_array()) fail(ErrorKind::Parse, "transitions: expected a list");
  std::set<Transition> transitions;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = "transitions[" + std::to_string(i) + "]";
    const json& t = arr[i];
    if (!t.is_object()) fail(ErrorKind::Parse, where + ": expected an object");
    auto field = [&](const char* key) {
      if (!t.contains(key) || !t[key].is_string())
        fail(ErrorKind::Parse, where + "." + key + ": expected a string");
      return t[key].get<std::string>();
    };
    transitions.insert(Transition{field("from"), field("label"), field("to")});
  }
  return Nba(std::move(states), std::move(initial), std::move(accepting), std::move(props),
             std::move(transitions));
}

std::string serialize_nba(const Nba& nba) {
  json doc;
  doc["states"] = nba.states();
  doc["initial"] = nba.initial();
  doc["accepting"] = nba.accepting();
  doc["propositions"] = nba.alphabet();
  doc["transitions"] = json::array();
  for (const auto& t : nba.transitions())
    doc["transitions"].push_back({{"from", t.from}, {"label", t.label}, {"to", t.to}});
  return doc.dump(2);
}

std::vector<StateId> RunFragment::flattened() const {
  std::vector<StateId> out = prefix;
  out.insert(out.end(), cycle.begin(), cycle.end());
  if (cycle.size() >= 2) {
    out.push_back(cycle[0]);
    out.push_back(cycle[1]);
  }
  return out;
}

std::vector<Proposition> RunFragment::edge_labels(const Nba& nba) const {
  const auto flat = flattened();
  std::vector<Proposition> out;
  for (std::size_t i = 0; i + 1 < flat.size(); ++i) {
    if (i == 0) {
      out.push_back(initial_proposition);
      continue;
    }
    auto labels = nba.labels(flat[i], flat[i + 1]);
    if (labels.empty())
      fail(ErrorKind::Structural, "fragment edge " + flat[i] + " -> " + flat[i + 1] +
                                      " has no transition");
    out.push_back(labels.front());
  }
  return out;
}

void validate_fragment(const Nba& nba, const RunFragment& fragment) {
  if (fragment.prefix.empty()) fail(ErrorKind::Structural, "fragment prefix is empty");
  if (fragment.cycle.size() < 2)
    fail(ErrorKind::Structural, "fragment cycle needs at least two distinct states");
  if (!nba.initial().count(fragment.prefix.front()))
    fail(ErrorKind::Structural, "fragment starts in non-initial state " + fragment.prefix.front());
  if (!nba.is_accepting(fragment.cycle.front()))
    fail(ErrorKind::Structural, "fragment cycle starts in non-accepting state " +
                                    fragment.cycle.front());
  const auto flat = fragment.flattened();
  for (std::size_t i = 0; i + 1 < flat.size(); ++i) {
    if (flat[i] == flat[i + 1])
      fail(ErrorKind::Structural, "fragment repeats state " + flat[i] + " consecutively");
    if (!nba.has_edge(flat[i], flat[i + 1]))
      fail(ErrorKind::Structural, "fragment edge " + flat[i] + " -> " + flat[i + 1] +
                                      " has no transition");
  }
  if (!nba.has_edge(flat[0], fragment.initial_proposition, flat[1]))
    fail(ErrorKind::Structural, "first fragment edge is not labelled " +
                                    fragment.initial_proposition);
}

namespace {

constexpr std::size_t kUnreachable = static_cast<std::size_t>(-1);

/// distance[a][b]: fewest edges of the self-loop-free graph from a to b.
std::map<StateId, std::map<StateId, std::size_t>> all_pairs_distance(const Nba& nba) {
  std::map<StateId, std::map<StateId, std::size_t>> dist;
  for (const auto& src : nba.states()) {
    auto& row = dist[src];
    for (const auto& q : nba.states()) row[q] = kUnreachable;
    row[src] = 0;
    std::deque<StateId> frontier{src};
    while (!frontier.empty()) {
      StateId q = frontier.front();
      frontier.pop_front();
      for (const auto& next : nba.successors(q)) {
        if (row[next] == kUnreachable) {
          row[next] = row[q] + 1;
          frontier.push_back(next);
        }
      }
    }
  }
  return dist;
}

}  // namespace

RunFragment find_accepting_fragment(const Nba& nba, const Proposition& p) {
  if (!nba.alphabet().count(p))
    fail(ErrorKind::Validation, "proposition '" + p + "' is not in the automaton alphabet");
  const auto dist = all_pairs_distance(nba);

  // Shortest cycle (in states) through each accepting state.
  std::map<StateId, std::size_t> cycle_len;
  for (const auto& f : nba.accepting()) {
    std::size_t best = kUnreachable;
    for (const auto& next : nba.successors(f)) {
      std::size_t back = dist.at(next).at(f);
      if (back != kUnreachable) best = std::min(best, back + 1);
    }
    if (best != kUnreachable) cycle_len[f] = best;
  }

  // Prefix length in states = edges from prefix[0] to cycle[0].
  std::size_t best_prefix = kUnreachable;
  std::size_t best_cycle = kUnreachable;
  for (const auto& q0 : nba.initial()) {
    for (const auto& t : nba.transitions()) {
      if (t.from != q0 || t.label != p || t.to == q0) continue;
      for (const auto& [f, clen] : cycle_len) {
        std::size_t d = dist.at(t.to).at(f);
        if (d == kUnreachable) continue;
        std::size_t plen = d + 1;
        if (plen < best_prefix || (plen == best_prefix && clen < best_cycle)) {
          best_prefix = plen;
          best_cycle = clen;
        }
      }
    }
  }
  if (best_prefix == kUnreachable)
    fail(ErrorKind::NoFragment, "no fragment for proposition '" + p + "'");

  std::set<StateId> targets;  // cycle starts achieving the optimum
  for (const auto& [f, clen] : cycle_len) {
    if (clen != best_cycle) continue;
    for (const auto& q0 : nba.initial())
      for (const auto& t : nba.transitions())
        if (t.from == q0 && t.label == p && t.to != q0 && dist.at(t.to).at(f) + 1 == best_prefix)
          targets.insert(f);
  }
  // Exactly `remaining` edges left to some target.
  auto feasible = [&](const StateId& q, std::size_t remaining) {
    for (const auto& f : targets)
      if (dist.at(q).at(f) == remaining) return true;
    return false;
  };

  // Greedy lexicographic construction; every optimal run is a shortest path
  // so exact-distance feasibility is sufficient.
  RunFragment fragment;
  fragment.initial_proposition = p;
  std::optional<std::pair<StateId, StateId>> first_edge;
  for (const auto& q0 : nba.initial()) {
    // transitions() is ordered by (from, label, to): targets come out sorted.
    for (const auto& t : nba.transitions()) {
      if (t.from == q0 && t.label == p && t.to != q0 && feasible(t.to, best_prefix - 1)) {
        first_edge = {q0, t.to};
        break;
      }
    }
    if (first_edge) break;
  }
  fragment.prefix.push_back(first_edge->first);
  StateId current = first_edge->second;
  for (std::size_t remaining = best_prefix - 1; remaining > 0; --remaining) {
    fragment.prefix.push_back(current);
    for (const auto& next : nba.successors(current)) {
      if (feasible(next, remaining - 1)) {
        current = next;
        break;
      }
    }
  }
  const StateId anchor = current;
  fragment.cycle.push_back(anchor);
  current = anchor;
  for (std::size_t remaining = best_cycle - 1; remaining > 0; --remaining) {
    for (const auto& next : nba.successors(current)) {
      if (next != anchor && dist.at(next).at(anchor) == remaining) {
        current = next;
        break;
      }
    }
    fragment.cycle.push_back(current);
  }
  validate_fragment(nba, fragment);
  return fragment;
}

std::vector<RunFragment> enumerate_fragments(const Nba& nba, std::size_t max_prefix,
                                             std::size_t max_cycle) {
  std::set<RunFragment> found;
  std::vector<StateId> prefix;

  // All cycles from `anchor` of at most max_cycle states, consecutive states distinct.
  auto cycles_from = [&](const StateId& anchor) {
    std::vector<std::vector<StateId>> out;
    std::vector<StateId> walk{anchor};
    std::function<void()> extend = [&]() {
      const StateId& last = walk.back();
      if (walk.size() >= 2 && nba.has_edge(last, anchor) && last != anchor) out.push_back(walk);
      if (walk.size() == max_cycle) return;
      for (const auto& next : nba.successors(last)) {
        walk.push_back(next);
        extend();
        walk.pop_back();
      }
    };
    extend();
    return out;
  };

  std::map<StateId, std::vector<std::vector<StateId>>> cycle_cache;
  for (const auto& f : nba.accepting()) cycle_cache[f] = cycles_from(f);

  std::function<void()> grow = [&]() {
    const StateId& last = prefix.back();
    for (const auto& f : nba.successors(last)) {
      if (!nba.is_accepting(f)) continue;
      for (const auto& cycle : cycle_cache[f]) {
        RunFragment candidate{prefix, cycle, ""};
        const auto flat = candidate.flattened();
        for (const auto& label : nba.labels(flat[0], flat[1])) {
          candidate.initial_proposition = label;
          found.insert(candidate);
        }
      }
    }
    if (prefix.size() == max_prefix) return;
    for (const auto& next : nba.successors(last)) {
      prefix.push_back(next);
      grow();
      prefix.pop_back();
    }
  };
  if (max_prefix >= 1 && max_cycle >= 2) {
    for (const auto& q0 : nba.initial()) {
      prefix = {q0};
      grow();
    }
  }
  return {found.begin(), found.end()};
}

std::string Triplet::key() const { return q + "," + q_prime + "," + q_double_prime; }

std::vector<Proposition> Triplet::allowed_labels() const {
  std::set<Proposition> all(self_labels.begin(), self_labels.end());
  all.insert(label_in);
  all.insert(label_out);
  return {all.begin(), all.end()};
}

TripletDecomposition triplets(const Nba& nba, const RunFragment& fragment) {
  const auto flat = fragment.flattened();
  if (flat.size() < 3) fail(ErrorKind::Structural, "fragment shorter than three states");
  const auto labels = fragment.edge_labels(nba);
  TripletDecomposition out;
  for (std::size_t i = 0; i + 2 < flat.size(); ++i) {
    Triplet t{flat[i], flat[i + 1], flat[i + 2], labels[i], labels[i + 1], {}};
    t.self_labels = nba.labels(flat[i + 1], flat[i + 1]);
    out.triplets.push_back(std::move(t));
  }
  // Periodic part starts at the first cycle state; a bare run without a
  // cycle component (length-3 input) just repeats its only triplet.
  out.cycle_start = fragment.cycle.size() >= 2 ? std::min(fragment.prefix.size(), out.triplets.size() - 1) : 0;
  return out;
}

std::vector<Switcher::Edge> Switcher::outgoing(std::size_t node) const {
  std::vector<Edge> out;
  for (const auto& e : edges)
    if (e.from == node) out.push_back(e);
  return out;
}

Switcher build_switcher(const Nba& nba, const RunFragment& fragment) {
  validate_fragment(nba, fragment);
  const auto decomposition = triplets(nba, fragment);
  Switcher s;
  s.initial_states.assign(nba.initial().begin(), nba.initial().end());

  std::vector<std::size_t> position_to_state;
  for (const auto& t : decomposition.triplets) {
    auto it = std::find(s.triplet_states.begin(), s.triplet_states.end(), t);
    if (it == s.triplet_states.end()) {
      position_to_state.push_back(s.triplet_states.size());
      s.triplet_states.push_back(t);
    } else {
      position_to_state.push_back(static_cast<std::size_t>(it - s.triplet_states.begin()));
    }
  }

  std::set<Switcher::Edge> edges;
  for (std::size_t i = 0; i < s.initial_states.size(); ++i)
    for (std::size_t k = 0; k < s.triplet_states.size(); ++k) {
      const auto& t = s.triplet_states[k];
      if (t.q == s.initial_states[i] && decomposition.triplets.front() == t)
        edges.insert({i, t.label_in, s.triplet_node(k)});
    }
  const auto& list = decomposition.triplets;
  for (std::size_t i = 0; i < list.size(); ++i) {
    std::size_t j = decomposition.next(i);
    edges.insert({s.triplet_node(position_to_state[i]), list[i].label_out,
                  s.triplet_node(position_to_state[j])});
  }
  s.edges.assign(edges.begin(), edges.end());
  for (std::size_t i = decomposition.cycle_start; i < list.size(); ++i)
    s.cyclic_order.push_back(position_to_state[i]);
  return s;
}

std::string describe(const Nba& nba, const RunFragment& fragment,
                     const TripletDecomposition& decomposition, const Switcher& switcher) {
  (void)nba;
  std::ostringstream out;
  auto join = [](const std::vector<StateId>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
    return s;
  };
  out << "initial_proposition: " << fragment.initial_proposition << "\n";
  out << "prefix: (" << join(fragment.prefix) << ")\n";
  out << "cycle: (" << join(fragment.cycle) << ")\n";
  out << "fragment: (" << join(fragment.flattened()) << ")\n";
  out << "triplets: " << decomposition.triplets.size() << "\n";
  for (std::size_t i = 0; i < decomposition.triplets.size(); ++i) {
    const auto& t = decomposition.triplets[i];
    out << "  [" << i << "] (" << t.key() << ") in=" << t.label_in << " out=" << t.label_out
        << " self={" << join(t.self_labels) << "}"
        << (i == decomposition.cycle_start ? " <cycle start>" : "") << "\n";
  }
  out << "switcher: " << switcher.initial_states.size() << " initial, "
      << switcher.triplet_states.size() << " distinct triplets, " << switcher.edges.size()
      << " edges\n";
  out << "cyclic_order:";
  for (auto k : switcher.cyclic_order) out << " (" << switcher.triplet_states[k].key() << ")";
  out << "\n";
  return out.str();
}

}  // namespace tubesynth::automaton
