#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tubesynth/automaton.hpp"

namespace tubesynth::workspace {

using automaton::Proposition;
using Point = std::vector<double>;

/// Closed axis-aligned box.
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  Box() = default;
  Box(std::vector<double> lo, std::vector<double> hi);

  std::size_t dimension() const noexcept { return lower.size(); }
  double width(std::size_t i) const { return upper[i] - lower[i]; }
  double center(std::size_t i) const { return 0.5 * (upper[i] + lower[i]); }
  double volume() const;

  bool contains(std::span<const double> point) const;
  bool contains(const Box& other) const;
  /// Positive-volume overlap.
  bool overlaps_interior(const Box& other) const;
  /// Largest per-dimension separation; negative means the projections overlap
  /// in every dimension by at least that much.
  double separation(const Box& other) const;
  /// Scales the box about its centre.
  Box shrunk(double fraction) const;

  bool operator==(const Box&) const = default;
};

using BoxUnion = std::vector<Box>;

double volume(const BoxUnion& boxes);
/// Exact `from \ remove`, as interior-disjoint boxes (closures kept).
BoxUnion subtract(const BoxUnion& from, const BoxUnion& remove);
/// Interior-disjoint decomposition of the union of `boxes`.
BoxUnion normalize(const BoxUnion& boxes);
/// True when `box` is covered by the union up to measure zero.
bool covers(const BoxUnion& boxes, const Box& box);
bool contains_point(const BoxUnion& boxes, std::span<const double> point);

/// Output space with proposition regions; L(y) selects the region holding y.
class LabeledWorkspace {
 public:
  LabeledWorkspace(Box bounds, std::map<Proposition, BoxUnion> regions,
                   Proposition default_proposition);

  std::size_t dimension() const noexcept { return bounds_.dimension(); }
  const Box& bounds() const noexcept { return bounds_; }
  const std::map<Proposition, BoxUnion>& regions() const noexcept { return regions_; }
  const Proposition& default_proposition() const noexcept { return default_; }
  /// Listed propositions plus the default one.
  std::vector<Proposition> alphabet() const;

  Proposition label_of(std::span<const double> point) const;
  /// L^{-1}(p); the empty label maps to the empty set.
  BoxUnion preimage(const Proposition& p) const;

  bool operator==(const LabeledWorkspace&) const = default;

 private:
  Box bounds_;
  std::map<Proposition, BoxUnion> regions_;
  Proposition default_;
};

LabeledWorkspace parse_workspace(std::string_view text);

struct RaTask {
  BoxUnion initial_set;
  BoxUnion target_set;
  BoxUnion unsafe_set;
  Box bounds;
  automaton::Triplet source;
};

RaTask ra_task_of_triplet(const automaton::Triplet& t, const LabeledWorkspace& w);

}  // namespace tubesynth::workspace
