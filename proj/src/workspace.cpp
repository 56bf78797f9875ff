#include "tubesynth/workspace.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "json_util.hpp"
#include "tubesynth/error.hpp"

namespace tubesynth::workspace {

Box::Box(std::vector<double> lo, std::vector<double> hi) : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size())
    fail(ErrorKind::Structural, "box bounds have different dimensions");
  for (std::size_t i = 0; i < lower.size(); ++i)
    if (!(lower[i] < upper[i]))
      fail(ErrorKind::Validation, "box is empty in dimension " + std::to_string(i + 1));
}

double Box::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < dimension(); ++i) v *= width(i);
  return v;
}

bool Box::contains(std::span<const double> point) const {
  if (point.size() != dimension()) fail(ErrorKind::Structural, "point dimension mismatch");
  for (std::size_t i = 0; i < dimension(); ++i)
    if (point[i] < lower[i] || point[i] > upper[i]) return false;
  return true;
}

bool Box::contains(const Box& other) const {
  for (std::size_t i = 0; i < dimension(); ++i)
    if (other.lower[i] < lower[i] || other.upper[i] > upper[i]) return false;
  return true;
}

bool Box::overlaps_interior(const Box& other) const {
  for (std::size_t i = 0; i < dimension(); ++i)
    if (other.upper[i] <= lower[i] || other.lower[i] >= upper[i]) return false;
  return true;
}

double Box::separation(const Box& other) const {
  double best = -INFINITY;
  for (std::size_t i = 0; i < dimension(); ++i)
    best = std::max({best, other.lower[i] - upper[i], lower[i] - other.upper[i]});
  return best;
}

Box Box::shrunk(double fraction) const {
  Box out = *this;
  for (std::size_t i = 0; i < dimension(); ++i) {
    double half = 0.5 * width(i) * fraction;
    out.lower[i] = center(i) - half;
    out.upper[i] = center(i) + half;
  }
  return out;
}

double volume(const BoxUnion& boxes) {
  double v = 0.0;
  for (const auto& b : normalize(boxes)) v += b.volume();
  return v;
}

namespace {

/// Greedy merge of face-adjacent boxes that agree in every other dimension.
BoxUnion merge_adjacent(BoxUnion boxes) {
  if (boxes.empty()) return boxes;
  const std::size_t n = boxes.front().dimension();
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t d = 0; d < n; ++d) {
      auto key_less = [d, n](const Box& a, const Box& b) {
        for (std::size_t i = 0; i < n; ++i) {
          if (i == d) continue;
          if (a.lower[i] != b.lower[i]) return a.lower[i] < b.lower[i];
          if (a.upper[i] != b.upper[i]) return a.upper[i] < b.upper[i];
        }
        return a.lower[d] < b.lower[d];
      };
      std::sort(boxes.begin(), boxes.end(), key_less);
      BoxUnion merged;
      for (auto& b : boxes) {
        if (!merged.empty()) {
          Box& last = merged.back();
          bool same_slab = true;
          for (std::size_t i = 0; i < n && same_slab; ++i)
            if (i != d && (last.lower[i] != b.lower[i] || last.upper[i] != b.upper[i]))
              same_slab = false;
          if (same_slab && last.upper[d] == b.lower[d]) {
            last.upper[d] = b.upper[d];
            changed = true;
            continue;
          }
        }
        merged.push_back(b);
      }
      boxes = std::move(merged);
    }
  }
  std::sort(boxes.begin(), boxes.end(), [](const Box& a, const Box& b) {
    return std::tie(a.lower, a.upper) < std::tie(b.lower, b.upper);
  });
  return boxes;
}

bool strictly_inside(const Box& b, const std::vector<double>& p) {
  for (std::size_t i = 0; i < b.dimension(); ++i)
    if (!(p[i] > b.lower[i] && p[i] < b.upper[i])) return false;
  return true;
}

}  // namespace

BoxUnion subtract(const BoxUnion& from, const BoxUnion& remove) {
  if (from.empty()) return {};
  const std::size_t n = from.front().dimension();
  // Every face lies on a grid line, so each cell is entirely in or out of
  // every input box and the cell-centre test is exact.
  std::vector<std::vector<double>> grid(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::set<double> cuts;
    for (const auto* group : {&from, &remove})
      for (const auto& b : *group) {
        if (b.dimension() != n) fail(ErrorKind::Structural, "box dimension mismatch");
        cuts.insert(b.lower[i]);
        cuts.insert(b.upper[i]);
      }
    grid[i].assign(cuts.begin(), cuts.end());
  }
  BoxUnion cells;
  std::vector<std::size_t> index(n, 0);
  std::vector<double> mid(n);
  while (true) {
    bool valid = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (grid[i].size() < 2) valid = false;
      else mid[i] = 0.5 * (grid[i][index[i]] + grid[i][index[i] + 1]);
    }
    if (!valid) return {};
    bool in_from = std::any_of(from.begin(), from.end(), [&](const Box& b) { return strictly_inside(b, mid); });
    bool in_remove = std::any_of(remove.begin(), remove.end(), [&](const Box& b) { return strictly_inside(b, mid); });
    if (in_from && !in_remove) {
      Box cell;
      cell.lower.resize(n);
      cell.upper.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        cell.lower[i] = grid[i][index[i]];
        cell.upper[i] = grid[i][index[i] + 1];
      }
      cells.push_back(std::move(cell));
    }
    std::size_t d = 0;
    while (d < n) {
      if (++index[d] + 1 < grid[d].size()) break;
      index[d] = 0;
      ++d;
    }
    if (d == n) break;
  }
  return merge_adjacent(std::move(cells));
}

BoxUnion normalize(const BoxUnion& boxes) { return subtract(boxes, {}); }

bool covers(const BoxUnion& boxes, const Box& box) {
  return subtract({box}, boxes).empty();
}

bool contains_point(const BoxUnion& boxes, std::span<const double> point) {
  return std::any_of(boxes.begin(), boxes.end(), [&](const Box& b) { return b.contains(point); });
}

LabeledWorkspace::LabeledWorkspace(Box bounds, std::map<Proposition, BoxUnion> regions,
                                   Proposition default_proposition)
    : bounds_(std::move(bounds)), regions_(std::move(regions)), default_(std::move(default_proposition)) {
  if (default_.empty()) fail(ErrorKind::Validation, "default proposition must be named");
  if (regions_.count(default_))
    fail(ErrorKind::Validation, "default proposition '" + default_ + "' must not list regions");
  for (const auto& [p, boxes] : regions_) {
    if (p.empty()) fail(ErrorKind::Validation, "region proposition must be named");
    for (const auto& b : boxes) {
      if (b.dimension() != dimension())
        fail(ErrorKind::Validation, "region of '" + p + "' has the wrong dimension");
      if (!bounds_.contains(b))
        fail(ErrorKind::Validation, "region of '" + p + "' leaves the workspace bounds");
    }
  }
  for (auto a = regions_.begin(); a != regions_.end(); ++a)
    for (auto b = std::next(a); b != regions_.end(); ++b)
      for (const auto& ba : a->second)
        for (const auto& bb : b->second)
          if (ba.overlaps_interior(bb))
            fail(ErrorKind::Validation, "regions of '" + a->first + "' and '" + b->first + "' overlap");
}

std::vector<Proposition> LabeledWorkspace::alphabet() const {
  std::set<Proposition> all{default_};
  for (const auto& [p, boxes] : regions_) all.insert(p);
  return {all.begin(), all.end()};
}

Proposition LabeledWorkspace::label_of(std::span<const double> point) const {
  if (point.size() != dimension()) fail(ErrorKind::Structural, "point dimension mismatch");
  if (!bounds_.contains(point)) fail(ErrorKind::OutOfDomain, "point outside workspace bounds");
  for (const auto& [p, boxes] : regions_)
    if (contains_point(boxes, point)) return p;
  return default_;
}

BoxUnion LabeledWorkspace::preimage(const Proposition& p) const {
  if (p.empty()) return {};
  if (p == default_) {
    BoxUnion listed;
    for (const auto& [q, boxes] : regions_) listed.insert(listed.end(), boxes.begin(), boxes.end());
    return subtract({bounds_}, listed);
  }
  auto it = regions_.find(p);
  if (it == regions_.end()) fail(ErrorKind::Validation, "unknown proposition '" + p + "'");
  return it->second;
}

LabeledWorkspace parse_workspace(std::string_view text) {
  json doc = json_util::parse_document(text, "workspace");
  if (!doc.is_object()) fail(ErrorKind::Parse, "workspace: top level must be an object");
  const json& dim_field = json_util::require(doc, "dimension");
  if (!dim_field.is_number_unsigned() || dim_field.get<std::size_t>() == 0)
    fail(ErrorKind::Parse, "dimension: expected a positive integer");
  const std::size_t n = dim_field.get<std::size_t>();
  const json& b = json_util::require(doc, "bounds");
  auto box_from = [n](const json& obj, const std::string& where) {
    auto lo = json_util::numbers(json_util::require(obj, "lower"), where + ".lower");
    auto hi = json_util::numbers(json_util::require(obj, "upper"), where + ".upper");
    if (lo.size() != n || hi.size() != n)
      fail(ErrorKind::Validation, where + ": expected " + std::to_string(n) + " coordinates");
    return Box(std::move(lo), std::move(hi));
  };
  Box bounds = box_from(b, "bounds");
  std::map<Proposition, BoxUnion> regions;
  if (doc.contains("regions")) {
    const json& arr = doc["regions"];
    if (!arr.is_array()) fail(ErrorKind::Parse, "regions: expected a list");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string where = "regions[" + std::to_string(i) + "]";
      const json& p = json_util::require(arr[i], "proposition");
      if (!p.is_string()) fail(ErrorKind::Parse, where + ".proposition: expected a string");
      regions[p.get<std::string>()].push_back(box_from(arr[i], where));
    }
  }
  const json& def = json_util::require(doc, "default_proposition");
  if (!def.is_string()) fail(ErrorKind::Parse, "default_proposition: expected a string");
  return LabeledWorkspace(std::move(bounds), std::move(regions), def.get<std::string>());
}

RaTask ra_task_of_triplet(const automaton::Triplet& t, const LabeledWorkspace& w) {
  const auto alphabet = w.alphabet();
  auto known = [&](const Proposition& p) {
    if (!std::binary_search(alphabet.begin(), alphabet.end(), p))
      fail(ErrorKind::Validation, "triplet (" + t.key() + ") uses proposition '" + p +
                                      "' unknown to the workspace");
  };
  known(t.label_in);
  known(t.label_out);
  for (const auto& p : t.self_labels) known(p);

  RaTask task;
  task.source = t;
  task.bounds = w.bounds();
  task.initial_set = w.preimage(t.label_in);
  task.target_set = w.preimage(t.label_out);
  if (task.initial_set.empty() || task.target_set.empty())
    fail(ErrorKind::UnrealizableTriplet, "unrealizable triplet (" + t.key() + ")");
  BoxUnion allowed = task.initial_set;
  allowed.insert(allowed.end(), task.target_set.begin(), task.target_set.end());
  for (const auto& p : t.self_labels) {
    auto pre = w.preimage(p);
    allowed.insert(allowed.end(), pre.begin(), pre.end());
  }
  task.unsafe_set = subtract({w.bounds()}, allowed);
  return task;
}

}  // namespace tubesynth::workspace
