#include "tubesynth/profile.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "tubesynth/error.hpp"

namespace tubesynth::tubes {

double smoothstep(double s) noexcept {
  s = std::clamp(s, 0.0, 1.0);
  return s * s * (3.0 - 2.0 * s);
}

double smoothstep_slope(double s) noexcept {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return 6.0 * s * (1.0 - s);
}

namespace {

struct Eval {
  double value;
  double slope;
};

Eval evaluate(const ScalarProfile::Segment& seg, double t) {
  return std::visit(
      [t](const auto& s) -> Eval {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, ScalarProfile::Constant>) {
          return {s.value, 0.0};
        } else if constexpr (std::is_same_v<S, ScalarProfile::Ramp>) {
          const double span = s.t1 - s.t0;
          const double u = (t - s.t0) / span;
          return {s.v0 + (s.v1 - s.v0) * smoothstep(u), (s.v1 - s.v0) * smoothstep_slope(u) / span};
        } else if constexpr (std::is_same_v<S, ScalarProfile::Follow>) {
          return {s.base->value(t), s.base->slope(t)};
        } else {
          const double span = s.t1 - s.t0;
          const double u = (t - s.t0) / span;
          double w = smoothstep(u);
          double dw = smoothstep_slope(u) / span;
          if (!s.into_value) {
            w = 1.0 - w;
            dw = -dw;
          }
          const double b = s.base->value(t);
          const double db = s.base->slope(t);
          return {(1.0 - w) * b + w * s.value, (1.0 - w) * db + dw * (s.value - b)};
        }
      },
      seg);
}

}  // namespace

ScalarProfile::ScalarProfile(std::vector<Piece> pieces) : pieces_(std::move(pieces)) {
  if (pieces_.empty() || pieces_.front().start != 0.0)
    fail(ErrorKind::Structural, "profile pieces must start at t = 0");
  for (std::size_t i = 1; i < pieces_.size(); ++i)
    if (!(pieces_[i].start > pieces_[i - 1].start))
      fail(ErrorKind::Structural, "profile pieces must have increasing start times");
  for (const auto& p : pieces_) {
    if (const auto* r = std::get_if<Ramp>(&p.segment); r && !(r->t1 > r->t0))
      fail(ErrorKind::Structural, "ramp segment with empty time span");
    if (const auto* b = std::get_if<Blend>(&p.segment); b && (!(b->t1 > b->t0) || !b->base))
      fail(ErrorKind::Structural, "blend segment with empty time span");
    if (const auto* f = std::get_if<Follow>(&p.segment); f && !f->base)
      fail(ErrorKind::Structural, "follow segment without a base profile");
  }
}

ScalarProfile ScalarProfile::constant(double value) { return ScalarProfile({{0.0, Constant{value}}}); }

ScalarProfile ScalarProfile::through(std::span<const double> times, std::span<const double> values) {
  if (times.size() != values.size() || times.empty())
    fail(ErrorKind::Structural, "profile knots and values differ in length");
  std::vector<Piece> pieces;
  if (times.front() > 0.0) pieces.push_back({0.0, Constant{values.front()}});
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    if (!(times[i + 1] > times[i])) fail(ErrorKind::Parameter, "profile knot times must increase");
    if (values[i] == values[i + 1])
      pieces.push_back({times[i], Constant{values[i]}});
    else
      pieces.push_back({times[i], Ramp{times[i], times[i + 1], values[i], values[i + 1]}});
  }
  pieces.push_back({times.back(), Constant{values.back()}});
  // Fold runs of equal constants so knots mark real formula changes.
  std::vector<Piece> folded;
  for (auto& p : pieces) {
    if (!folded.empty()) {
      const auto* a = std::get_if<Constant>(&folded.back().segment);
      const auto* b = std::get_if<Constant>(&p.segment);
      if (a && b && a->value == b->value) continue;
    }
    folded.push_back(std::move(p));
  }
  return ScalarProfile(std::move(folded));
}

ScalarProfile ScalarProfile::detour(std::shared_ptr<const ScalarProfile> base, double blend_in,
                                    double hold_start, double hold_end, double blend_out_end,
                                    double value) {
  if (!(blend_in >= 0.0 && hold_start > blend_in && hold_end >= hold_start && blend_out_end > hold_end))
    fail(ErrorKind::InfeasiblePadding, "detour window is not ordered");
  std::vector<Piece> pieces;
  if (blend_in > 0.0) pieces.push_back({0.0, Follow{base}});
  pieces.push_back({blend_in, Blend{base, value, blend_in, hold_start, true}});
  if (hold_end > hold_start) pieces.push_back({hold_start, Constant{value}});
  pieces.push_back({hold_end, Blend{base, value, hold_end, blend_out_end, false}});
  pieces.push_back({blend_out_end, Follow{base}});
  return ScalarProfile(std::move(pieces));
}

const ScalarProfile::Piece& ScalarProfile::piece_at(double t, bool left) const {
  auto it = left ? std::lower_bound(pieces_.begin(), pieces_.end(), t,
                                    [](const Piece& p, double x) { return p.start < x; })
                 : std::upper_bound(pieces_.begin(), pieces_.end(), t,
                                    [](double x, const Piece& p) { return x < p.start; });
  if (it == pieces_.begin()) return pieces_.front();
  return *std::prev(it);
}

double ScalarProfile::value(double t) const { return evaluate(piece_at(t, false).segment, t).value; }
double ScalarProfile::slope(double t) const { return evaluate(piece_at(t, false).segment, t).slope; }
double ScalarProfile::value_left(double t) const { return evaluate(piece_at(t, true).segment, t).value; }
double ScalarProfile::slope_left(double t) const { return evaluate(piece_at(t, true).segment, t).slope; }

std::vector<double> ScalarProfile::knots() const {
  std::set<double> out;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const double lo = pieces_[i].start;
    const double hi = i + 1 < pieces_.size() ? pieces_[i + 1].start : INFINITY;
    if (lo > 0.0) out.insert(lo);
    std::visit(
        [&](const auto& s) {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, Ramp>) {
            if (s.t0 > lo && s.t0 < hi) out.insert(s.t0);
            if (s.t1 > lo && s.t1 < hi) out.insert(s.t1);
          } else if constexpr (std::is_same_v<S, Follow> || std::is_same_v<S, Blend>) {
            for (double k : s.base->knots())
              if (k > lo && k < hi) out.insert(k);
          }
        },
        pieces_[i].segment);
  }
  return {out.begin(), out.end()};
}

double ScalarProfile::settle_time() const {
  const auto k = knots();
  return k.empty() ? 0.0 : k.back();
}

bool ScalarProfile::operator==(const ScalarProfile& other) const {
  if (pieces_.size() != other.pieces_.size()) return false;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const auto& a = pieces_[i];
    const auto& b = other.pieces_[i];
    if (a.start != b.start || a.segment.index() != b.segment.index()) return false;
    bool same = std::visit(
        [&](const auto& s) {
          using S = std::decay_t<decltype(s)>;
          const auto& o = std::get<S>(b.segment);
          if constexpr (std::is_same_v<S, Constant>) {
            return s.value == o.value;
          } else if constexpr (std::is_same_v<S, Ramp>) {
            return s.t0 == o.t0 && s.t1 == o.t1 && s.v0 == o.v0 && s.v1 == o.v1;
          } else if constexpr (std::is_same_v<S, Follow>) {
            return s.base == o.base || *s.base == *o.base;
          } else {
            return s.value == o.value && s.t0 == o.t0 && s.t1 == o.t1 && s.into_value == o.into_value &&
                   (s.base == o.base || *s.base == *o.base);
          }
        },
        a.segment);
    if (!same) return false;
  }
  return true;
}

}  // namespace tubesynth::tubes
