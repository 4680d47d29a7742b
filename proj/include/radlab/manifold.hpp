#pragma once

#include "radlab/cocycle.hpp"
#include "radlab/systems.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace radlab {

/// Piece of a local unstable curve, stored as an ordered polyline together
/// with the exact seed data that generated it: node(t) = f^generation of
/// (seed_center + t seed_dir), t in [-seed_half_length, +seed_half_length].
/// Nodes are refined so consecutive images stay within max node spacing.
template <typename Scalar>
struct UnstableSegment {
  std::vector<TorusPoint<Scalar>> polyline;
  TorusPoint<Scalar> base{};  // seed-time anchor: preimage of polyline.front()
  Scalar arc_length{0};
  int generation{0};

  TorusPoint<Scalar> seed_center{};
  Vec2<Scalar> seed_dir{Vec2<Scalar>(1, 0)};
  Scalar seed_half_length{0};
  std::vector<Scalar> params;  // same length as polyline, increasing
};

constexpr double kSegmentSpacing = 1e-3;
constexpr long kSegmentNodeCap = 1000000;

/// Image of the seed parameter t after the segment's pushforwards.
template <typename Scalar>
TorusPoint<Scalar> segment_point(const SystemSpec<Scalar>& spec, const UnstableSegment<Scalar>& seg,
                                 Scalar t) {
  TorusPoint<Scalar> p = translate(seg.seed_center, Vec2<Scalar>(t * seg.seed_dir));
  for (int k = 0; k < seg.generation; ++k) p = apply(spec, p);
  return p;
}

/// Grows a local unstable curve through x: seeds a straight segment of length
/// 2 * initial_half_length along e_+ at f^{-generations}(x) and pushes it
/// forward, bisecting seed parameters until consecutive image nodes are at
/// most max_spacing apart.
template <typename Scalar>
UnstableSegment<Scalar> grow_unstable_segment(const SystemSpec<Scalar>& spec,
                                              const TorusPoint<Scalar>& x,
                                              Scalar initial_half_length, int generations,
                                              Scalar max_spacing = Scalar(kSegmentSpacing),
                                              long node_cap = kSegmentNodeCap,
                                              int n_iter = kDefaultPowerIterations) {
  if (!(initial_half_length > Scalar(0) && initial_half_length <= Scalar(1e-4)))
    throw config_error("initial_half_length must lie in (0, 1e-4]");
  if (generations < 0) throw config_error("generations must be >= 0");

  UnstableSegment<Scalar> seg;
  seg.generation = generations;
  seg.seed_half_length = initial_half_length;
  TorusPoint<Scalar> z = x;
  for (int k = 0; k < generations; ++k) z = apply_inverse(spec, z);
  seg.seed_center = z;
  const auto dir = bundle_direction(spec, z, Sign::Plus, n_iter);
  if (!dir.converged)
    throw numerical_error("splitting did not converge at the segment seed point");
  seg.seed_dir = dir.dir;
  seg.base = translate(z, Vec2<Scalar>(-initial_half_length * seg.seed_dir));

  // Parameter bisection: emit t0's node, recurse until image chords are short.
  std::vector<Scalar> params;
  std::vector<TorusPoint<Scalar>> nodes;
  struct Span {
    Scalar t0, t1;
    TorusPoint<Scalar> p0, p1;
  };
  std::vector<Span> stack;
  const Scalar h = initial_half_length;
  const auto left = segment_point(spec, seg, -h);
  const auto right = segment_point(spec, seg, h);
  params.push_back(-h);
  nodes.push_back(left);
  stack.push_back({-h, h, left, right});
  while (!stack.empty()) {
    const Span s = stack.back();
    stack.pop_back();
    const Scalar gap = torus_distance(s.p0, s.p1);
    const bool splittable = (s.t1 - s.t0) > Scalar(4) * std::numeric_limits<Scalar>::epsilon() * h;
    if (gap > max_spacing && splittable) {
      if (static_cast<long>(nodes.size()) >= node_cap)
        throw numerical_error("segment refinement exceeded " + std::to_string(node_cap) +
                              " nodes; reduce generations");
      const Scalar tm = (s.t0 + s.t1) / Scalar(2);
      const auto pm = segment_point(spec, seg, tm);
      stack.push_back({tm, s.t1, pm, s.p1});
      stack.push_back({s.t0, tm, s.p0, pm});
      continue;
    }
    params.push_back(s.t1);
    nodes.push_back(s.p1);
  }
  seg.params = std::move(params);
  seg.polyline = std::move(nodes);
  CompensatedSum len;
  for (std::size_t i = 1; i < seg.polyline.size(); ++i)
    len.add(static_cast<double>(torus_distance(seg.polyline[i - 1], seg.polyline[i])));
  seg.arc_length = Scalar(len.value());
  return seg;
}

/// One-step curve expansion versus the ball minimum m0 = psi_+(x, r): for an
/// E^+-tangent curve inside B_r(x) the image length must be at least m0 times
/// the source length, up to the stated slack.
template <typename Scalar>
struct LemauresCheck {
  Scalar m0{0};
  Scalar length_ratio{0};
  bool holds{false};
};

template <typename Scalar>
LemauresCheck<Scalar> check_lemaures(const SystemSpec<Scalar>& spec, const TorusPoint<Scalar>& x,
                                     Scalar r, const UnstableSegment<Scalar>& segment,
                                     Scalar slack = Scalar(1e-6),
                                     int n_iter = kDefaultPowerIterations) {
  if (segment.polyline.size() < 2) throw config_error("segment has no length");
  for (const auto& p : segment.polyline)
    if (torus_distance(p, x) > r)
      throw config_error("segment exits the ball B_r(x)");
  LemauresCheck<Scalar> chk;
  chk.m0 = psi_ball(spec, x, Sign::Plus, 1, r, n_iter).value;
  CompensatedSum src, img;
  TorusPoint<Scalar> prev_img = apply(spec, segment.polyline.front());
  for (std::size_t i = 1; i < segment.polyline.size(); ++i) {
    src.add(static_cast<double>(torus_distance(segment.polyline[i - 1], segment.polyline[i])));
    const TorusPoint<Scalar> cur_img = apply(spec, segment.polyline[i]);
    img.add(static_cast<double>(torus_distance(prev_img, cur_img)));
    prev_img = cur_img;
  }
  chk.length_ratio = Scalar(img.value()) / Scalar(src.value());
  chk.holds = chk.length_ratio >= chk.m0 - slack;
  return chk;
}

}  // namespace radlab
