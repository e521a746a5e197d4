#include "vch/agent.hpp"

#include <algorithm>
#include <cmath>

namespace vch {

namespace g = geometry;

Agent::Agent(NodeId id, Pose true_pose, Vec2 estimate, Rng rng)
    : id_(id), true_pose_(true_pose), estimate_(estimate), rng_(std::move(rng)) {}

void Agent::on_contact(const ContactInfo& info, double bearing_offset, std::size_t step) {
  VisitedRecord rec;
  rec.node = info.node;
  rec.contact_step = step;
  rec.distance = std::max(0.0, info.measured_distance);
  rec.estimate = info.estimate;
  rec.bearing = g::wrap_angle(local_heading_ + bearing_offset);
  rec.is_anchor = info.is_anchor;
  rec.anchor_touched = info.is_anchor || info.anchor_touched;
  visited_[info.node] = rec;
}

void Agent::on_move(const MotionCommand& cmd, const Vec2& measured_delta) {
  local_heading_ = g::wrap_angle(local_heading_ + cmd.scan + cmd.turn);
  const double move = measured_delta.norm();
  estimate_ += measured_delta;
  if (move == 0.0) return;

  for (auto& [node, rec] : visited_) {
    // Triangle (old position, new position, contact point): two sides and the
    // included angle are known, which fixes the remaining side and the angle
    // at the new position. The two-argument arctangent keeps that angle
    // accurate for short steps and nearly flat triangles.
    const double off = rec.bearing - local_heading_;
    const double ahead = rec.distance * std::cos(off) - move;
    const double side = rec.distance * std::sin(off);
    rec.distance = std::hypot(ahead, side);
    rec.bearing = rec.distance == 0.0 ? local_heading_ : g::wrap_angle(local_heading_ + std::atan2(side, ahead));
  }
}

double Agent::pairwise_virtual_distance(const VisitedRecord& a, const VisitedRecord& b) const {
  if (a.node == b.node) return 0.0;
  return g::indirect_distance(a.distance, b.distance, g::fold_angle(a.bearing - b.bearing));
}

std::optional<TriangulationSet> Agent::find_triangulation(const UpdateWeights& weights,
                                                          const SearchOptions& opts) {
  const std::size_t n = visited_.size();
  if (n < 3) return std::nullopt;

  std::vector<const VisitedRecord*> recs;
  recs.reserve(n);
  for (const auto& [node, rec] : visited_) recs.push_back(&rec);
  std::sort(recs.begin(), recs.end(), [](const VisitedRecord* a, const VisitedRecord* b) {
    return a->contact_step != b->contact_step ? a->contact_step < b->contact_step
                                              : a->node < b->node;
  });

  std::vector<double> pair(n * n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      pair[a * n + b] = pair[b * n + a] = pairwise_virtual_distance(*recs[a], *recs[b]);
    }
  }

  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      for (std::size_t c = b + 1; c < n; ++c) {
        const VisitedRecord& ra = *recs[a];
        const VisitedRecord& rb = *recs[b];
        const VisitedRecord& rc = *recs[c];
        const g::HullDistances h{ra.distance,   rb.distance,   rc.distance,
                                 pair[a * n + b], pair[a * n + c], pair[b * n + c]};
        g::InclusionResult inc;
        try {
          inc = g::inclusion_test(h, opts.inclusion_tol);
        } catch (const DegenerateHull&) {
          continue;
        } catch (const DegenerateInput&) {
          continue;
        }
        if (!inc.inside) continue;
        if (opts.modifications && inc.relative_error > opts.epsilon) continue;

        const bool all_anchors = ra.is_anchor && rb.is_anchor && rc.is_anchor;
        const double self = (opts.three_anchor_reset && all_anchors) ? 0.0 : weights.self_weight;
        const g::Barycentrics bary = g::barycentric_from_areas(inc, opts.residual, rng_);

        const std::array<const VisitedRecord*, 3> verts{&ra, &rb, &rc};
        bool ok = true;
        for (int q = 0; q < 3 && ok; ++q) {
          const double entry = (1.0 - self) * bary.w[q];
          if (verts[q]->is_anchor) {
            ok = entry >= weights.anchor_min;
          } else if (opts.modifications) {
            ok = entry >= weights.agent_min;
          }
        }
        if (!ok) continue;

        TriangulationSet ts;
        ts.records = {ra, rb, rc};
        ts.distances = h;
        ts.weights = bary;
        ts.relative_error = inc.relative_error;
        ts.self_weight = self;
        return ts;
      }
    }
  }
  return std::nullopt;
}

UpdateEvent Agent::apply_update(const TriangulationSet& ts, const UpdateWeights& weights,
                                const SearchOptions& opts, std::size_t step) {
  UpdateEvent ev;
  ev.agent = id_;
  ev.step = step;
  ev.self_weight = ts.self_weight;
  ev.relative_error = ts.relative_error;
  ev.self_floor = weights.self_floor;
  ev.anchor_min = weights.anchor_min;
  ev.agent_min = weights.agent_min;
  ev.agent_floor = opts.modifications;
  ev.zero_self_allowed = opts.three_anchor_reset;

  const double rest = 1.0 - ts.self_weight;
  Vec2 combo;
  for (int q = 0; q < 3; ++q) {
    const VisitedRecord& r = ts.records[q];
    WeightEntry& e = ev.vertices[q];
    e.node = r.node;
    e.anchor = r.is_anchor;
    e.barycentric = ts.weights.w[q];
    e.weight = rest * ts.weights.w[q];
    e.source_step = r.contact_step;
    e.value = r.estimate;
    combo += ts.weights.w[q] * r.estimate;
    if (r.is_anchor || r.anchor_touched) anchor_touched_ = true;
  }
  estimate_ = ts.self_weight * estimate_ + rest * combo;
  for (const auto& r : ts.records) visited_.erase(r.node);
  return ev;
}

}  // namespace vch
