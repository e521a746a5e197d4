#pragma once

// Per-agent protocol state: the visited set with tracked distances and
// bearings, the virtual hull search, and the gated barycentric update.

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "vch/event.hpp"
#include "vch/geometry.hpp"
#include "vch/motion.hpp"
#include "vch/vec2.hpp"

namespace vch {

struct VisitedRecord {
  NodeId node = 0;
  std::size_t contact_step = 0;
  double distance = 0.0;   // tracked distance to the node's position at contact time
  Vec2 estimate;           // estimate (or known position) received at contact time
  double bearing = 0.0;    // direction of the contact point, agent-local frame, [0, 2pi)
  bool is_anchor = false;
  bool anchor_touched = false;
};

struct UpdateWeights {
  double self_weight = 0.2;  // alpha_k used when a hull is found
  double anchor_min = 0.1;   // alpha: floor on every anchor entry
  double agent_min = 0.05;   // alpha': floor on every agent entry under noise
  double self_floor = 0.2;   // beta: floor on the self-weight
};

struct SearchOptions {
  bool modifications = false;      // agent floor plus the relative-error gate
  double epsilon = 0.05;           // bound on the inclusion relative error
  double inclusion_tol = geometry::kTriTol;
  bool three_anchor_reset = false; // self-weight 0 inside an all-anchor hull
  geometry::ResidualPolicy residual = geometry::ResidualPolicy::Smallest;
};

struct TriangulationSet {
  std::array<VisitedRecord, 3> records{};
  geometry::HullDistances distances;
  geometry::Barycentrics weights;
  double relative_error = 0.0;
  double self_weight = 0.0;
};

struct ContactInfo {
  NodeId node = 0;
  double measured_distance = 0.0;
  Vec2 estimate;
  bool is_anchor = false;
  bool anchor_touched = false;
};

class Agent {
 public:
  Agent(NodeId id, Pose true_pose, Vec2 estimate, Rng rng);

  NodeId id() const { return id_; }
  const Vec2& estimate() const { return estimate_; }
  void set_estimate(const Vec2& e) { estimate_ = e; }
  Pose& true_pose() { return true_pose_; }
  const Pose& true_pose() const { return true_pose_; }
  double local_heading() const { return local_heading_; }
  bool anchor_touched() const { return anchor_touched_; }
  const std::map<NodeId, VisitedRecord>& visited() const { return visited_; }
  Rng& rng() { return rng_; }

  // Records a contact. `bearing_offset` is the scan rotation that turns the
  // agent toward the other node; the record's bearing is the heading after
  // that rotation. A revisit replaces the previous record.
  void on_contact(const ContactInfo& info, double bearing_offset, std::size_t step);

  // Rotates by cmd.scan + cmd.turn, then propagates every record over a step
  // of length |measured_delta| and adds measured_delta to the estimate.
  void on_move(const MotionCommand& cmd, const Vec2& measured_delta);

  double pairwise_virtual_distance(const VisitedRecord& a, const VisitedRecord& b) const;

  // First qualifying 3-subset, oldest contacts first.
  std::optional<TriangulationSet> find_triangulation(const UpdateWeights& weights,
                                                     const SearchOptions& opts);

  // Convex combination toward the hull vertices. Consumes the three records.
  UpdateEvent apply_update(const TriangulationSet& ts, const UpdateWeights& weights,
                           const SearchOptions& opts, std::size_t step);

 private:
  NodeId id_;
  Pose true_pose_;
  Vec2 estimate_;
  double local_heading_ = 0.0;
  bool anchor_touched_ = false;
  std::map<NodeId, VisitedRecord> visited_;
  Rng rng_;
};

}  // namespace vch
