#pragma once

#include <array>
#include <cstddef>

#include "vch/vec2.hpp"

namespace vch {

using NodeId = std::size_t;

// One hull vertex as it enters an update row.
struct WeightEntry {
  NodeId node = 0;
  bool anchor = false;
  double barycentric = 0.0;  // a_q
  double weight = 0.0;       // (1 - self_weight) * a_q, the matrix entry
  std::size_t source_step = 0;  // global step of the contact that produced `value`
  Vec2 value;                   // stored estimate, or the anchor's known position
};

// A location update by one agent, with the weight floors it claims to satisfy.
struct UpdateEvent {
  NodeId agent = 0;
  std::size_t step = 0;
  double self_weight = 1.0;
  std::array<WeightEntry, 3> vertices{};
  double relative_error = 0.0;

  double self_floor = 0.0;
  double anchor_min = 0.0;
  double agent_min = 0.0;
  bool agent_floor = false;       // agent_min floor applies to agent vertices
  bool zero_self_allowed = false; // all-anchor hull may drop the self-weight
};

}  // namespace vch
