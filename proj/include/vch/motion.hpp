#pragma once

// Random-waypoint style mobility inside a rectangular region, plus the
// odometry and ranging noise models.

#include <cstdint>
#include <random>
#include <string>

#include "vch/vec2.hpp"

namespace vch {

using Rng = std::mt19937_64;

// Independent stream `stream` derived from a master seed.
Rng make_stream(std::uint64_t seed, std::uint64_t stream);

struct Region {
  double x_min = -5.0;
  double x_max = 15.0;
  double y_min = -5.0;
  double y_max = 15.0;

  [[nodiscard]] double width() const { return x_max - x_min; }
  [[nodiscard]] double height() const { return y_max - y_min; }
  [[nodiscard]] bool contains(const Vec2& p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
  [[nodiscard]] bool valid() const { return x_max > x_min && y_max > y_min; }
  Vec2 sample(Rng& rng) const;
};

struct MotionCommand {
  double step = 0.0;  // distance traveled this step
  double turn = 0.0;  // random rotation after the exchange, [0, 2pi)
  double scan = 0.0;  // rotation toward the contacted node, [0, 2pi)
};

enum class NoiseDistribution { Uniform, Gaussian };

std::string to_string(NoiseDistribution d);
NoiseDistribution noise_distribution_from_string(const std::string& s);

struct NoiseConfig {
  double motion_frac = 0.0;  // fraction of the motion-vector magnitude
  double range_frac = 0.0;   // fraction of the true distance
  NoiseDistribution distribution = NoiseDistribution::Uniform;
};

struct Pose {
  Vec2 position;
  double heading = 0.0;  // radians, [0, 2pi)
};

// Step length ~ U[0, d_max], turn ~ U[0, 2pi). Scan is left at zero.
MotionCommand draw_motion(Rng& rng, double d_max);

// Rotates by scan + turn and advances. If the endpoint would leave the region
// the turn is redrawn until it does not; `cmd` is updated to the accepted
// command.
Pose apply_motion(const Pose& pose, MotionCommand& cmd, const Region& region, Rng& rng);

// true_delta plus per-component noise bounded by motion_frac * |true_delta|
// (uniform), or with matching variance (gaussian).
Vec2 noisy_motion(const Vec2& true_delta, const NoiseConfig& cfg, Rng& rng);

// max(0, d * (1 + u)), u ~ U[-range_frac, range_frac] (or matched gaussian).
double noisy_range(double true_d, const NoiseConfig& cfg, Rng& rng);

}  // namespace vch
