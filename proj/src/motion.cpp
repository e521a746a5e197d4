#include "vch/motion.hpp"

#include <cmath>
#include <stdexcept>

#include "vch/geometry.hpp"

namespace vch {

Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

Vec2 Region::sample(Rng& rng) const {
  std::uniform_real_distribution<double> ux(x_min, x_max);
  std::uniform_real_distribution<double> uy(y_min, y_max);
  const double x = ux(rng);
  return {x, uy(rng)};
}

std::string to_string(NoiseDistribution d) {
  return d == NoiseDistribution::Uniform ? "uniform" : "gaussian";
}

NoiseDistribution noise_distribution_from_string(const std::string& s) {
  if (s == "uniform") return NoiseDistribution::Uniform;
  if (s == "gaussian") return NoiseDistribution::Gaussian;
  throw std::invalid_argument("unknown noise distribution '" + s + "'");
}

MotionCommand draw_motion(Rng& rng, double d_max) {
  MotionCommand cmd;
  if (d_max > 0.0) {
    std::uniform_real_distribution<double> step(0.0, d_max);
    cmd.step = step(rng);
  }
  std::uniform_real_distribution<double> angle(0.0, geometry::kTwoPi);
  cmd.turn = geometry::wrap_angle(angle(rng));
  return cmd;
}

Pose apply_motion(const Pose& pose, MotionCommand& cmd, const Region& region, Rng& rng) {
  constexpr int kAttemptsPerLength = 64;
  std::uniform_real_distribution<double> angle(0.0, geometry::kTwoPi);
  int attempts = 0;
  while (true) {
    const double heading = geometry::wrap_angle(pose.heading + cmd.scan + cmd.turn);
    const Vec2 end{pose.position.x + cmd.step * std::cos(heading),
                   pose.position.y + cmd.step * std::sin(heading)};
    if (cmd.step == 0.0 || region.contains(end)) {
      return {cmd.step == 0.0 ? pose.position : end, heading};
    }
    cmd.turn = geometry::wrap_angle(angle(rng));
    if (++attempts % kAttemptsPerLength == 0) {
      // Step longer than the region allows from here.
      cmd.step *= 0.5;
    }
  }
}

namespace {

double draw_unit_noise(NoiseDistribution d, double frac, Rng& rng) {
  if (frac == 0.0) return 0.0;
  if (d == NoiseDistribution::Uniform) {
    std::uniform_real_distribution<double> u(-frac, frac);
    return u(rng);
  }
  std::normal_distribution<double> g(0.0, frac / std::sqrt(3.0));
  return g(rng);
}

}  // namespace

Vec2 noisy_motion(const Vec2& true_delta, const NoiseConfig& cfg, Rng& rng) {
  if (cfg.motion_frac == 0.0) return true_delta;
  const double mag = true_delta.norm();
  const double nx = draw_unit_noise(cfg.distribution, cfg.motion_frac, rng);
  const double ny = draw_unit_noise(cfg.distribution, cfg.motion_frac, rng);
  return {true_delta.x + nx * mag, true_delta.y + ny * mag};
}

double noisy_range(double true_d, const NoiseConfig& cfg, Rng& rng) {
  if (cfg.range_frac == 0.0) return true_d;
  const double u = draw_unit_noise(cfg.distribution, cfg.range_frac, rng);
  return std::max(0.0, true_d * (1.0 + u));
}

}  // namespace vch
