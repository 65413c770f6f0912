#include "hfc/plant.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hfc::plant {

namespace {

// Lattice spacing of the seeded roughness noise profile [m].
constexpr double kNoiseSpacing = 0.002;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Uniform in [-1, 1], a pure function of (seed, lattice index).
double lattice_value(std::uint64_t seed, std::int64_t i) {
  const std::uint64_t h = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(i)));
  return static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

AxisForce surface_force(const Environment& env, const RoughSurface& s, const Pose& p,
                        const Pose& v) {
  const double depth = env.surface_height(s, p.x) - p.z;
  if (depth <= 0.0) return {};
  const double fz = s.stiffness * depth;
  return {-s.friction_coeff * fz * sign(v.x), fz};
}

AxisForce box_force(const Box& b, const Pose& p) {
  if (!(p.x > b.x_min && p.x < b.x_max && p.z > b.z_min && p.z < b.z_max)) return {};
  struct Face {
    double depth;
    AxisForce normal;
  };
  const Face faces[] = {
      {p.x - b.x_min, {-1.0, 0.0}},
      {b.x_max - p.x, {1.0, 0.0}},
      {p.z - b.z_min, {0.0, -1.0}},
      {b.z_max - p.z, {0.0, 1.0}},
  };
  const Face* best = &faces[0];
  for (const Face& f : faces) {
    if (f.depth < best->depth) best = &f;
  }
  const double mag = b.stiffness * best->depth;
  return {mag * best->normal.x, mag * best->normal.z};
}

}  // namespace

void validate(const ArmParams& p) {
  if (!(p.l1 > 0.0) || !(p.l2 > 0.0)) throw std::invalid_argument("link lengths must be > 0");
  if (!(p.tau_servo > 0.0)) throw std::invalid_argument("tau_servo must be > 0");
  if (!(p.qdot_max > 0.0)) throw std::invalid_argument("qdot_max must be > 0");
}

Pose fk(const PlanarArm& arm) {
  const double q1 = arm.q[0];
  const double q12 = arm.q[0] + arm.q[1];
  return {arm.params.l1 * std::cos(q1) + arm.params.l2 * std::cos(q12),
          arm.params.l1 * std::sin(q1) + arm.params.l2 * std::sin(q12)};
}

Eigen::Matrix2d jacobian(const PlanarArm& arm) {
  const double l1 = arm.params.l1;
  const double l2 = arm.params.l2;
  const double s1 = std::sin(arm.q[0]);
  const double c1 = std::cos(arm.q[0]);
  const double s12 = std::sin(arm.q[0] + arm.q[1]);
  const double c12 = std::cos(arm.q[0] + arm.q[1]);
  Eigen::Matrix2d j;
  j << -l1 * s1 - l2 * s12, -l2 * s12,
        l1 * c1 + l2 * c12,  l2 * c12;
  return j;
}

Eigen::Vector2d joint_torques(const PlanarArm& arm, const AxisForce& f) {
  return jacobian(arm).transpose() * Eigen::Vector2d(f.x, f.z);
}

JointAngles ik(double l1, double l2, const Pose& target, Elbow elbow) {
  const double r2 = target.x * target.x + target.z * target.z;
  const double r = std::sqrt(r2);
  constexpr double kSlack = 1e-12;
  if (r > l1 + l2 + kSlack || r < std::abs(l1 - l2) - kSlack) {
    throw Unreachable("target (" + std::to_string(target.x) + ", " + std::to_string(target.z) +
                      ") outside the workspace");
  }
  const double c2 = std::clamp((r2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2), -1.0, 1.0);
  double q2 = std::acos(c2);
  if (elbow == Elbow::Up) q2 = -q2;
  const double q1 =
      std::atan2(target.z, target.x) - std::atan2(l2 * std::sin(q2), l1 + l2 * std::cos(q2));
  return {q1, q2};
}

void servo_step(PlanarArm& arm, const JointAngles& q_des, double dt) {
  const double alpha = 1.0 - std::exp(-dt / arm.params.tau_servo);
  const double max_step = arm.params.qdot_max * dt;
  for (int i = 0; i < 2; ++i) {
    const double step = std::clamp(alpha * (q_des[i] - arm.q[i]), -max_step, max_step);
    arm.q[i] += step;
  }
}

void validate(const Obstacle& o) {
  if (const auto* s = std::get_if<RoughSurface>(&o)) {
    if (!(s->stiffness > 0.0)) throw std::invalid_argument("surface stiffness must be > 0");
    if (s->roughness_amplitude < 0.0 || s->noise_amplitude < 0.0) {
      throw std::invalid_argument("surface amplitudes must be >= 0");
    }
    if (!(s->roughness_wavelength > 0.0)) {
      throw std::invalid_argument("roughness wavelength must be > 0");
    }
    if (s->friction_coeff < 0.0) throw std::invalid_argument("friction_coeff must be >= 0");
    return;
  }
  const auto& b = std::get<Box>(o);
  if (!(b.stiffness > 0.0)) throw std::invalid_argument("box stiffness must be > 0");
  if (!(b.x_min < b.x_max) || !(b.z_min < b.z_max)) {
    throw std::invalid_argument("box extents must be ordered");
  }
}

double Environment::surface_height(const RoughSurface& s, double x) const {
  double h = s.height_base;
  if (s.roughness_amplitude > 0.0) {
    h += s.roughness_amplitude *
         std::sin(2.0 * std::numbers::pi * x / s.roughness_wavelength);
  }
  if (s.noise_amplitude > 0.0) {
    const double cell = std::floor(x / kNoiseSpacing);
    const double frac = x / kNoiseSpacing - cell;
    const auto i = static_cast<std::int64_t>(cell);
    const double a = lattice_value(seed, i);
    const double b = lattice_value(seed, i + 1);
    h += s.noise_amplitude * (a + (b - a) * frac);
  }
  return h;
}

AxisForce contact_force(const Environment& env, const Pose& p, const Pose& v) {
  AxisForce total;
  for (const Obstacle& o : env.obstacles) {
    const AxisForce f = std::visit(
        [&](const auto& ob) -> AxisForce {
          using T = std::decay_t<decltype(ob)>;
          if constexpr (std::is_same_v<T, RoughSurface>) {
            return surface_force(env, ob, p, v);
          } else {
            return box_force(ob, p);
          }
        },
        o);
    total.x += f.x;
    total.z += f.z;
  }
  return total;
}

SensorModel::SensorModel(SensorParams params, std::uint64_t seed)
    : params_(params), rng_(seed) {
  if (params_.noise_sigma < 0.0) throw std::invalid_argument("noise_sigma must be >= 0");
}

// Box-Muller over the raw engine output, so the stream does not depend on
// the standard library's distribution implementation.
double SensorModel::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  auto uniform = [this] { return (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53; };
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

AxisForce SensorModel::sense(const AxisForce& f_true) {
  AxisForce out{f_true.x + params_.bias.x, f_true.z + params_.bias.z};
  if (params_.noise_sigma > 0.0) {
    out.x += params_.noise_sigma * gaussian();
    out.z += params_.noise_sigma * gaussian();
  }
  return out;
}

}  // namespace hfc::plant
