#pragma once

// Simulated world: a 2-link planar arm with a first-order joint servo,
// unilateral compliant obstacles and a force sensor.

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "hfc/control.hpp"

namespace hfc::plant {

struct Pose {
  double x = 0.0;
  double z = 0.0;
  bool operator==(const Pose&) const = default;
};

using JointAngles = Eigen::Vector2d;

enum class Elbow { Down, Up };

struct ArmParams {
  double l1 = 0.5;
  double l2 = 0.5;
  double tau_servo = 0.04;  // [s]
  double qdot_max = 2.0;    // [rad/s]
  Elbow elbow = Elbow::Down;
  bool operator==(const ArmParams&) const = default;
};

struct PlanarArm {
  ArmParams params;
  JointAngles q = JointAngles::Zero();
};

/// Throws std::invalid_argument when a link length, the servo time constant
/// or the rate limit is not positive.
void validate(const ArmParams& p);

Pose fk(const PlanarArm& arm);
Eigen::Matrix2d jacobian(const PlanarArm& arm);
/// tau = J^T f.
Eigen::Vector2d joint_torques(const PlanarArm& arm, const AxisForce& f);

class Unreachable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Closed-form inverse kinematics. Elbow::Down yields q2 >= 0.
/// Throws Unreachable outside the annulus |l1 - l2| <= r <= l1 + l2.
JointAngles ik(double l1, double l2, const Pose& target, Elbow elbow);

/// First-order servo toward q_des with alpha = 1 - exp(-dt / tau), then each
/// joint step is limited to qdot_max * dt.
void servo_step(PlanarArm& arm, const JointAngles& q_des, double dt);

struct RoughSurface {
  double height_base = 0.0;           // [m]
  double roughness_amplitude = 0.0;   // [m]
  double roughness_wavelength = 0.05; // [m]
  double noise_amplitude = 0.0;       // [m]
  double stiffness = 10'000.0;        // [N/m]
  double friction_coeff = 0.0;
  bool operator==(const RoughSurface&) const = default;
};

struct Box {
  double x_min = 0.0;
  double x_max = 0.0;
  double z_min = 0.0;
  double z_max = 0.0;
  double stiffness = 10'000.0;  // [N/m]
  bool operator==(const Box&) const = default;
};

using Obstacle = std::variant<RoughSurface, Box>;

/// Throws std::invalid_argument on a non-positive stiffness, a negative
/// amplitude or unordered box extents.
void validate(const Obstacle& o);

struct Environment {
  std::vector<Obstacle> obstacles;
  std::uint64_t seed = 0;

  /// Height of a rough surface at x, including the seeded noise profile.
  double surface_height(const RoughSurface& s, double x) const;
};

/// Sum of obstacle reactions on the tool at p moving with velocity v.
AxisForce contact_force(const Environment& env, const Pose& p, const Pose& v);

struct SensorParams {
  double noise_sigma = 0.0;  // [N]
  AxisForce bias{};          // [N]
  bool operator==(const SensorParams&) const = default;
};

/// Force/torque sensor: bias plus seeded Gaussian noise on each axis.
class SensorModel {
 public:
  explicit SensorModel(SensorParams params = {}, std::uint64_t seed = 0);

  AxisForce sense(const AxisForce& f_true);
  const SensorParams& params() const { return params_; }

 private:
  double gaussian();

  SensorParams params_;
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace hfc::plant
