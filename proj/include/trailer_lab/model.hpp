#pragma once

// No-slip kinematics of a truck with an off-axle hitch towing a dolly and a
// semitrailer. Generalized coordinates follow the trailer: (x3, y3) is the
// trailer axle center, theta3 the trailer heading, beta3 = theta2 - theta3
// and beta2 = theta1 - theta2 the two joint angles. Headings are
// counter-clockwise from +x and alpha > 0 turns the truck counter-clockwise
// when driving forward.

#include <cmath>
#include <numbers>
#include <optional>

#include "trailer_lab/types.hpp"

namespace trailer_lab {

template <typename Scalar>
struct VehicleParams {
  Scalar L1{};           // truck wheelbase [m]
  Scalar L2{};           // off-axle hitch to dolly axle [m]
  Scalar L3{};           // dolly axle to trailer axle [m]
  Scalar M1{};           // hitch offset behind truck rear axle [m]
  Scalar alpha_limit{};  // mechanical steering bound [rad]

  /// Throws ValidationError naming the first violated invariant.
  void validate() const {
    if (!(L1 > 0) || !std::isfinite(double(L1))) throw ValidationError("L1", "must be > 0");
    if (!(L2 > 0) || !std::isfinite(double(L2))) throw ValidationError("L2", "must be > 0");
    if (!(L3 > 0) || !std::isfinite(double(L3))) throw ValidationError("L3", "must be > 0");
    if (!(M1 >= 0) || !std::isfinite(double(M1))) throw ValidationError("M1", "must be >= 0");
    if (!(L3 * L3 + L2 * L2 - M1 * M1 > 0))
      throw ValidationError("M1", "requires L3^2 + L2^2 - M1^2 > 0");
    if (!(alpha_limit > 0) || !(alpha_limit < Scalar(std::numbers::pi / 2)))
      throw ValidationError("alpha_limit", "must lie in (0, pi/2)");
  }

  bool operator==(const VehicleParams&) const = default;
};

/// Small-scale test platform: L1 = 19.0 cm, L2 = 14.0 cm, L3 = 34.5 cm,
/// M1 = 3.6 cm, steering limited to +-44 degrees.
template <typename Scalar = double>
VehicleParams<Scalar> test_platform_params() {
  return {Scalar(0.19), Scalar(0.14), Scalar(0.345), Scalar(0.036), deg_to_rad(Scalar(44))};
}

template <typename Scalar>
struct VehicleState {
  Scalar x3{};
  Scalar y3{};
  Scalar theta3{};
  Scalar beta3{};
  Scalar beta2{};

  Vector5<Scalar> as_vector() const { return {x3, y3, theta3, beta3, beta2}; }

  static VehicleState from_vector(const Vector5<Scalar>& p) {
    return {p(0), p(1), p(2), p(3), p(4)};
  }

  VehicleState normalized() const {
    return {x3, y3, wrap_angle(theta3), wrap_angle(beta3), wrap_angle(beta2)};
  }

  bool non_jackknifed() const {
    using std::abs;
    return abs(beta3) < Scalar(std::numbers::pi / 2) && abs(beta2) < Scalar(std::numbers::pi / 2);
  }

  bool operator==(const VehicleState&) const = default;
};

template <typename Scalar>
struct ControlInput {
  Scalar alpha{};  // steering angle [rad]
  Scalar v{};      // speed at the truck rear axle [m/s], negative when reversing
};

template <typename Scalar>
struct EquilibriumPoint {
  struct Radii {
    Scalar R1, R2, R3;
  };

  Scalar alpha_e{};
  Scalar beta3_e{};
  Scalar beta2_e{};
  /// Empty on the straight-line equilibrium (infinite radii).
  std::optional<Radii> radii;

  bool is_straight() const { return !radii.has_value(); }
};

template <typename Scalar>
struct LinearModel {
  Matrix2<Scalar> A;
  Vector2<Scalar> B;
  EquilibriumPoint<Scalar> equilibrium;
  Scalar v_design{};
};

namespace detail {

template <typename Scalar>
void require_steerable(Scalar alpha) {
  using std::abs;
  if (!(abs(alpha) < Scalar(std::numbers::pi / 2)))
    throw DomainError("steering angle must satisfy |alpha| < pi/2");
}

}  // namespace detail

/// Rates of the joint angles (beta3_dot, beta2_dot).
template <typename Scalar>
Vector2<Scalar> joint_angle_rates(Scalar beta3, Scalar beta2, Scalar alpha, Scalar v,
                                  const VehicleParams<Scalar>& params) {
  using std::cos;
  using std::sin;
  using std::tan;
  detail::require_steerable(alpha);
  const Scalar tan_alpha = tan(alpha);
  const Scalar k = params.M1 / params.L1;
  const Scalar c2 = cos(beta2);
  const Scalar t2 = tan(beta2);
  const Scalar hitch_factor = Scalar(1) + k * t2 * tan_alpha;

  // theta2_dot - theta3_dot
  const Scalar beta3_dot =
      v * c2 * ((t2 - k * tan_alpha) / params.L2 - sin(beta3) / params.L3 * hitch_factor);
  const Scalar beta2_dot = v * (tan_alpha / params.L1 - sin(beta2) / params.L2 +
                                params.M1 / (params.L1 * params.L2) * c2 * tan_alpha);
  return {beta3_dot, beta2_dot};
}

/// Time derivative of (x3, y3, theta3, beta3, beta2).
template <typename Scalar>
Vector5<Scalar> derivatives(const VehicleState<Scalar>& state, const ControlInput<Scalar>& input,
                            const VehicleParams<Scalar>& params) {
  using std::cos;
  using std::sin;
  using std::tan;
  detail::require_steerable(input.alpha);
  const Scalar k = params.M1 / params.L1;
  // Longitudinal speed of the dolly axle.
  const Scalar dolly_speed =
      input.v * cos(state.beta2) * (Scalar(1) + k * tan(state.beta2) * tan(input.alpha));
  const Scalar trailer_speed = dolly_speed * cos(state.beta3);
  const Vector2<Scalar> joint =
      joint_angle_rates(state.beta3, state.beta2, input.alpha, input.v, params);

  Vector5<Scalar> rates;
  rates << trailer_speed * cos(state.theta3), trailer_speed * sin(state.theta3),
      dolly_speed * sin(state.beta3) / params.L3, joint(0), joint(1);
  return rates;
}

/// One classical RK4 step with the input held over [0, dt].
template <typename Scalar>
VehicleState<Scalar> step(const VehicleState<Scalar>& state, const ControlInput<Scalar>& input,
                          const VehicleParams<Scalar>& params, Scalar dt) {
  if (!(dt > 0)) throw DomainError("integration step must be positive");
  using State = VehicleState<Scalar>;
  const Vector5<Scalar> p = state.as_vector();
  const Vector5<Scalar> k1 = derivatives(state, input, params);
  const Vector5<Scalar> k2 = derivatives(State::from_vector(p + dt / 2 * k1), input, params);
  const Vector5<Scalar> k3 = derivatives(State::from_vector(p + dt / 2 * k2), input, params);
  const Vector5<Scalar> k4 = derivatives(State::from_vector(p + dt * k3), input, params);
  return State::from_vector(p + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)).normalized();
}

/// Largest steering angle with a circular equilibrium: the trailer circle
/// collapses to a point (R3 = 0) at this limit.
template <typename Scalar>
Scalar alpha_max(const VehicleParams<Scalar>& params) {
  using std::atan;
  using std::sqrt;
  return atan(sqrt(params.L1 * params.L1 /
                   (params.L3 * params.L3 + params.L2 * params.L2 - params.M1 * params.M1)));
}

template <typename Scalar>
EquilibriumPoint<Scalar> equilibrium(Scalar alpha_e, const VehicleParams<Scalar>& params) {
  using std::abs;
  using std::atan;
  using std::sqrt;
  using std::tan;
  if (!(abs(alpha_e) < alpha_max(params)))
    throw DomainError("equilibrium requires |alpha_e| < alpha_max");
  if (alpha_e == Scalar(0)) return {Scalar(0), Scalar(0), Scalar(0), std::nullopt};

  const Scalar s = sign(alpha_e);
  const Scalar R1 = params.L1 / abs(tan(alpha_e));
  const Scalar R2 = sqrt(R1 * R1 + params.M1 * params.M1 - params.L2 * params.L2);
  const Scalar R3 = sqrt(R2 * R2 - params.L3 * params.L3);
  const Scalar beta3_e = s * atan(params.L3 / R3);
  const Scalar beta2_e = s * (atan(params.M1 / R1) + atan(params.L2 / R2));
  return {alpha_e, beta3_e, beta2_e, typename EquilibriumPoint<Scalar>::Radii{R1, R2, R3}};
}

/// Jacobians of the joint-angle rates with respect to (beta3, beta2) and
/// alpha at an arbitrary point.
template <typename Scalar>
std::pair<Matrix2<Scalar>, Vector2<Scalar>> joint_rate_jacobians(
    Scalar beta3, Scalar beta2, Scalar alpha, Scalar v, const VehicleParams<Scalar>& params) {
  using std::cos;
  using std::sin;
  using std::tan;
  detail::require_steerable(alpha);
  const Scalar t = tan(alpha);
  const Scalar dt_dalpha = Scalar(1) + t * t;
  const Scalar k = params.M1 / params.L1;
  const Scalar s3 = sin(beta3), c3 = cos(beta3);
  const Scalar s2 = sin(beta2), c2 = cos(beta2);

  // beta3_dot = v [ (s2 - k t c2)/L2 - s3/L3 (c2 + k t s2) ]
  // beta2_dot = v [ t/L1 - s2/L2 + k t c2/L2 ]
  Matrix2<Scalar> A;
  A(0, 0) = -v * c3 * (c2 + k * t * s2) / params.L3;
  A(0, 1) = v * ((c2 + k * t * s2) / params.L2 - s3 / params.L3 * (k * t * c2 - s2));
  A(1, 0) = Scalar(0);
  A(1, 1) = -v * (c2 + k * t * s2) / params.L2;

  Vector2<Scalar> B;
  B(0) = -v * dt_dalpha * k * (c2 / params.L2 + s3 * s2 / params.L3);
  B(1) = v * dt_dalpha * (Scalar(1) / params.L1 + k * c2 / params.L2);
  return {A, B};
}

template <typename Scalar>
LinearModel<Scalar> linearize(Scalar alpha_e, Scalar v_design, const VehicleParams<Scalar>& params) {
  if (v_design == Scalar(0)) throw DomainError("linearization requires a nonzero design speed");
  EquilibriumPoint<Scalar> eq = equilibrium(alpha_e, params);
  auto [A, B] = joint_rate_jacobians(eq.beta3_e, eq.beta2_e, alpha_e, v_design, params);
  return {A, B, std::move(eq), v_design};
}

using VehicleParamsd = VehicleParams<double>;
using VehicleStated = VehicleState<double>;
using ControlInputd = ControlInput<double>;
using EquilibriumPointd = EquilibriumPoint<double>;
using LinearModeld = LinearModel<double>;

}  // namespace trailer_lab
