#pragma once

#include <cmath>
#include <optional>

#include "paramp/errors.hpp"
#include "paramp/mathieu.hpp"

namespace paramp {

// First-order averaging of the pumped, driven oscillator near omega_a =
// omega0, omega_p = 2*omega0. Writing z = A(t)*cos(omega0 t) + B(t)*sin(
// omega0 t) and averaging over one cycle gives linear slow-flow equations
// whose steady state splits into two quadratures relative to the pump: one
// relaxes with rate gamma*(1 + delta*Q/2), the other with gamma*(1 -
// delta*Q/2), gamma = omega0/(2Q). Their steady amplitudes relative to the
// unpumped response are gain_min and gain_max below. These closed forms are
// an independent oracle for the time-domain simulator, valid below threshold
// (delta*Q/2 < 1).

// ===== threshold bookkeeping =====

/// Dimensionless distance to the parametric threshold; 1 means critical.
inline double pump_margin(double q_factor, double delta) {
  detail::require(std::isfinite(q_factor) && q_factor > 0.0,
                  "pump_margin: q_factor must be positive");
  detail::require(std::isfinite(delta) && delta >= 0.0,
                  "pump_margin: delta must be >= 0");
  return 0.5 * delta * q_factor;
}

/// Best-quadrature steady gain 1/(1 - delta*Q/2), or nullopt at/above
/// threshold where the linear steady state does not exist.
inline std::optional<double> max_gain(double q_factor, double delta) {
  const double s = pump_margin(q_factor, delta);
  if (s >= 1.0) return std::nullopt;
  return 1.0 / (1.0 - s);
}

/// Closed-form predictions for one (Q, delta) operating point.
struct AveragedPrediction {
  double gain_max = 1.0;     // amplified quadrature, 1/(1 - delta*Q/2)
  double gain_min = 1.0;     // deamplified quadrature, 1/(1 + delta*Q/2)
  double pump_margin = 0.0;  // delta*Q/2
};

/// Throws AboveThreshold when delta*Q/2 >= 1.
inline AveragedPrediction averaged_prediction(double q_factor, double delta) {
  const double s = pump_margin(q_factor, delta);
  if (s >= 1.0)
    throw AboveThreshold("averaged_prediction: delta*Q/2 >= 1, no linear steady state");
  return {1.0 / (1.0 - s), 1.0 / (1.0 + s), s};
}

// ===== quadrature-resolved gain =====

/// Gain as a function of the response-quadrature angle theta relative to the
/// pump: G(theta) = sqrt(cos^2(theta)/(1+s)^2 + sin^2(theta)/(1-s)^2),
/// s = delta*Q/2. Maximum at theta = pi/2 (amplified quadrature), minimum at
/// theta = 0; exactly pi-periodic.
inline double analytic_gain(double q_factor, double delta, double theta) {
  const double s = pump_margin(q_factor, delta);
  if (s >= 1.0)
    throw AboveThreshold("analytic_gain: delta*Q/2 >= 1, no linear steady state");
  const double c = std::cos(theta);
  const double sn = std::sin(theta);
  const double lo = c / (1.0 + s);
  const double hi = sn / (1.0 - s);
  return std::sqrt(lo * lo + hi * hi);
}

/// Inversion of gain_max: the pump depth needed for a target best-quadrature
/// gain G >= 1, delta = (2/Q)*(1 - 1/G).
inline double required_delta(double q_factor, double target_gain) {
  detail::require(std::isfinite(q_factor) && q_factor > 0.0,
                  "required_delta: q_factor must be positive");
  detail::require(std::isfinite(target_gain) && target_gain >= 1.0,
                  "required_delta: target_gain must be >= 1");
  return (2.0 / q_factor) * (1.0 - 1.0 / target_gain);
}

// ===== phase convention =====

/// Offset of the quadrature map, calibrated once against the simulator: a
/// fine drive-phase sweep at Q = 1000, delta = 0.0018, psi = 0 puts the gain
/// maximum at phase_phi = -pi/4, which pins theta0 = pi/4 in the affine map
/// below. Frozen thereafter.
inline constexpr double kThetaOffset = 0.25 * kPi;

/// Response-quadrature angle for drive phase phi and pump phase psi at
/// omega_p = 2*omega_a: theta = psi/2 - phi + theta0.
inline double quadrature_angle(double phase_phi, double phase_psi) {
  return 0.5 * phase_psi - phase_phi + kThetaOffset;
}

/// Drive phase that lands on the amplified quadrature (theta = pi/2) for a
/// given pump phase.
inline double amplified_drive_phase(double phase_psi = 0.0) {
  return 0.5 * phase_psi + kThetaOffset - 0.5 * kPi;
}

}  // namespace paramp
