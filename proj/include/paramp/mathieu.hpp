#pragma once

#include <cmath>

#include "paramp/errors.hpp"

namespace paramp {

inline constexpr double kPi = 3.14159265358979323846;

/// Stands in for Q -> infinity so the damping term needs no special case.
inline constexpr double kInfiniteQ = 1e12;

// ===== parameter blocks =====

/// Resonator body: quality factor and natural angular frequency.
/// omega0 = 1 in the normalized frame produced by normalize().
struct ResonatorParams {
  double q_factor = 1000.0;
  double omega0 = 1.0;
};

/// External force per unit mass, a*cos(omega_a*t + phase_phi).
/// accel_amplitude has units of displacement*omega0^2 (so a static force of
/// amplitude a deflects the spring by a/omega0^2).
struct DriveSpec {
  double accel_amplitude = 0.0;
  double omega_a = 1.0;
  double phase_phi = 0.0;  // rad
};

/// Stiffness pump: k(t) = k*(1 + delta*cos(omega_p*t + phase_psi)).
/// phase_psi defaults to 0, which reproduces the plain pumped equation.
struct PumpSpec {
  double delta = 0.0;
  double omega_p = 2.0;
  double phase_psi = 0.0;  // rad
};

/// Optional hardening cubic -beta*z^3 modeling amplitude saturation.
struct DuffingSpec {
  double beta = 0.0;
};

/// Integration state (displacement, velocity).
struct State {
  double z = 0.0;
  double zdot = 0.0;
};

/// Time derivative of State as returned by rhs().
struct StateDerivative {
  double dz = 0.0;
  double dzdot = 0.0;
};

// ===== system =====

/// The governing system
///   zddot = -(omega0/Q)*zdot - omega0^2*(1 + delta*cos(omega_p*t + psi))*z
///           - beta*z^3 + a*cos(omega_a*t + phi)
struct MathieuSystem {
  ResonatorParams resonator{};
  DriveSpec drive{};
  PumpSpec pump{};
  DuffingSpec duffing{};

  /// Throws InvalidInput when any component invariant fails.
  void validate() const;
};

namespace detail {

inline void require(bool ok, const char* msg) {
  if (!ok) throw InvalidInput(msg);
}

}  // namespace detail

inline void validate(const ResonatorParams& r) {
  detail::require(std::isfinite(r.q_factor) && r.q_factor > 0.0,
                  "ResonatorParams: q_factor must be positive and finite");
  detail::require(std::isfinite(r.omega0) && r.omega0 > 0.0,
                  "ResonatorParams: omega0 must be positive and finite");
}

inline void validate(const DriveSpec& d) {
  detail::require(std::isfinite(d.accel_amplitude) && d.accel_amplitude >= 0.0,
                  "DriveSpec: accel_amplitude must be >= 0 and finite");
  detail::require(std::isfinite(d.omega_a) && d.omega_a > 0.0,
                  "DriveSpec: omega_a must be positive and finite");
  detail::require(std::isfinite(d.phase_phi), "DriveSpec: phase_phi must be finite");
}

inline void validate(const PumpSpec& p) {
  detail::require(std::isfinite(p.delta) && p.delta >= 0.0 && p.delta < 1.0,
                  "PumpSpec: delta must lie in [0, 1) so stiffness stays positive");
  detail::require(std::isfinite(p.omega_p) && p.omega_p > 0.0,
                  "PumpSpec: omega_p must be positive and finite");
  detail::require(std::isfinite(p.phase_psi), "PumpSpec: phase_psi must be finite");
}

inline void validate(const DuffingSpec& d) {
  detail::require(std::isfinite(d.beta) && d.beta >= 0.0,
                  "DuffingSpec: beta must be >= 0 and finite");
}

inline void MathieuSystem::validate() const {
  paramp::validate(resonator);
  paramp::validate(drive);
  paramp::validate(pump);
  paramp::validate(duffing);
}

// ===== equations =====

/// Evaluates the governing equation. Pure; callers guarantee a valid system.
inline StateDerivative rhs(const MathieuSystem& s, double t, State x) noexcept {
  const double w0 = s.resonator.omega0;
  const double stiffness =
      1.0 + s.pump.delta * std::cos(s.pump.omega_p * t + s.pump.phase_psi);
  const double force =
      s.drive.accel_amplitude * std::cos(s.drive.omega_a * t + s.drive.phase_phi);
  const double zddot = -(w0 / s.resonator.q_factor) * x.zdot -
                       w0 * w0 * stiffness * x.z -
                       s.duffing.beta * x.z * x.z * x.z + force;
  return {x.zdot, zddot};
}

/// f0 = (1/2pi)*sqrt(k/m).
inline double natural_frequency(double stiffness, double mass) {
  detail::require(std::isfinite(stiffness) && stiffness > 0.0,
                  "natural_frequency: stiffness must be positive");
  detail::require(std::isfinite(mass) && mass > 0.0,
                  "natural_frequency: mass must be positive");
  return std::sqrt(stiffness / mass) / (2.0 * kPi);
}

/// Dimensional force amplitude and mass; the normalized frame only ever sees
/// their ratio.
struct DimensionalDrive {
  double force_amplitude = 0.0;  // N
  double mass = 0.0;             // kg
};

/// Maps a dimensional system to the normalized frame: omega0 = 1, time unit
/// 1/omega0, displacement unit F0/(m*omega0^2) (the static deflection), so
/// accel_amplitude = 1 by construction. Q, delta, and frequency ratios are
/// preserved; beta rescales with the squared displacement unit.
inline MathieuSystem normalize(const ResonatorParams& resonator,
                               const DimensionalDrive& drive_dim,
                               const DriveSpec& drive, const PumpSpec& pump,
                               const DuffingSpec& duffing = {}) {
  validate(resonator);
  validate(drive);
  validate(pump);
  validate(duffing);
  detail::require(std::isfinite(drive_dim.mass) && drive_dim.mass > 0.0,
                  "normalize: mass must be positive");
  detail::require(std::isfinite(drive_dim.force_amplitude) &&
                      drive_dim.force_amplitude > 0.0,
                  "normalize: force_amplitude must be positive");
  const double w0 = resonator.omega0;
  const double unit = drive_dim.force_amplitude / (drive_dim.mass * w0 * w0);
  MathieuSystem out;
  out.resonator = {resonator.q_factor, 1.0};
  out.drive = {1.0, drive.omega_a / w0, drive.phase_phi};
  out.pump = {pump.delta, pump.omega_p / w0, pump.phase_psi};
  out.duffing = {duffing.beta * unit * unit / (w0 * w0)};
  return out;
}

}  // namespace paramp
