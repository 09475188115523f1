#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "paramp/analysis.hpp"
#include "paramp/errors.hpp"
#include "paramp/integrator.hpp"
#include "paramp/oracle.hpp"

namespace paramp {

// ===== sweep plumbing =====

enum class SweepAxis {
  DrivePhase,       // phase_phi, rad
  PumpPhase,        // phase_psi, rad
  ActuationDetune,  // epsilon: omega_a = omega0*(1+eps), omega_p = 2*omega_a
  FrequencyRatio,   // r: omega_p = r*omega_a
  Delta,            // pump depth
  QRequirement      // Q values; solves required delta for a target gain
};

enum class RowStatus { Settled, Unstable, MaxPeriodsReached, Failed };

inline const char* to_string(RowStatus s) noexcept {
  switch (s) {
    case RowStatus::Settled: return "settled";
    case RowStatus::Unstable: return "unstable";
    case RowStatus::MaxPeriodsReached: return "max_periods";
    case RowStatus::Failed: return "failed";
  }
  return "unknown";
}

inline RowStatus to_row_status(RunStatus s) noexcept {
  switch (s) {
    case RunStatus::Settled: return RowStatus::Settled;
    case RunStatus::Unstable: return RowStatus::Unstable;
    case RunStatus::MaxPeriodsReached: return RowStatus::MaxPeriodsReached;
  }
  return RowStatus::Failed;
}

struct SweepSpec {
  MathieuSystem base{};
  SweepAxis axis = SweepAxis::DrivePhase;
  std::vector<double> values;   // axis points; any order, evaluated independently
  double target_gain = 10.0;    // QRequirement only
  IntegratorConfig integrator{};
  double settle_tol = 1e-4;
  int window_periods = 50;

  void validate() const {
    base.validate();
    integrator.validate();
    detail::require(!values.empty(), "SweepSpec: values must be non-empty");
    for (double v : values)
      detail::require(std::isfinite(v), "SweepSpec: values must be finite");
    detail::require(std::isfinite(settle_tol) && settle_tol > 0.0,
                    "SweepSpec: settle_tol must be positive");
    detail::require(window_periods >= 10, "SweepSpec: window_periods must be >= 10");
  }
};

/// One figure-style curve. Every input value produces exactly one row, error
/// rows included; rows depend only on their own axis value, so evaluation
/// order cannot change any number.
struct SweepResult {
  SweepAxis axis{};
  std::vector<double> values;
  std::vector<double> gains;       // NaN where not settled
  std::vector<double> amplitudes;  // settled (or best-effort) pumped amplitude
  std::vector<RowStatus> statuses;
  // FrequencyRatio sweeps only: beat in cycles per drive period.
  std::vector<std::optional<double>> beat_frequencies;
  // QRequirement sweeps only: solved and closed-form pump depths.
  std::vector<double> deltas;
  std::vector<double> oracle_deltas;
};

namespace detail {

inline double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

inline void push_gain_row(SweepResult& out, const GainResult& g) {
  out.gains.push_back(g.gain);
  out.amplitudes.push_back(g.pumped_amp);
  out.statuses.push_back(to_row_status(g.status));
}

}  // namespace detail

// ===== phase / detune / delta sweeps =====

/// Gain versus drive phase (axis DrivePhase) or pump phase (axis PumpPhase),
/// all else fixed at the base system.
inline SweepResult sweep_phase(const SweepSpec& spec) {
  spec.validate();
  detail::require(spec.axis == SweepAxis::DrivePhase || spec.axis == SweepAxis::PumpPhase,
                  "sweep_phase: axis must be DrivePhase or PumpPhase");
  SweepResult out;
  out.axis = spec.axis;
  out.values = spec.values;
  for (double v : spec.values) {
    MathieuSystem sys = spec.base;
    (spec.axis == SweepAxis::DrivePhase ? sys.drive.phase_phi : sys.pump.phase_psi) = v;
    detail::push_gain_row(
        out, gain(sys, spec.integrator, spec.settle_tol, spec.window_periods));
  }
  return out;
}

/// Gain versus actuation detune epsilon, with omega_a = omega0*(1+eps) and
/// the pump held at exactly twice the actuation frequency.
inline SweepResult sweep_detune(const SweepSpec& spec) {
  spec.validate();
  detail::require(spec.axis == SweepAxis::ActuationDetune,
                  "sweep_detune: axis must be ActuationDetune");
  for (double v : spec.values)
    detail::require(v > -1.0, "sweep_detune: epsilon must keep omega_a positive");
  SweepResult out;
  out.axis = spec.axis;
  out.values = spec.values;
  for (double eps : spec.values) {
    MathieuSystem sys = spec.base;
    sys.drive.omega_a = spec.base.resonator.omega0 * (1.0 + eps);
    sys.pump.omega_p = 2.0 * sys.drive.omega_a;
    detail::push_gain_row(
        out, gain(sys, spec.integrator, spec.settle_tol, spec.window_periods));
  }
  return out;
}

/// Gain versus pump depth delta.
inline SweepResult sweep_delta(const SweepSpec& spec) {
  spec.validate();
  detail::require(spec.axis == SweepAxis::Delta, "sweep_delta: axis must be Delta");
  for (double v : spec.values)
    detail::require(v >= 0.0 && v < 1.0, "sweep_delta: delta values must lie in [0, 1)");
  SweepResult out;
  out.axis = spec.axis;
  out.values = spec.values;
  for (double d : spec.values) {
    MathieuSystem sys = spec.base;
    sys.pump.delta = d;
    detail::push_gain_row(
        out, gain(sys, spec.integrator, spec.settle_tol, spec.window_periods));
  }
  return out;
}

// ===== frequency-ratio sweep =====

/// Gain and beat frequency versus the pump-to-drive frequency ratio r
/// (omega_p = r*omega_a). Away from r = 2 the response envelope beats, so
/// "gain" is the time average of the settled envelope over the measurement
/// span, divided by the unpumped settled amplitude; the beat is reported
/// separately in cycles per drive period. Each point settles over a fixed
/// horizon of several worst-case time constants, then measures over at least
/// max(4000 drive periods, 6 beat cycles).
inline SweepResult sweep_ratio(const SweepSpec& spec) {
  spec.validate();
  detail::require(spec.axis == SweepAxis::FrequencyRatio,
                  "sweep_ratio: axis must be FrequencyRatio");
  for (double v : spec.values)
    detail::require(v > 0.0, "sweep_ratio: ratio must be positive");

  SweepResult out;
  out.axis = spec.axis;
  out.values = spec.values;

  MathieuSystem quiet = spec.base;
  quiet.pump.delta = 0.0;
  const SteadyStateResult unpumped =
      run_to_steady_state(quiet, spec.integrator, spec.settle_tol, spec.window_periods);

  const double w0 = spec.base.resonator.omega0;
  const double wa = spec.base.drive.omega_a;
  const double period = 2.0 * kPi / wa;
  const double margin =
      std::min(0.95, 0.5 * spec.base.pump.delta * spec.base.resonator.q_factor);
  const double tau = 2.0 * spec.base.resonator.q_factor / (w0 * (1.0 - margin));
  const std::int64_t settle_periods = std::max<std::int64_t>(
      2000, static_cast<std::int64_t>(std::ceil(9.0 * tau / period)));
  const int demod_window = 10;

  for (double r : spec.values) {
    MathieuSystem sys = spec.base;
    sys.pump.omega_p = r * sys.drive.omega_a;
    const double beat_per_period_est = std::abs(r - 2.0);
    std::int64_t measure_periods = 4000;
    if (beat_per_period_est > 1e-9)
      measure_periods = std::max<std::int64_t>(
          measure_periods,
          static_cast<std::int64_t>(std::ceil(6.0 / beat_per_period_est)));
    measure_periods = std::min<std::int64_t>(measure_periods, 40'000);

    try {
      const int spp = spec.integrator.steps_per_drive_period;
      FlowResult settle = integrate_flow(
          sys, spp, 0.0, spec.integrator.initial_state,
          settle_periods * static_cast<std::int64_t>(spp), false);
      FlowResult measured = integrate_flow(sys, spp, settle.final_time,
                                           settle.final_state,
                                           measure_periods * static_cast<std::int64_t>(spp),
                                           true);
      const EnvelopeSeries env = demodulate(measured.series, wa, demod_window);
      double mean = 0.0;
      for (double a : env.amplitude) mean += a;
      mean /= static_cast<double>(env.amplitude.size());
      out.amplitudes.push_back(mean);
      out.gains.push_back(unpumped.amplitude > 0.0 ? mean / unpumped.amplitude
                                                   : detail::nan_value());
      out.statuses.push_back(unpumped.status == RunStatus::Settled
                                 ? RowStatus::Settled
                                 : to_row_status(unpumped.status));
      std::optional<double> beat;
      try {
        beat = beat_frequency(env);
        if (beat) beat = *beat * period;  // cycles per unit time -> per drive period
      } catch (const NotPeriodic&) {
        beat = std::nullopt;
      }
      out.beat_frequencies.push_back(beat);
    } catch (const UnboundedGrowth&) {
      out.amplitudes.push_back(detail::nan_value());
      out.gains.push_back(detail::nan_value());
      out.statuses.push_back(RowStatus::Unstable);
      out.beat_frequencies.push_back(std::nullopt);
    }
  }
  return out;
}

// ===== required-delta curve =====

/// Per Q, the pump depth at which the simulated best-quadrature gain reaches
/// spec.target_gain, found by bisection against the simulator with the
/// closed-form required_delta as the first midpoint. Brackets stay below the
/// parametric threshold 2/Q; rows that cannot bracket the target are marked
/// Failed. Tolerance: 0.5% relative on delta.
inline SweepResult required_delta_curve(const SweepSpec& spec) {
  spec.validate();
  detail::require(spec.axis == SweepAxis::QRequirement,
                  "required_delta_curve: axis must be QRequirement");
  detail::require(std::isfinite(spec.target_gain) && spec.target_gain >= 1.0,
                  "required_delta_curve: target_gain must be >= 1");
  for (double q : spec.values)
    detail::require(q > 0.0, "required_delta_curve: Q values must be positive");

  SweepResult out;
  out.axis = spec.axis;
  out.values = spec.values;
  const double target = spec.target_gain;

  for (double q : spec.values) {
    MathieuSystem base = spec.base;
    base.resonator.q_factor = q;
    const double threshold = 2.0 / q;
    const double oracle = required_delta(q, target);
    out.oracle_deltas.push_back(oracle);

    // Measured gain, +inf for a run flagged unstable (depth far too high).
    const auto measure = [&](double delta) {
      MathieuSystem sys = base;
      sys.pump.delta = delta;
      const GainResult g =
          gain(sys, spec.integrator, spec.settle_tol, spec.window_periods);
      if (g.status == RunStatus::Unstable)
        return std::numeric_limits<double>::infinity();
      if (g.status == RunStatus::Settled) return g.gain;
      return g.unpumped_amp > 0.0 ? g.pumped_amp / g.unpumped_amp
                                  : std::numeric_limits<double>::infinity();
    };

    if (target <= 1.0) {
      out.deltas.push_back(0.0);
      out.gains.push_back(1.0);
      out.amplitudes.push_back(measure(0.0));
      out.statuses.push_back(RowStatus::Settled);
      continue;
    }

    double lo = 0.0;
    double hi = std::min(oracle, 0.999 * threshold);
    double g_hi = measure(hi);
    bool bracketed = g_hi >= target;
    for (int tries = 0; !bracketed && tries < 60; ++tries) {
      lo = hi;
      const double head = threshold - hi;
      if (head <= 1e-12 * threshold) break;
      hi += 0.5 * head;
      g_hi = measure(hi);
      bracketed = g_hi >= target;
    }
    if (!bracketed) {
      out.deltas.push_back(detail::nan_value());
      out.gains.push_back(detail::nan_value());
      out.amplitudes.push_back(detail::nan_value());
      out.statuses.push_back(RowStatus::Failed);
      continue;
    }
    while (hi - lo > 0.005 * 0.5 * (hi + lo)) {
      const double mid = 0.5 * (lo + hi);
      (measure(mid) >= target ? hi : lo) = mid;
    }
    const double solved = 0.5 * (lo + hi);
    MathieuSystem sys = base;
    sys.pump.delta = solved;
    const GainResult g =
        gain(sys, spec.integrator, spec.settle_tol, spec.window_periods);
    out.deltas.push_back(solved);
    out.gains.push_back(g.gain);
    out.amplitudes.push_back(g.pumped_amp);
    out.statuses.push_back(to_row_status(g.status));
  }
  return out;
}

}  // namespace paramp
