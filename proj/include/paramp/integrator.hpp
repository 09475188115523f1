#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "paramp/errors.hpp"
#include "paramp/mathieu.hpp"

namespace paramp {

// ===== configuration and results =====

struct IntegratorConfig {
  int steps_per_drive_period = 64;
  std::int64_t max_periods = 1'000'000;
  State initial_state{};

  void validate() const {
    detail::require(steps_per_drive_period >= 16,
                    "IntegratorConfig: steps_per_drive_period must be >= 16");
    detail::require(max_periods >= 1, "IntegratorConfig: max_periods must be >= 1");
    detail::require(std::isfinite(initial_state.z) && std::isfinite(initial_state.zdot),
                    "IntegratorConfig: initial_state must be finite");
  }
};

/// |z| beyond this aborts integration as unbounded growth.
inline constexpr double kOverflowGuard = 1e12;

/// Sampled trajectory; sample_rate is samples per drive period.
struct TimeSeries {
  std::vector<double> t;
  std::vector<double> z;
  double sample_rate = 0.0;
};

/// Integration exceeded the overflow guard; carries whatever was recorded.
class UnboundedGrowth : public std::runtime_error {
 public:
  UnboundedGrowth(const std::string& msg, TimeSeries partial)
      : std::runtime_error(msg), partial_(std::move(partial)) {}
  const TimeSeries& partial_series() const noexcept { return partial_; }

 private:
  TimeSeries partial_;
};

enum class RunStatus { Settled, Unstable, MaxPeriodsReached };

inline const char* to_string(RunStatus s) noexcept {
  switch (s) {
    case RunStatus::Settled: return "settled";
    case RunStatus::Unstable: return "unstable";
    case RunStatus::MaxPeriodsReached: return "max_periods";
  }
  return "unknown";
}

struct SteadyStateResult {
  double amplitude = 0.0;  // last windowed envelope
  std::int64_t periods_used = 0;
  RunStatus status = RunStatus::MaxPeriodsReached;
  double peak_amplitude = 0.0;  // largest windowed envelope seen (transient peak)
};

// ===== stepping =====

namespace detail {

/// One classical RK4 step of size h from time t.
inline State rk4_step(const MathieuSystem& sys, double t, double h, State x) noexcept {
  const StateDerivative k1 = rhs(sys, t, x);
  const StateDerivative k2 =
      rhs(sys, t + 0.5 * h, State{x.z + 0.5 * h * k1.dz, x.zdot + 0.5 * h * k1.dzdot});
  const StateDerivative k3 =
      rhs(sys, t + 0.5 * h, State{x.z + 0.5 * h * k2.dz, x.zdot + 0.5 * h * k2.dzdot});
  const StateDerivative k4 =
      rhs(sys, t + h, State{x.z + h * k3.dz, x.zdot + h * k3.dzdot});
  return State{x.z + h / 6.0 * (k1.dz + 2.0 * k2.dz + 2.0 * k3.dz + k4.dz),
               x.zdot + h / 6.0 * (k1.dzdot + 2.0 * k2.dzdot + 2.0 * k3.dzdot + k4.dzdot)};
}

inline bool within_guard(const State& x) noexcept {
  // NaN fails the comparison and is treated as blown up.
  return std::abs(x.z) < kOverflowGuard && std::abs(x.zdot) < kOverflowGuard * 10.0;
}

}  // namespace detail

struct FlowResult {
  TimeSeries series;
  State final_state{};
  double final_time = 0.0;
};

/// Advances state0 from t0 over n_steps of size h = drive period /
/// steps_per_period, recording every sample including the initial one.
/// Sample k sits at exactly t0 + k*h (no accumulated time drift).
/// Throws UnboundedGrowth past the overflow guard, carrying the partial record.
inline FlowResult integrate_flow(const MathieuSystem& sys, int steps_per_period,
                                 double t0, State state0, std::int64_t n_steps,
                                 bool record = true) {
  sys.validate();
  detail::require(steps_per_period >= 16,
                  "integrate_flow: steps_per_period must be >= 16");
  detail::require(n_steps >= 0, "integrate_flow: n_steps must be >= 0");
  const double h = (2.0 * kPi / sys.drive.omega_a) / steps_per_period;
  FlowResult out;
  out.series.sample_rate = steps_per_period;
  if (record) {
    out.series.t.reserve(static_cast<std::size_t>(n_steps) + 1);
    out.series.z.reserve(static_cast<std::size_t>(n_steps) + 1);
  }
  State x = state0;
  for (std::int64_t k = 0; k < n_steps; ++k) {
    const double t = t0 + static_cast<double>(k) * h;
    if (record) {
      out.series.t.push_back(t);
      out.series.z.push_back(x.z);
    }
    x = detail::rk4_step(sys, t, h, x);
    if (!detail::within_guard(x))
      throw UnboundedGrowth("integrate_flow: displacement exceeded overflow guard",
                            std::move(out.series));
  }
  out.final_time = t0 + static_cast<double>(n_steps) * h;
  if (record) {
    out.series.t.push_back(out.final_time);
    out.series.z.push_back(x.z);
  }
  out.final_state = x;
  return out;
}

/// Fixed-step RK4 trajectory from cfg.initial_state at t = 0 to approximately
/// t_end (rounded to a whole number of steps). Samples every step.
inline TimeSeries integrate(const MathieuSystem& sys, const IntegratorConfig& cfg,
                            double t_end) {
  cfg.validate();
  detail::require(std::isfinite(t_end) && t_end > 0.0,
                  "integrate: t_end must be positive");
  const double h = (2.0 * kPi / sys.drive.omega_a) / cfg.steps_per_drive_period;
  const std::int64_t n_steps = std::llround(t_end / h);
  detail::require(n_steps >= 1, "integrate: t_end shorter than one step");
  return integrate_flow(sys, cfg.steps_per_drive_period, 0.0, cfg.initial_state,
                        n_steps, true)
      .series;
}

// ===== settling =====

namespace detail {

/// Least-squares slope of y against uniformly spaced x with spacing dx.
inline double uniform_slope(const double* y, std::size_t count, double dx) {
  const double n = static_cast<double>(count);
  double sy = 0.0, sxy = 0.0;
  for (std::size_t j = 0; j < count; ++j) {
    sy += y[j];
    sxy += static_cast<double>(j) * y[j];
  }
  const double sx = n * (n - 1.0) / 2.0;
  const double sxx = n * (n - 1.0) * (2.0 * n - 1.0) / 6.0;
  const double denom = n * sxx - sx * sx;
  return (n * sxy - sx * sy) / (denom * dx);
}

}  // namespace detail

/// Integrates from rest (or cfg.initial_state) until the windowed envelope
/// settles, is flagged unstable, or max_periods elapse. The envelope is the
/// quadrature-demodulated amplitude at omega_a over consecutive
/// window_periods-long windows.
///
/// Instability needs one of:
///   - the overflow guard tripping, or
///   - an envelope that has grown monotonically for the last 5 windows, with
///     fitted log-slope above 1e-3*omega0/(2pi), without decelerating: the
///     latest increment must be at least 99.5% of the increment at the
///     half-elapsed window. The deceleration test separates exponential or
///     secular growth from an ordinary resonance ring-up, whose increments
///     shrink geometrically. Runs within ~0.6% of the parametric threshold
///     settle too slowly to classify either way at the default window size;
///     they end as MaxPeriodsReached (or a late Unstable) rather than a
///     confident answer, mirroring the physical critical slowing down.
inline SteadyStateResult run_to_steady_state(const MathieuSystem& sys,
                                             const IntegratorConfig& cfg,
                                             double settle_tol = 1e-4,
                                             int window_periods = 50) {
  sys.validate();
  cfg.validate();
  detail::require(std::isfinite(settle_tol) && settle_tol > 0.0,
                  "run_to_steady_state: settle_tol must be positive");
  detail::require(window_periods >= 10,
                  "run_to_steady_state: window_periods must be >= 10");

  const double wa = sys.drive.omega_a;
  const int n = cfg.steps_per_drive_period;
  const double h = (2.0 * kPi / wa) / n;
  const std::int64_t wsteps = static_cast<std::int64_t>(window_periods) * n;
  const double window_dt = static_cast<double>(wsteps) * h;
  const double growth_threshold = 1e-3 * sys.resonator.omega0 / (2.0 * kPi);

  State x = cfg.initial_state;
  std::int64_t k = 0;  // global step index; t = k*h exactly
  std::vector<double> env;
  env.reserve(256);
  SteadyStateResult out;

  const std::int64_t max_windows = cfg.max_periods / window_periods;
  for (std::int64_t w = 0; w < max_windows; ++w) {
    double ic = 0.0, qc = 0.0;
    bool blew_up = false;
    for (std::int64_t i = 0; i < wsteps; ++i) {
      const double t = static_cast<double>(k + i) * h;
      ic += x.z * std::cos(wa * t);
      qc -= x.z * std::sin(wa * t);
      x = detail::rk4_step(sys, t, h, x);
      if (!detail::within_guard(x)) {
        blew_up = true;
        break;
      }
    }
    out.periods_used = (w + 1) * static_cast<std::int64_t>(window_periods);
    if (blew_up) {
      out.status = RunStatus::Unstable;
      out.amplitude = env.empty() ? 0.0 : env.back();
      out.peak_amplitude = std::max(out.peak_amplitude, out.amplitude);
      return out;
    }
    k += wsteps;
    const double e = 2.0 * std::hypot(ic, qc) / static_cast<double>(wsteps);
    const bool have_prev = !env.empty();
    const double prev = have_prev ? env.back() : 0.0;
    env.push_back(e);
    out.amplitude = e;
    out.peak_amplitude = std::max(out.peak_amplitude, e);

    if (have_prev) {
      // Relative settling; the absolute branch catches free decay toward zero,
      // where the relative change per window is constant.
      if (std::abs(e - prev) <= settle_tol * std::max(e, 1e-300) ||
          (e <= prev && e <= settle_tol * out.peak_amplitude)) {
        out.status = RunStatus::Settled;
        return out;
      }
    }

    const std::size_t m = env.size();
    if (m >= 10) {
      bool growing = env[m - 5] > 0.0;
      for (std::size_t j = m - 4; growing && j < m; ++j)
        growing = env[j] > env[j - 1];
      if (growing) {
        std::array<double, 5> logs{};
        for (std::size_t j = 0; j < 5; ++j) logs[j] = std::log(env[m - 5 + j]);
        const double slope = detail::uniform_slope(logs.data(), 5, window_dt);
        const std::size_t half = m / 2;
        const double d_now = env[m - 1] - env[m - 2];
        const double d_half = env[half] - env[half - 1];
        if (slope > growth_threshold && d_now >= 0.995 * d_half) {
          out.status = RunStatus::Unstable;
          return out;
        }
      }
    }
  }
  out.status = RunStatus::MaxPeriodsReached;
  return out;
}

// ===== Floquet analysis =====

/// State-transition matrix of the unforced system over one pump period and
/// its eigenvalues (Floquet multipliers).
struct MonodromyResult {
  std::array<std::array<double, 2>, 2> matrix{};  // [row][col]
  std::array<std::complex<double>, 2> multipliers{};
  double max_abs = 0.0;

  double determinant() const noexcept {
    return matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
  }
};

/// Integrates unit initial conditions (1,0) and (0,1) of the homogeneous
/// system over exactly one pump period T_p = 2pi/omega_p; the end states form
/// the matrix columns. Internal resolution is fixed at 4096 RK4 steps per
/// pump period, far inside the 1e-6 determinant contract.
inline MonodromyResult monodromy(const ResonatorParams& resonator,
                                 const PumpSpec& pump) {
  validate(resonator);
  validate(pump);
  MathieuSystem sys{resonator, DriveSpec{0.0, 1.0, 0.0}, pump, DuffingSpec{}};
  const double tp = 2.0 * kPi / pump.omega_p;
  const int steps = 4096;
  const double h = tp / steps;
  std::array<State, 2> cols{State{1.0, 0.0}, State{0.0, 1.0}};
  for (State& c : cols) {
    for (int i = 0; i < steps; ++i)
      c = detail::rk4_step(sys, static_cast<double>(i) * h, h, c);
  }
  MonodromyResult out;
  out.matrix = {{{cols[0].z, cols[1].z}, {cols[0].zdot, cols[1].zdot}}};
  const double tr = out.matrix[0][0] + out.matrix[1][1];
  const double det = out.determinant();
  const std::complex<double> disc =
      std::sqrt(std::complex<double>(tr * tr / 4.0 - det, 0.0));
  out.multipliers = {tr / 2.0 + disc, tr / 2.0 - disc};
  out.max_abs = std::max(std::abs(out.multipliers[0]), std::abs(out.multipliers[1]));
  return out;
}

/// Smallest pump depth with a unit-magnitude Floquet multiplier, by bisection
/// on [0, 0.5] to 1e-6 absolute. Throws NoThresholdFound when the bracket
/// does not straddle the threshold (e.g. a pump far from any resonance).
inline double critical_delta(const ResonatorParams& resonator, double omega_p) {
  detail::require(std::isfinite(omega_p) && omega_p > 0.0,
                  "critical_delta: omega_p must be positive");
  const auto excess = [&](double delta) {
    return monodromy(resonator, PumpSpec{delta, omega_p, 0.0}).max_abs - 1.0;
  };
  double lo = 0.0, hi = 0.5;
  if (!(excess(lo) < 0.0) || !(excess(hi) > 0.0))
    throw NoThresholdFound("critical_delta: no threshold crossing in [0, 0.5]");
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace paramp
