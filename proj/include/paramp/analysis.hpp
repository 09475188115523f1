#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "paramp/errors.hpp"
#include "paramp/integrator.hpp"

namespace paramp {

// ===== envelope extraction =====

/// Demodulated I/Q envelope; t holds window-center times.
struct EnvelopeSeries {
  std::vector<double> t;
  std::vector<double> i_comp;
  std::vector<double> q_comp;
  std::vector<double> amplitude;  // sqrt(I^2 + Q^2)
};

/// Lock-in style quadrature demodulation: I and Q are 2x the mean of
/// z*cos(omega_a*t) and z*(-sin(omega_a*t)) over sliding windows spanning
/// window_periods whole drive periods, hopping one period at a time. With an
/// integer number of samples per period the quadrature sums are exactly
/// orthogonal, so a pure tone at omega_a round-trips to machine precision.
inline EnvelopeSeries demodulate(const TimeSeries& series, double omega_a,
                                 int window_periods) {
  detail::require(std::isfinite(omega_a) && omega_a > 0.0,
                  "demodulate: omega_a must be positive");
  detail::require(window_periods >= 1, "demodulate: window_periods must be >= 1");
  detail::require(series.t.size() == series.z.size(),
                  "demodulate: series t/z length mismatch");
  const double spp = series.sample_rate;
  detail::require(spp > 0.0 && std::abs(spp - std::round(spp)) < 1e-9,
                  "demodulate: sample_rate must be a whole number of samples per period");
  const std::size_t npp = static_cast<std::size_t>(std::llround(spp));
  const std::size_t window = static_cast<std::size_t>(window_periods) * npp;
  const std::size_t n = series.z.size();
  if (n < window + 1)
    throw InsufficientData("demodulate: series shorter than one window");

  // Prefix sums make each window an O(1) difference.
  std::vector<double> pc(n + 1, 0.0), ps(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double phase = omega_a * series.t[i];
    pc[i + 1] = pc[i] + series.z[i] * std::cos(phase);
    ps[i + 1] = ps[i] - series.z[i] * std::sin(phase);
  }

  EnvelopeSeries env;
  const std::size_t count = (n - window) / npp + 1;
  env.t.reserve(count);
  env.i_comp.reserve(count);
  env.q_comp.reserve(count);
  env.amplitude.reserve(count);
  const double half_span = 0.5 * static_cast<double>(window) *
                           (series.t.size() > 1 ? series.t[1] - series.t[0] : 0.0);
  for (std::size_t start = 0; start + window < n + 1; start += npp) {
    const double i_val = 2.0 * (pc[start + window] - pc[start]) / window;
    const double q_val = 2.0 * (ps[start + window] - ps[start]) / window;
    env.t.push_back(series.t[start] + half_span);
    env.i_comp.push_back(i_val);
    env.q_comp.push_back(q_val);
    env.amplitude.push_back(std::hypot(i_val, q_val));
  }
  return env;
}

// ===== gain =====

struct GainResult {
  double gain = 1.0;  // NaN when either run failed to settle
  double pumped_amp = 0.0;
  double unpumped_amp = 0.0;
  RunStatus status = RunStatus::Settled;
  double transient_peak = 0.0;  // peak envelope of the pumped run
};

/// Ratio of settled envelope amplitudes with the pump on versus off, all else
/// identical. With delta already 0 the two runs coincide and the gain is
/// exactly 1. A non-settled run leaves gain = NaN and reports the worse of
/// the two statuses.
inline GainResult gain(const MathieuSystem& sys, const IntegratorConfig& cfg,
                       double settle_tol = 1e-4, int window_periods = 50) {
  detail::require(sys.drive.accel_amplitude > 0.0,
                  "gain: drive amplitude must be positive");
  const SteadyStateResult pumped =
      run_to_steady_state(sys, cfg, settle_tol, window_periods);
  MathieuSystem quiet = sys;
  quiet.pump.delta = 0.0;
  const SteadyStateResult unpumped =
      run_to_steady_state(quiet, cfg, settle_tol, window_periods);

  GainResult out;
  out.pumped_amp = pumped.amplitude;
  out.unpumped_amp = unpumped.amplitude;
  out.transient_peak = pumped.peak_amplitude;
  const auto worse = [](RunStatus a, RunStatus b) {
    const auto rank = [](RunStatus s) {
      return s == RunStatus::Unstable ? 2 : (s == RunStatus::MaxPeriodsReached ? 1 : 0);
    };
    return rank(a) >= rank(b) ? a : b;
  };
  out.status = worse(pumped.status, unpumped.status);
  if (out.status == RunStatus::Settled && unpumped.amplitude > 0.0)
    out.gain = pumped.amplitude / unpumped.amplitude;
  else
    out.gain = std::numeric_limits<double>::quiet_NaN();
  return out;
}

// ===== beat detection =====

namespace detail {

/// Largest-magnitude DFT bin of a Hann-windowed signal with parabolic
/// interpolation on the log magnitude; returns cycles per unit time.
inline double dft_peak_frequency(const std::vector<double>& x, double dt) {
  const std::size_t n = x.size();
  const double mean = [&] {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(n);
  }();
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double hann =
        0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) /
                              static_cast<double>(n - 1)));
    w[i] = (x[i] - mean) * hann;
  }
  const std::size_t half = n / 2;
  std::vector<double> mag(half + 1, 0.0);
  double best = 0.0;
  std::size_t best_j = 1;
  for (std::size_t j = 1; j <= half; ++j) {
    double re = 0.0, im = 0.0;
    const double step = -2.0 * kPi * static_cast<double>(j) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double ph = step * static_cast<double>(i);
      re += w[i] * std::cos(ph);
      im += w[i] * std::sin(ph);
    }
    mag[j] = std::hypot(re, im);
    if (mag[j] > best) {
      best = mag[j];
      best_j = j;
    }
  }
  double offset = 0.0;
  if (best_j > 1 && best_j < half && mag[best_j - 1] > 0.0 && mag[best_j + 1] > 0.0) {
    const double la = std::log(mag[best_j - 1]);
    const double lb = std::log(mag[best_j]);
    const double lc = std::log(mag[best_j + 1]);
    const double denom = la - 2.0 * lb + lc;
    if (denom < 0.0) offset = 0.5 * (la - lc) / denom;
  }
  return (static_cast<double>(best_j) + offset) /
         (static_cast<double>(n) * dt);
}

}  // namespace detail

/// Dominant modulation frequency of the envelope amplitude, in cycles per
/// unit time. Returns nullopt for an essentially flat envelope (modulation
/// depth < 1% of the mean); throws NotPeriodic when the modulation is there
/// but shows no autocorrelation peak above 0.5 (unsettled or aperiodic).
inline std::optional<double> beat_frequency(const EnvelopeSeries& envelope) {
  const std::vector<double>& amp = envelope.amplitude;
  if (amp.size() < 32 || envelope.t.size() != amp.size())
    throw InsufficientData("beat_frequency: need at least 32 envelope samples");

  double mean = 0.0, lo = amp[0], hi = amp[0];
  for (double v : amp) {
    mean += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  mean /= static_cast<double>(amp.size());
  if (!(mean > 0.0)) throw NotPeriodic("beat_frequency: empty envelope");
  if (0.5 * (hi - lo) < 0.01 * mean) return std::nullopt;

  // Decimate before the O(n^2) autocorrelation and DFT; the beat sits far
  // below the envelope sampling rate, so plain striding is alias-safe here.
  const std::size_t stride = std::max<std::size_t>(1, amp.size() / 4096);
  std::vector<double> x;
  x.reserve(amp.size() / stride + 1);
  for (std::size_t i = 0; i < amp.size(); i += stride) x.push_back(amp[i] - mean);
  const double dt = (envelope.t[1] - envelope.t[0]) * static_cast<double>(stride);
  const std::size_t n = x.size();

  double r0 = 0.0;
  for (double v : x) r0 += v * v;
  if (!(r0 > 0.0)) throw NotPeriodic("beat_frequency: flat detrended envelope");
  const auto corr = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += x[i] * x[i + lag];
    return s / r0;
  };
  std::size_t lag = 1;
  const std::size_t max_lag = n / 2;
  while (lag < max_lag && corr(lag) > 0.0) ++lag;  // leave the zero-lag lobe
  if (lag >= max_lag)
    throw NotPeriodic("beat_frequency: no envelope recurrence inside the series");
  double peak = 0.0;
  for (std::size_t l = lag; l <= max_lag; ++l) peak = std::max(peak, corr(l));
  if (peak <= 0.5)
    throw NotPeriodic("beat_frequency: autocorrelation peak below 0.5");

  return detail::dft_peak_frequency(x, dt);
}

// ===== growth rate =====

/// Least-squares slope of log envelope amplitude over the final half of the
/// series; positive for growth, -omega0/(2Q) for free decay. Throws
/// DegenerateFit when the envelope touches zero inside the fit range.
inline double growth_rate(const TimeSeries& series, double omega_a) {
  detail::require(std::isfinite(omega_a) && omega_a > 0.0,
                  "growth_rate: omega_a must be positive");
  if (series.t.size() < 2)
    throw InsufficientData("growth_rate: empty series");
  const double span = series.t.back() - series.t.front();
  const double period = 2.0 * kPi / omega_a;
  if (span < 100.0 * period - 1e-9 * period)
    throw InsufficientData("growth_rate: need at least 100 drive periods");

  const EnvelopeSeries env = demodulate(series, omega_a, 1);
  const double t_mid = series.t.front() + 0.5 * span;
  std::vector<double> ts, logs;
  for (std::size_t i = 0; i < env.t.size(); ++i) {
    if (env.t[i] < t_mid) continue;
    if (!(env.amplitude[i] > 0.0))
      throw DegenerateFit("growth_rate: envelope touches zero in the fit range");
    ts.push_back(env.t[i]);
    logs.push_back(std::log(env.amplitude[i]));
  }
  if (ts.size() < 8)
    throw InsufficientData("growth_rate: too few envelope windows in the fit range");

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    sx += ts[i];
    sy += logs[i];
    sxx += ts[i] * ts[i];
    sxy += ts[i] * logs[i];
  }
  const double denom = n * sxx - sx * sx;
  if (!(std::abs(denom) > 0.0))
    throw DegenerateFit("growth_rate: degenerate time axis");
  return (n * sxy - sx * sy) / denom;
}

}  // namespace paramp
