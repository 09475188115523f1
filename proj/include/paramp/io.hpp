#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "paramp/analysis.hpp"
#include "paramp/config.hpp"
#include "paramp/integrator.hpp"
#include "paramp/sweeps.hpp"

namespace paramp::io {

using ordered_json = nlohmann::ordered_json;

// ===== number formatting =====

/// Shortest round-trippable-enough decimal: %.12g, with "nan"/"inf"/"-inf"
/// spelled out. Used for every CSV cell so reruns are byte-identical.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

// ===== atomic file write =====

/// Writes via a sibling temp file and rename so readers never observe a
/// partial file. Throws std::runtime_error on any filesystem failure.
inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for write: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::runtime_error("rename failed: " + path.string());
  }
}

// ===== CSV =====

inline std::string series_csv(const TimeSeries& series) {
  std::string out = "t,z\n";
  for (std::size_t i = 0; i < series.t.size(); ++i) {
    out += format_double(series.t[i]);
    out += ',';
    out += format_double(series.z[i]);
    out += '\n';
  }
  return out;
}

inline std::string envelope_csv(const EnvelopeSeries& env) {
  std::string out = "t,i,q,amplitude\n";
  for (std::size_t i = 0; i < env.t.size(); ++i) {
    out += format_double(env.t[i]);
    out += ',';
    out += format_double(env.i_comp[i]);
    out += ',';
    out += format_double(env.q_comp[i]);
    out += ',';
    out += format_double(env.amplitude[i]);
    out += '\n';
  }
  return out;
}

namespace iodetail {

inline const char* axis_column(SweepAxis a) {
  switch (a) {
    case SweepAxis::DrivePhase: return "drive_phase_deg";
    case SweepAxis::PumpPhase: return "pump_phase_deg";
    case SweepAxis::ActuationDetune: return "detune";
    case SweepAxis::FrequencyRatio: return "ratio";
    case SweepAxis::Delta: return "delta";
    case SweepAxis::QRequirement: return "q";
  }
  return "value";
}

inline bool is_phase_axis(SweepAxis a) {
  return a == SweepAxis::DrivePhase || a == SweepAxis::PumpPhase;
}

/// Axis value as written to CSV/JSON: phase axes in degrees, others as-is.
inline double axis_echo(SweepAxis a, double v) {
  return is_phase_axis(a) ? v * 180.0 / kPi : v;
}

}  // namespace iodetail

/// One row per input value. Phase axes are echoed in degrees. Ratio sweeps
/// append a beat_frequency column (cycles per drive period, empty when the
/// envelope is flat); Q-requirement sweeps append delta and oracle_delta.
inline std::string sweep_csv(const SweepResult& result) {
  const bool ratio = result.axis == SweepAxis::FrequencyRatio;
  const bool qcurve = result.axis == SweepAxis::QRequirement;
  std::string out = iodetail::axis_column(result.axis);
  out += ",gain,amplitude,status";
  if (ratio) out += ",beat_frequency";
  if (qcurve) out += ",delta,oracle_delta";
  out += '\n';
  for (std::size_t i = 0; i < result.values.size(); ++i) {
    out += format_double(iodetail::axis_echo(result.axis, result.values[i]));
    out += ',';
    out += format_double(result.gains[i]);
    out += ',';
    out += format_double(result.amplitudes[i]);
    out += ',';
    out += to_string(result.statuses[i]);
    if (ratio) {
      out += ',';
      if (result.beat_frequencies[i]) out += format_double(*result.beat_frequencies[i]);
    }
    if (qcurve) {
      out += ',';
      out += format_double(result.deltas[i]);
      out += ',';
      out += format_double(result.oracle_deltas[i]);
    }
    out += '\n';
  }
  return out;
}

// ===== JSON =====

inline ordered_json system_to_json(const MathieuSystem& sys) {
  ordered_json j;
  j["q_factor"] = sys.resonator.q_factor;
  j["omega0"] = sys.resonator.omega0;
  j["accel_amplitude"] = sys.drive.accel_amplitude;
  j["omega_a"] = sys.drive.omega_a;
  j["phase_phi_deg"] = sys.drive.phase_phi * 180.0 / kPi;
  j["delta"] = sys.pump.delta;
  j["omega_p"] = sys.pump.omega_p;
  j["phase_psi_deg"] = sys.pump.phase_psi * 180.0 / kPi;
  j["beta"] = sys.duffing.beta;
  return j;
}

inline ordered_json sweep_to_json(const SweepResult& result) {
  const bool ratio = result.axis == SweepAxis::FrequencyRatio;
  const bool qcurve = result.axis == SweepAxis::QRequirement;
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < result.values.size(); ++i) {
    ordered_json row;
    row[iodetail::axis_column(result.axis)] =
        iodetail::axis_echo(result.axis, result.values[i]);
    row["gain"] = result.gains[i];
    row["amplitude"] = result.amplitudes[i];
    row["status"] = to_string(result.statuses[i]);
    if (ratio) {
      if (result.beat_frequencies[i])
        row["beat_frequency"] = *result.beat_frequencies[i];
      else
        row["beat_frequency"] = nullptr;
    }
    if (qcurve) {
      row["delta"] = result.deltas[i];
      row["oracle_delta"] = result.oracle_deltas[i];
    }
    rows.push_back(row);
  }
  ordered_json j;
  j["axis"] = cfgdetail::axis_to_string(result.axis);
  j["rows"] = rows;
  return j;
}

// ===== SVG =====

/// Minimal standalone plot: one polyline of gain versus axis value on a
/// white 800x520 canvas with labeled min/max ticks. Delta sweeps use a
/// log gain scale. Rows without a finite gain are skipped.
inline std::string sweep_svg(const SweepResult& result) {
  const double width = 800.0, height = 520.0;
  const double ml = 70.0, mr = 25.0, mt = 30.0, mb = 50.0;
  const bool logy = result.axis == SweepAxis::Delta;

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < result.values.size(); ++i) {
    const double g = result.gains[i];
    if (!std::isfinite(g)) continue;
    if (logy && !(g > 0.0)) continue;
    xs.push_back(iodetail::axis_echo(result.axis, result.values[i]));
    ys.push_back(logy ? std::log10(g) : g);
  }

  double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
  if (!xs.empty()) {
    x_lo = x_hi = xs[0];
    y_lo = y_hi = ys[0];
    for (std::size_t i = 1; i < xs.size(); ++i) {
      x_lo = std::min(x_lo, xs[i]);
      x_hi = std::max(x_hi, xs[i]);
      y_lo = std::min(y_lo, ys[i]);
      y_hi = std::max(y_hi, ys[i]);
    }
  }
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;
  if (y_hi <= y_lo) y_hi = y_lo + 1.0;

  const auto px = [&](double x) {
    return ml + (x - x_lo) / (x_hi - x_lo) * (width - ml - mr);
  };
  const auto py = [&](double y) {
    return height - mb - (y - y_lo) / (y_hi - y_lo) * (height - mt - mb);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"520\" "
         "viewBox=\"0 0 800 520\">\n";
  svg += "<rect width=\"800\" height=\"520\" fill=\"white\"/>\n";
  svg += "<g stroke=\"black\" stroke-width=\"1\">\n";
  svg += "<line x1=\"" + format_double(ml) + "\" y1=\"" + format_double(height - mb) +
         "\" x2=\"" + format_double(width - mr) + "\" y2=\"" +
         format_double(height - mb) + "\"/>\n";
  svg += "<line x1=\"" + format_double(ml) + "\" y1=\"" + format_double(mt) +
         "\" x2=\"" + format_double(ml) + "\" y2=\"" + format_double(height - mb) +
         "\"/>\n";
  svg += "</g>\n";

  const auto tick_label = [&](double v) {
    return logy ? format_double(std::pow(10.0, v)) : format_double(v);
  };
  svg += "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"black\">\n";
  svg += "<text x=\"" + format_double(ml) + "\" y=\"" + format_double(height - mb + 18) +
         "\" text-anchor=\"middle\">" + format_double(x_lo) + "</text>\n";
  svg += "<text x=\"" + format_double(width - mr) + "\" y=\"" +
         format_double(height - mb + 18) + "\" text-anchor=\"middle\">" +
         format_double(x_hi) + "</text>\n";
  svg += "<text x=\"" + format_double(ml - 8) + "\" y=\"" +
         format_double(height - mb + 4) + "\" text-anchor=\"end\">" + tick_label(y_lo) +
         "</text>\n";
  svg += "<text x=\"" + format_double(ml - 8) + "\" y=\"" + format_double(mt + 4) +
         "\" text-anchor=\"end\">" + tick_label(y_hi) + "</text>\n";
  svg += "<text x=\"" + format_double(0.5 * width) + "\" y=\"" +
         format_double(height - 12) + "\" text-anchor=\"middle\">" +
         iodetail::axis_column(result.axis) + "</text>\n";
  svg += "<text x=\"16\" y=\"" + format_double(0.5 * height) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         format_double(0.5 * height) + ")\">" + (logy ? "gain (log)" : "gain") +
         "</text>\n";
  svg += "</g>\n";

  if (xs.size() >= 2) {
    svg += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) svg += ' ';
      svg += format_double(px(xs[i])) + "," + format_double(py(ys[i]));
    }
    svg += "\"/>\n";
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    svg += "<circle cx=\"" + format_double(px(xs[i])) + "\" cy=\"" +
           format_double(py(ys[i])) + "\" r=\"2.5\" fill=\"#1f77b4\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace paramp::io
