#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "paramp/beam.hpp"
#include "paramp/mathieu.hpp"
#include "paramp/sweeps.hpp"

namespace paramp {

/// Malformed, unknown, or out-of-range configuration input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ===== config model =====

struct SweepConfig {
  SweepAxis axis = SweepAxis::Delta;
  std::vector<double> values;  // degrees for phase axes, strictly increasing
  double target_gain = 10.0;
};

struct BeamConfig {
  beam::BeamSpec spec{};
  int n_elements = 64;
  beam::BoundaryCondition bc = beam::BoundaryCondition::ClampedClamped;
  beam::AxialLoadCase load{};
};

struct OutputConfig {
  std::string dir = ".";
};

/// Full run configuration. The bundled defaults describe a high-Q resonator
/// driven on resonance with the drive phase on the amplified quadrature and
/// a pump depth of 90% of threshold.
struct RunConfig {
  MathieuSystem system = [] {
    MathieuSystem s;
    s.resonator = ResonatorParams{1000.0, 1.0};
    s.drive = DriveSpec{1.0, 1.0, -0.25 * kPi};
    s.pump = PumpSpec{0.0018, 2.0, 0.0};
    s.duffing = DuffingSpec{0.0};
    return s;
  }();
  IntegratorConfig integrator{};
  double settle_tol = 1e-4;
  int window_periods = 50;
  std::optional<SweepConfig> sweep;
  std::optional<BeamConfig> beam_cfg;
  std::optional<beam::CombDriveSpec> comb;
  OutputConfig output{};
};

// ===== parsing =====

namespace cfgdetail {

using json = nlohmann::json;

inline void check_keys(const json& obj, const std::string& where,
                       std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError(where + ": unknown key \"" + it.key() + "\"");
  }
}

inline double get_number(const json& obj, const std::string& where,
                         const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number())
    throw ConfigError(where + "." + key + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x))
    throw ConfigError(where + "." + key + ": must be finite");
  return x;
}

inline std::int64_t get_integer(const json& obj, const std::string& where,
                                const char* key, std::int64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer())
    throw ConfigError(where + "." + key + ": expected an integer");
  return v.get<std::int64_t>();
}

inline std::string get_string(const json& obj, const std::string& where,
                              const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string())
    throw ConfigError(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

inline std::vector<double> get_number_array(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const json& e : v) {
    if (!e.is_number()) throw ConfigError(where + ": expected an array of numbers");
    const double x = e.get<double>();
    if (!std::isfinite(x)) throw ConfigError(where + ": entries must be finite");
    out.push_back(x);
  }
  return out;
}

inline SweepAxis axis_from_string(const std::string& s) {
  if (s == "drive_phase") return SweepAxis::DrivePhase;
  if (s == "pump_phase") return SweepAxis::PumpPhase;
  if (s == "detune") return SweepAxis::ActuationDetune;
  if (s == "ratio") return SweepAxis::FrequencyRatio;
  if (s == "delta") return SweepAxis::Delta;
  if (s == "q_curve") return SweepAxis::QRequirement;
  throw ConfigError("sweep.axis: unknown axis \"" + s + "\"");
}

inline const char* axis_to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::DrivePhase: return "drive_phase";
    case SweepAxis::PumpPhase: return "pump_phase";
    case SweepAxis::ActuationDetune: return "detune";
    case SweepAxis::FrequencyRatio: return "ratio";
    case SweepAxis::Delta: return "delta";
    case SweepAxis::QRequirement: return "q_curve";
  }
  return "unknown";
}

inline void parse_system(const json& j, MathieuSystem& sys) {
  check_keys(j, "system",
             {"q_factor", "omega0", "accel_amplitude", "omega_a", "phase_phi_deg",
              "delta", "omega_p", "phase_psi_deg", "beta"});
  sys.resonator.q_factor = get_number(j, "system", "q_factor", sys.resonator.q_factor);
  sys.resonator.omega0 = get_number(j, "system", "omega0", sys.resonator.omega0);
  sys.drive.accel_amplitude =
      get_number(j, "system", "accel_amplitude", sys.drive.accel_amplitude);
  sys.drive.omega_a = get_number(j, "system", "omega_a", sys.drive.omega_a);
  sys.drive.phase_phi = get_number(j, "system", "phase_phi_deg",
                                   sys.drive.phase_phi * 180.0 / kPi) *
                        kPi / 180.0;
  sys.pump.delta = get_number(j, "system", "delta", sys.pump.delta);
  sys.pump.omega_p = get_number(j, "system", "omega_p", sys.pump.omega_p);
  sys.pump.phase_psi = get_number(j, "system", "phase_psi_deg",
                                  sys.pump.phase_psi * 180.0 / kPi) *
                       kPi / 180.0;
  sys.duffing.beta = get_number(j, "system", "beta", sys.duffing.beta);
}

inline void parse_integrator(const json& j, RunConfig& cfg) {
  check_keys(j, "integrator",
             {"steps_per_drive_period", "max_periods", "initial_state", "settle_tol",
              "window_periods"});
  cfg.integrator.steps_per_drive_period = static_cast<int>(
      get_integer(j, "integrator", "steps_per_drive_period",
                  cfg.integrator.steps_per_drive_period));
  cfg.integrator.max_periods =
      get_integer(j, "integrator", "max_periods", cfg.integrator.max_periods);
  if (j.contains("initial_state")) {
    const std::vector<double> v =
        get_number_array(j.at("initial_state"), "integrator.initial_state");
    if (v.size() != 2)
      throw ConfigError("integrator.initial_state: expected [z, zdot]");
    cfg.integrator.initial_state = State{v[0], v[1]};
  }
  cfg.settle_tol = get_number(j, "integrator", "settle_tol", cfg.settle_tol);
  cfg.window_periods = static_cast<int>(
      get_integer(j, "integrator", "window_periods", cfg.window_periods));
}

inline void parse_sweep(const json& j, RunConfig& cfg) {
  check_keys(j, "sweep",
             {"axis", "values", "from", "to", "count", "target_gain", "q_values"});
  if (!j.contains("axis")) throw ConfigError("sweep.axis: required");
  SweepConfig sw;
  sw.axis = axis_from_string(get_string(j, "sweep", "axis", ""));
  sw.target_gain = get_number(j, "sweep", "target_gain", sw.target_gain);
  if (!(sw.target_gain >= 1.0))
    throw ConfigError("sweep.target_gain: must be >= 1");

  const bool has_values = j.contains("values");
  const bool has_grid = j.contains("from") || j.contains("to") || j.contains("count");
  const bool has_q = j.contains("q_values");
  if (sw.axis == SweepAxis::QRequirement) {
    if (has_values || has_grid)
      throw ConfigError("sweep: q_curve takes q_values, not values/from/to/count");
    if (!has_q) throw ConfigError("sweep.q_values: required for q_curve");
    sw.values = get_number_array(j.at("q_values"), "sweep.q_values");
  } else {
    if (has_q) throw ConfigError("sweep.q_values: only valid for axis q_curve");
    if (has_values == has_grid)
      throw ConfigError("sweep: provide either values or from/to/count");
    if (has_values) {
      sw.values = get_number_array(j.at("values"), "sweep.values");
    } else {
      if (!j.contains("from") || !j.contains("to") || !j.contains("count"))
        throw ConfigError("sweep: from, to, and count must appear together");
      const double from = get_number(j, "sweep", "from", 0.0);
      const double to = get_number(j, "sweep", "to", 0.0);
      const std::int64_t count = get_integer(j, "sweep", "count", 0);
      if (count < 2) throw ConfigError("sweep.count: must be >= 2");
      if (!(to > from)) throw ConfigError("sweep: to must exceed from");
      sw.values.reserve(static_cast<std::size_t>(count));
      for (std::int64_t i = 0; i < count; ++i)
        sw.values.push_back(from + (to - from) * static_cast<double>(i) /
                                       static_cast<double>(count - 1));
    }
  }
  if (sw.values.empty()) throw ConfigError("sweep: values must be non-empty");
  for (std::size_t i = 1; i < sw.values.size(); ++i)
    if (!(sw.values[i] > sw.values[i - 1]))
      throw ConfigError("sweep: values must be strictly increasing");
  cfg.sweep = sw;
}

inline void parse_beam(const json& j, RunConfig& cfg) {
  check_keys(j, "beam",
             {"length", "width", "thickness", "youngs_modulus", "density",
              "n_elements", "bc", "p_static", "p_var"});
  BeamConfig bc{};
  bc.spec.length = get_number(j, "beam", "length", bc.spec.length);
  bc.spec.width = get_number(j, "beam", "width", bc.spec.width);
  bc.spec.thickness = get_number(j, "beam", "thickness", bc.spec.thickness);
  bc.spec.youngs_modulus =
      get_number(j, "beam", "youngs_modulus", bc.spec.youngs_modulus);
  bc.spec.density = get_number(j, "beam", "density", bc.spec.density);
  bc.n_elements =
      static_cast<int>(get_integer(j, "beam", "n_elements", bc.n_elements));
  const std::string bcs = get_string(j, "beam", "bc", "clamped_clamped");
  if (bcs == "clamped_clamped") {
    bc.bc = beam::BoundaryCondition::ClampedClamped;
  } else if (bcs == "clamped_guided") {
    bc.bc = beam::BoundaryCondition::ClampedGuided;
  } else {
    throw ConfigError("beam.bc: expected clamped_clamped or clamped_guided");
  }
  bc.load.p_static = get_number(j, "beam", "p_static", bc.load.p_static);
  bc.load.p_var = get_number(j, "beam", "p_var", bc.load.p_var);
  cfg.beam_cfg = bc;
}

inline void parse_comb(const json& j, RunConfig& cfg) {
  check_keys(j, "comb", {"fingers", "finger_thickness", "gap", "voltage"});
  beam::CombDriveSpec comb{};
  comb.finger_count =
      static_cast<int>(get_integer(j, "comb", "fingers", comb.finger_count));
  comb.finger_thickness =
      get_number(j, "comb", "finger_thickness", comb.finger_thickness);
  comb.gap = get_number(j, "comb", "gap", comb.gap);
  comb.voltage = get_number(j, "comb", "voltage", comb.voltage);
  cfg.comb = comb;
}

}  // namespace cfgdetail

/// Parses a JSON config document. Unknown keys anywhere are errors, as are
/// wrong types, non-finite numbers, and invalid ranges. All keys optional
/// except inside present sections as noted.
inline RunConfig parse_config(const std::string& text) {
  namespace cd = cfgdetail;
  cd::json root;
  try {
    root = cd::json::parse(text);
  } catch (const cd::json::exception& e) {
    // parse errors proper, plus out-of-range literals like 1e999
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  cd::check_keys(root, "config",
                 {"system", "integrator", "sweep", "beam", "comb", "output"});

  RunConfig cfg;
  if (root.contains("system")) cd::parse_system(root.at("system"), cfg.system);
  if (root.contains("integrator")) cd::parse_integrator(root.at("integrator"), cfg);
  if (root.contains("sweep")) cd::parse_sweep(root.at("sweep"), cfg);
  if (root.contains("beam")) cd::parse_beam(root.at("beam"), cfg);
  if (root.contains("comb")) cd::parse_comb(root.at("comb"), cfg);
  if (root.contains("output")) {
    cd::check_keys(root.at("output"), "output", {"dir"});
    cfg.output.dir = cd::get_string(root.at("output"), "output", "dir", ".");
    if (cfg.output.dir.empty()) throw ConfigError("output.dir: must be non-empty");
  }

  try {
    cfg.system.validate();
    cfg.integrator.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!(cfg.settle_tol > 0.0) || !std::isfinite(cfg.settle_tol))
    throw ConfigError("integrator.settle_tol: must be positive");
  if (cfg.window_periods < 10)
    throw ConfigError("integrator.window_periods: must be >= 10");
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Builds the library sweep spec from a parsed config. Phase-axis values are
/// given in degrees in config files and converted to radians here.
inline SweepSpec make_sweep_spec(const RunConfig& cfg) {
  if (!cfg.sweep) throw ConfigError("config: sweep section required");
  SweepSpec spec;
  spec.base = cfg.system;
  spec.axis = cfg.sweep->axis;
  spec.values = cfg.sweep->values;
  if (spec.axis == SweepAxis::DrivePhase || spec.axis == SweepAxis::PumpPhase)
    for (double& v : spec.values) v *= kPi / 180.0;
  spec.target_gain = cfg.sweep->target_gain;
  spec.integrator = cfg.integrator;
  spec.settle_tol = cfg.settle_tol;
  spec.window_periods = cfg.window_periods;
  return spec;
}

}  // namespace paramp
