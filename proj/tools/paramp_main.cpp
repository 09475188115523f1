// Command-line front end: steady-state runs, figure-style sweeps, closed-form
// and Floquet references, and the beam design path. All outputs are plain
// files under --out; reruns with the same inputs are byte-identical.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "paramp/paramp.hpp"

namespace fs = std::filesystem;
using paramp::io::format_double;
using paramp::io::ordered_json;

namespace {

// ===== shared helpers =====

struct OutputSink {
  fs::path dir;
  std::vector<std::string> written;

  void write(const std::string& name, const std::string& content) {
    fs::create_directories(dir);
    paramp::io::write_file_atomic(dir / name, content);
    written.push_back(name);
  }
};

ordered_json integrator_to_json(const paramp::RunConfig& cfg) {
  ordered_json j;
  j["steps_per_drive_period"] = cfg.integrator.steps_per_drive_period;
  j["max_periods"] = cfg.integrator.max_periods;
  j["initial_state"] = {cfg.integrator.initial_state.z,
                        cfg.integrator.initial_state.zdot};
  j["settle_tol"] = cfg.settle_tol;
  j["window_periods"] = cfg.window_periods;
  return j;
}

ordered_json beam_to_json(const paramp::BeamConfig& b) {
  ordered_json j;
  j["length"] = b.spec.length;
  j["width"] = b.spec.width;
  j["thickness"] = b.spec.thickness;
  j["youngs_modulus"] = b.spec.youngs_modulus;
  j["density"] = b.spec.density;
  j["n_elements"] = b.n_elements;
  j["bc"] = b.bc == paramp::beam::BoundaryCondition::ClampedClamped
                ? "clamped_clamped"
                : "clamped_guided";
  j["p_static"] = b.load.p_static;
  j["p_var"] = b.load.p_var;
  return j;
}

ordered_json comb_to_json(const paramp::beam::CombDriveSpec& c) {
  ordered_json j;
  j["fingers"] = c.finger_count;
  j["finger_thickness"] = c.finger_thickness;
  j["gap"] = c.gap;
  j["voltage"] = c.voltage;
  return j;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

paramp::RunConfig load_or_default(const std::string& config_path) {
  if (config_path.empty()) return paramp::RunConfig{};
  return paramp::load_config(config_path);
}

fs::path pick_out_dir(const CLI::App* sub, const std::string& cli_out,
                      const paramp::RunConfig& cfg) {
  if (sub->count("--out") > 0) return cli_out;
  return cfg.output.dir;
}

// ===== simulate =====

int run_simulate(const paramp::RunConfig& cfg, const fs::path& out_dir,
                 std::int64_t trace_periods) {
  OutputSink sink{out_dir, {}};
  const paramp::GainResult g =
      paramp::gain(cfg.system, cfg.integrator, cfg.settle_tol, cfg.window_periods);

  ordered_json oracle;
  oracle["pump_margin"] = paramp::pump_margin(cfg.system.resonator.q_factor,
                                              cfg.system.pump.delta);
  if (const auto gm = paramp::max_gain(cfg.system.resonator.q_factor,
                                       cfg.system.pump.delta)) {
    oracle["gain_max"] = *gm;
  } else {
    oracle["gain_max"] = nullptr;
  }
  try {
    const double theta = paramp::quadrature_angle(cfg.system.drive.phase_phi,
                                                  cfg.system.pump.phase_psi);
    oracle["predicted_gain_at_phase"] = paramp::analytic_gain(
        cfg.system.resonator.q_factor, cfg.system.pump.delta, theta);
  } catch (const paramp::AboveThreshold&) {
    oracle["predicted_gain_at_phase"] = nullptr;
  }

  ordered_json result;
  result["status"] = paramp::to_string(g.status);
  result["amplitude"] = g.pumped_amp;
  result["unpumped_amplitude"] = g.unpumped_amp;
  result["gain"] = g.gain;
  result["transient_peak"] = g.transient_peak;
  result["oracle"] = oracle;

  std::string trace_status;
  if (trace_periods > 0) {
    const int spp = cfg.integrator.steps_per_drive_period;
    paramp::TimeSeries series;
    try {
      const paramp::FlowResult flow = paramp::integrate_flow(
          cfg.system, spp, 0.0, cfg.integrator.initial_state,
          trace_periods * static_cast<std::int64_t>(spp), true);
      series = flow.series;
      trace_status = "complete";
    } catch (const paramp::UnboundedGrowth& e) {
      series = e.partial_series();
      trace_status = "unstable";
    }
    sink.write("series.csv", paramp::io::series_csv(series));
    const double spp_d = static_cast<double>(spp);
    if (static_cast<double>(series.z.size()) > 2.0 * spp_d) {
      const paramp::EnvelopeSeries env =
          paramp::demodulate(series, cfg.system.drive.omega_a, 1);
      sink.write("envelope.csv", paramp::io::envelope_csv(env));
    }
  }

  ordered_json j;
  j["command"] = "simulate";
  j["version"] = paramp::kVersion;
  j["system"] = paramp::io::system_to_json(cfg.system);
  j["integrator"] = integrator_to_json(cfg);
  j["result"] = result;
  if (!trace_status.empty()) j["trace"] = trace_status;
  j["outputs"] = sink.written;
  sink.write("steady_state.json", dump(j));

  std::cout << "status " << paramp::to_string(g.status) << ", amplitude "
            << format_double(g.pumped_amp) << ", gain " << format_double(g.gain)
            << "\n";
  for (const std::string& f : sink.written)
    std::cout << "wrote " << (out_dir / f).string() << "\n";
  return 0;
}

// ===== sweep =====

paramp::SweepAxis axis_from_token(const std::string& token) {
  if (token == "phase") return paramp::SweepAxis::DrivePhase;
  if (token == "pump-phase") return paramp::SweepAxis::PumpPhase;
  if (token == "detune") return paramp::SweepAxis::ActuationDetune;
  if (token == "ratio") return paramp::SweepAxis::FrequencyRatio;
  if (token == "delta") return paramp::SweepAxis::Delta;
  if (token == "q-curve") return paramp::SweepAxis::QRequirement;
  throw paramp::ConfigError("sweep: unknown axis token " + token);
}

std::vector<double> default_grid(paramp::SweepAxis axis, double q_factor) {
  std::vector<double> v;
  switch (axis) {
    case paramp::SweepAxis::DrivePhase:
    case paramp::SweepAxis::PumpPhase:
      for (int d = 0; d <= 360; d += 5) v.push_back(static_cast<double>(d));
      return v;  // degrees; converted below
    case paramp::SweepAxis::ActuationDetune: {
      const double span = 10.0 / q_factor;
      for (int i = 0; i < 21; ++i)
        v.push_back(-span + 2.0 * span * static_cast<double>(i) / 20.0);
      return v;
    }
    case paramp::SweepAxis::FrequencyRatio:
      return {1.999, 1.9995, 2.0, 2.0005, 2.001, 2.002};
    case paramp::SweepAxis::Delta:
      for (int i = 0; i < 20; ++i)
        v.push_back(0.0019 * static_cast<double>(i) / 19.0);
      return v;
    case paramp::SweepAxis::QRequirement:
      return {10.0, 100.0, 1000.0};
  }
  return v;
}

int run_sweep(const paramp::RunConfig& cfg, const std::string& token,
              const fs::path& out_dir, const std::string& format) {
  const paramp::SweepAxis axis = axis_from_token(token);

  paramp::SweepSpec spec;
  spec.base = cfg.system;
  spec.axis = axis;
  spec.integrator = cfg.integrator;
  spec.settle_tol = cfg.settle_tol;
  spec.window_periods = cfg.window_periods;

  std::vector<double> echo_values;  // as configured (degrees for phase axes)
  if (cfg.sweep) {
    if (cfg.sweep->axis != axis)
      throw paramp::ConfigError(
          "sweep: config axis does not match the requested axis");
    echo_values = cfg.sweep->values;
    spec.target_gain = cfg.sweep->target_gain;
  } else {
    echo_values = default_grid(axis, cfg.system.resonator.q_factor);
  }
  spec.values = echo_values;
  if (axis == paramp::SweepAxis::DrivePhase || axis == paramp::SweepAxis::PumpPhase)
    for (double& v : spec.values) v *= paramp::kPi / 180.0;

  paramp::SweepResult result;
  switch (axis) {
    case paramp::SweepAxis::DrivePhase:
    case paramp::SweepAxis::PumpPhase:
      result = paramp::sweep_phase(spec);
      break;
    case paramp::SweepAxis::ActuationDetune:
      result = paramp::sweep_detune(spec);
      break;
    case paramp::SweepAxis::FrequencyRatio:
      result = paramp::sweep_ratio(spec);
      break;
    case paramp::SweepAxis::Delta:
      result = paramp::sweep_delta(spec);
      break;
    case paramp::SweepAxis::QRequirement:
      result = paramp::required_delta_curve(spec);
      break;
  }

  OutputSink sink{out_dir, {}};
  const std::string base =
      std::string("sweep_") + paramp::cfgdetail::axis_to_string(axis);
  if (format == "json") {
    ordered_json j = paramp::io::sweep_to_json(result);
    sink.write(base + ".json", dump(j));
  } else {
    sink.write(base + ".csv", paramp::io::sweep_csv(result));
    if (format == "svg") sink.write(base + ".svg", paramp::io::sweep_svg(result));
  }

  ordered_json cfg_echo;
  cfg_echo["system"] = paramp::io::system_to_json(cfg.system);
  cfg_echo["integrator"] = integrator_to_json(cfg);
  ordered_json sweep_echo;
  sweep_echo["axis"] = paramp::cfgdetail::axis_to_string(axis);
  sweep_echo["values"] = echo_values;
  if (axis == paramp::SweepAxis::QRequirement)
    sweep_echo["target_gain"] = spec.target_gain;
  cfg_echo["sweep"] = sweep_echo;

  ordered_json manifest;
  manifest["command"] = "sweep";
  manifest["version"] = paramp::kVersion;
  manifest["axis"] = paramp::cfgdetail::axis_to_string(axis);
  manifest["format"] = format;
  manifest["rows"] = result.values.size();
  manifest["outputs"] = sink.written;
  manifest["config"] = cfg_echo;
  sink.write("manifest.json", dump(manifest));

  for (const std::string& f : sink.written)
    std::cout << "wrote " << (out_dir / f).string() << "\n";
  return 0;
}

// ===== oracle / floquet =====

int run_oracle(double q, double delta, std::optional<double> theta_deg,
               std::optional<double> target_gain, const fs::path& out_dir) {
  OutputSink sink{out_dir, {}};
  ordered_json j;
  j["command"] = "oracle";
  j["version"] = paramp::kVersion;
  j["q_factor"] = q;
  j["delta"] = delta;
  j["pump_margin"] = paramp::pump_margin(q, delta);
  j["threshold_delta"] = 2.0 / q;
  try {
    const paramp::AveragedPrediction p = paramp::averaged_prediction(q, delta);
    j["gain_max"] = p.gain_max;
    j["gain_min"] = p.gain_min;
  } catch (const paramp::AboveThreshold&) {
    j["gain_max"] = nullptr;
    j["gain_min"] = nullptr;
  }
  if (theta_deg) {
    j["theta_deg"] = *theta_deg;
    try {
      j["gain_at_theta"] =
          paramp::analytic_gain(q, delta, *theta_deg * paramp::kPi / 180.0);
    } catch (const paramp::AboveThreshold&) {
      j["gain_at_theta"] = nullptr;
    }
  }
  if (target_gain) {
    j["target_gain"] = *target_gain;
    j["required_delta"] = paramp::required_delta(q, *target_gain);
  }
  sink.write("oracle.json", dump(j));
  std::cout << sink.dir.string() << "/oracle.json\n";
  return 0;
}

int run_floquet(double q, double omega_p, std::optional<double> delta,
                const fs::path& out_dir) {
  OutputSink sink{out_dir, {}};
  const paramp::ResonatorParams res{q, 1.0};
  ordered_json j;
  j["command"] = "floquet";
  j["version"] = paramp::kVersion;
  j["q_factor"] = q;
  j["omega_p"] = omega_p;
  if (delta) {
    const paramp::MonodromyResult m =
        paramp::monodromy(res, paramp::PumpSpec{*delta, omega_p, 0.0});
    j["delta"] = *delta;
    j["multiplier_max_abs"] = m.max_abs;
    j["determinant"] = m.determinant();
    j["stable"] = m.max_abs < 1.0;
  } else {
    j["delta_crit"] = paramp::critical_delta(res, omega_p);
    j["threshold_estimate"] = 2.0 / q;
  }
  sink.write("floquet.json", dump(j));
  std::cout << sink.dir.string() << "/floquet.json\n";
  return 0;
}

// ===== beam family =====

paramp::BeamConfig beam_config_or_default(const paramp::RunConfig& cfg) {
  if (cfg.beam_cfg) return *cfg.beam_cfg;
  return paramp::BeamConfig{};
}

int run_beam(const paramp::RunConfig& cfg, const std::string& what,
             const fs::path& out_dir) {
  const paramp::BeamConfig bc = beam_config_or_default(cfg);
  OutputSink sink{out_dir, {}};
  ordered_json j;
  j["version"] = paramp::kVersion;
  j["beam"] = beam_to_json(bc);

  if (what == "modal") {
    j["command"] = "beam-modal";
    const paramp::beam::ModalResult m =
        paramp::beam::modal(bc.spec, bc.n_elements, bc.bc, bc.load.p_static);
    ordered_json r;
    r["f0_hz"] = m.f0;
    r["modal_mass_kg"] = m.modal_mass;
    r["modal_stiffness_n_per_m"] = m.modal_stiffness;
    if (bc.n_elements % 2 == 0) {
      r["midpoint_stiffness_n_per_m"] = paramp::beam::midpoint_stiffness(
          bc.spec, bc.n_elements, bc.bc, bc.load.p_static);
    } else {
      r["midpoint_stiffness_n_per_m"] = nullptr;
    }
    j["result"] = r;
    sink.write("beam_modal.json", dump(j));
  } else if (what == "buckling") {
    j["command"] = "beam-buckling";
    ordered_json r;
    r["p_cr_newtons"] = paramp::beam::buckling_load(bc.spec, bc.n_elements, bc.bc);
    j["result"] = r;
    sink.write("beam_buckling.json", dump(j));
  } else {
    j["command"] = "beam-delta-k";
    const paramp::beam::StiffnessModulation mod =
        paramp::beam::delta_k_over_k(bc.spec, bc.n_elements, bc.bc, bc.load);
    ordered_json r;
    r["stiffness_route"] = mod.stiffness_route;
    r["frequency_route"] = mod.frequency_route;
    j["result"] = r;
    sink.write("beam_delta_k.json", dump(j));
  }
  for (const std::string& f : sink.written)
    std::cout << "wrote " << (out_dir / f).string() << "\n";
  return 0;
}

int run_comb_force(const paramp::beam::CombDriveSpec& comb, const fs::path& out_dir) {
  OutputSink sink{out_dir, {}};
  ordered_json j;
  j["command"] = "comb-force";
  j["version"] = paramp::kVersion;
  j["comb"] = comb_to_json(comb);
  j["force_newtons"] = paramp::beam::comb_force(comb);
  sink.write("comb_force.json", dump(j));
  std::cout << "force " << format_double(paramp::beam::comb_force(comb))
            << " N\nwrote " << (out_dir / "comb_force.json").string() << "\n";
  return 0;
}

std::string design_text(const paramp::beam::DesignReport& rep,
                        const paramp::BeamConfig& bc) {
  const auto line = [](const std::string& label, const std::string& value) {
    std::string s = label;
    if (s.size() < 28) s.append(28 - s.size(), ' ');
    return s + value + "\n";
  };
  const char* primary = rep.primary_bc == paramp::beam::BoundaryCondition::ClampedClamped
                            ? "clamped_clamped"
                            : "clamped_guided";
  std::string out;
  out += "design summary\n";
  out += "==============\n";
  out += line("comb force", format_double(rep.force_newtons) + " N");
  out += line("beam length", format_double(bc.spec.length) + " m");
  out += line("primary boundary", primary);
  out += line("q factor", format_double(rep.q_factor));
  out += line("cc f0", format_double(rep.clamped_clamped.f0_hz) + " Hz");
  out += line("cc delta achievable", format_double(rep.clamped_clamped.delta_achievable));
  out += line("cg f0", format_double(rep.clamped_guided.f0_hz) + " Hz");
  out += line("cg delta achievable", format_double(rep.clamped_guided.delta_achievable));
  out += line("delta_crit (numeric)", format_double(rep.delta_crit));
  out += line("pump margin", format_double(rep.pump_margin));
  out += line("predicted max gain",
              rep.predicted_max_gain ? format_double(*rep.predicted_max_gain)
                                     : std::string("above threshold"));
  return out;
}

int run_design(const paramp::RunConfig& cfg, const fs::path& out_dir) {
  const paramp::BeamConfig bc = beam_config_or_default(cfg);
  const paramp::beam::CombDriveSpec comb =
      cfg.comb ? *cfg.comb : paramp::beam::CombDriveSpec{};
  const double q = cfg.system.resonator.q_factor;

  const paramp::beam::DesignReport rep =
      paramp::beam::design_report(bc.spec, bc.bc, comb, q, bc.n_elements);

  OutputSink sink{out_dir, {}};
  ordered_json j;
  j["command"] = "design";
  j["version"] = paramp::kVersion;
  j["beam"] = beam_to_json(bc);
  j["comb"] = comb_to_json(comb);
  j["q_factor"] = rep.q_factor;
  ordered_json r;
  r["force_newtons"] = rep.force_newtons;
  r["clamped_clamped"] = {{"f0_hz", rep.clamped_clamped.f0_hz},
                          {"delta_achievable", rep.clamped_clamped.delta_achievable}};
  r["clamped_guided"] = {{"f0_hz", rep.clamped_guided.f0_hz},
                         {"delta_achievable", rep.clamped_guided.delta_achievable}};
  r["delta_crit"] = rep.delta_crit;
  r["pump_margin"] = rep.pump_margin;
  if (rep.predicted_max_gain)
    r["predicted_max_gain"] = *rep.predicted_max_gain;
  else
    r["predicted_max_gain"] = nullptr;
  j["result"] = r;
  sink.write("design.json", dump(j));
  sink.write("design.txt", design_text(rep, bc));
  for (const std::string& f : sink.written)
    std::cout << "wrote " << (out_dir / f).string() << "\n";
  return 0;
}

}  // namespace

// ===== entry point =====

int main(int argc, char** argv) {
  CLI::App app{"parametric amplifier simulation toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::string format = "csv";

  auto* sim = app.add_subcommand("simulate", "run one system to steady state");
  std::int64_t trace_periods = 0;
  sim->add_option("--config", config_path, "JSON config file")
      ->check(CLI::ExistingFile);
  sim->add_option("--out", out_dir, "output directory");
  sim->add_option("--trace-periods", trace_periods,
                  "record this many drive periods of the transient")
      ->check(CLI::NonNegativeNumber);

  auto* swp = app.add_subcommand("sweep", "sweep one axis and tabulate gain");
  std::string axis_token;
  swp->add_option("axis", axis_token, "phase|pump-phase|detune|ratio|delta|q-curve")
      ->required()
      ->check(CLI::IsMember(
          {"phase", "pump-phase", "detune", "ratio", "delta", "q-curve"}));
  swp->add_option("--config", config_path, "JSON config file")
      ->check(CLI::ExistingFile);
  swp->add_option("--out", out_dir, "output directory");
  swp->add_option("--format", format, "csv|json|svg")
      ->check(CLI::IsMember({"csv", "json", "svg"}));

  auto* orc = app.add_subcommand("oracle", "closed-form gain predictions");
  double orc_q = 0.0, orc_delta = 0.0;
  std::optional<double> orc_theta_deg, orc_target;
  orc->add_option("--q", orc_q, "quality factor")->required();
  orc->add_option("--delta", orc_delta, "pump depth")->required();
  orc->add_option("--theta-deg", orc_theta_deg, "quadrature angle, degrees");
  orc->add_option("--target-gain", orc_target, "solve required pump depth");
  orc->add_option("--out", out_dir, "output directory");

  auto* flq = app.add_subcommand("floquet", "monodromy stability analysis");
  double flq_q = 0.0, flq_omega_p = 2.0;
  std::optional<double> flq_delta;
  flq->add_option("--q", flq_q, "quality factor")->required();
  flq->add_option("--omega-p", flq_omega_p, "pump frequency over omega0");
  flq->add_option("--delta", flq_delta,
                  "pump depth; omit to solve the critical depth");
  flq->add_option("--out", out_dir, "output directory");

  auto* bem = app.add_subcommand("beam", "finite-element beam analysis");
  std::string beam_what;
  bem->add_option("what", beam_what, "modal|buckling|delta-k")
      ->required()
      ->check(CLI::IsMember({"modal", "buckling", "delta-k"}));
  bem->add_option("--config", config_path, "JSON config file")
      ->check(CLI::ExistingFile);
  bem->add_option("--out", out_dir, "output directory");

  auto* cmb = app.add_subcommand("comb-force", "comb-drive electrostatic force");
  std::optional<int> cmb_fingers;
  std::optional<double> cmb_thickness, cmb_gap, cmb_voltage;
  cmb->add_option("--config", config_path, "JSON config file")
      ->check(CLI::ExistingFile);
  cmb->add_option("--fingers", cmb_fingers, "finger count");
  cmb->add_option("--finger-thickness", cmb_thickness, "overlap depth, m");
  cmb->add_option("--gap", cmb_gap, "finger gap, m");
  cmb->add_option("--voltage", cmb_voltage, "drive voltage, V");
  cmb->add_option("--out", out_dir, "output directory");

  auto* dsg = app.add_subcommand("design", "end-to-end device design summary");
  dsg->add_option("--config", config_path, "JSON config file")
      ->check(CLI::ExistingFile);
  dsg->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(sim)) {
      const paramp::RunConfig cfg = load_or_default(config_path);
      return run_simulate(cfg, pick_out_dir(sim, out_dir, cfg), trace_periods);
    }
    if (app.got_subcommand(swp)) {
      const paramp::RunConfig cfg = load_or_default(config_path);
      return run_sweep(cfg, axis_token, pick_out_dir(swp, out_dir, cfg), format);
    }
    if (app.got_subcommand(orc))
      return run_oracle(orc_q, orc_delta, orc_theta_deg, orc_target, out_dir);
    if (app.got_subcommand(flq))
      return run_floquet(flq_q, flq_omega_p, flq_delta, out_dir);
    if (app.got_subcommand(bem)) {
      const paramp::RunConfig cfg = load_or_default(config_path);
      return run_beam(cfg, beam_what, pick_out_dir(bem, out_dir, cfg));
    }
    if (app.got_subcommand(cmb)) {
      const paramp::RunConfig cfg = load_or_default(config_path);
      paramp::beam::CombDriveSpec comb =
          cfg.comb ? *cfg.comb : paramp::beam::CombDriveSpec{};
      if (cmb_fingers) comb.finger_count = *cmb_fingers;
      if (cmb_thickness) comb.finger_thickness = *cmb_thickness;
      if (cmb_gap) comb.gap = *cmb_gap;
      if (cmb_voltage) comb.voltage = *cmb_voltage;
      return run_comb_force(comb, pick_out_dir(cmb, out_dir, cfg));
    }
    if (app.got_subcommand(dsg)) {
      const paramp::RunConfig cfg = load_or_default(config_path);
      return run_design(cfg, pick_out_dir(dsg, out_dir, cfg));
    }
  } catch (const paramp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const paramp::InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
