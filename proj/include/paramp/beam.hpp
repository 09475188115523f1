#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "paramp/errors.hpp"
#include "paramp/integrator.hpp"
#include "paramp/mathieu.hpp"
#include "paramp/oracle.hpp"

namespace paramp::beam {

// ===== geometry and load cases =====

/// Prismatic rectangular-section beam. Bending is about the axis that makes
/// the in-plane width the flexing dimension, so I = thickness*width^3/12.
struct BeamSpec {
  double length = 200e-6;          // m
  double width = 5e-6;             // m, in-plane (flexing) dimension
  double thickness = 10e-6;        // m, out-of-plane dimension
  double youngs_modulus = 169e9;   // Pa
  double density = 2330.0;         // kg/m^3

  double area() const { return width * thickness; }
  double second_moment() const { return thickness * width * width * width / 12.0; }

  void validate() const {
    detail::require(std::isfinite(length) && length > 0.0,
                    "BeamSpec: length must be positive");
    detail::require(std::isfinite(width) && width > 0.0,
                    "BeamSpec: width must be positive");
    detail::require(std::isfinite(thickness) && thickness > 0.0,
                    "BeamSpec: thickness must be positive");
    detail::require(std::isfinite(youngs_modulus) && youngs_modulus > 0.0,
                    "BeamSpec: youngs_modulus must be positive");
    detail::require(std::isfinite(density) && density > 0.0,
                    "BeamSpec: density must be positive");
  }
};

enum class BoundaryCondition {
  ClampedClamped,  // both ends: w = 0, theta = 0
  ClampedGuided    // left clamped; right end: theta = 0, w free
};

/// Axial load split into a bias and a modulation amplitude, both in newtons.
/// Positive values are tension.
struct AxialLoadCase {
  double p_static = 0.0;
  double p_var = 0.0;
};

struct CombDriveSpec {
  int finger_count = 70;
  double finger_thickness = 10e-6;  // m, overlap depth
  double gap = 0.5e-6;              // m
  double voltage = 40.0;            // V

  void validate() const {
    detail::require(finger_count > 0, "CombDriveSpec: finger_count must be positive");
    detail::require(std::isfinite(finger_thickness) && finger_thickness > 0.0,
                    "CombDriveSpec: finger_thickness must be positive");
    detail::require(std::isfinite(gap) && gap > 0.0,
                    "CombDriveSpec: gap must be positive");
    detail::require(std::isfinite(voltage) && voltage >= 0.0,
                    "CombDriveSpec: voltage must be non-negative");
  }
};

inline constexpr double kEpsilon0 = 8.854187817e-12;  // F/m

/// Lateral electrostatic force of an interdigitated comb drive,
/// F = n/2 * (t/g) * eps0 * V^2.
inline double comb_force(const CombDriveSpec& comb) {
  comb.validate();
  return 0.5 * static_cast<double>(comb.finger_count) *
         (comb.finger_thickness / comb.gap) * kEpsilon0 * comb.voltage *
         comb.voltage;
}

// ===== finite-element assembly =====

/// Assembled global matrices with boundary DOFs eliminated. kept_dofs maps
/// reduced indices back to full (w0, th0, w1, th1, ...) indices.
struct BeamMatrices {
  Eigen::MatrixXd mass;
  Eigen::MatrixXd bending;
  Eigen::MatrixXd geometric;  // per unit axial tension
  int n_elements = 0;
  std::vector<int> kept_dofs;
};

namespace detail {

using paramp::detail::require;

inline void element_matrices(double ei, double rho_a, double le,
                             Eigen::Matrix4d& kb, Eigen::Matrix4d& me,
                             Eigen::Matrix4d& kg) {
  const double l = le, l2 = le * le;
  kb << 12, 6 * l, -12, 6 * l,
        6 * l, 4 * l2, -6 * l, 2 * l2,
        -12, -6 * l, 12, -6 * l,
        6 * l, 2 * l2, -6 * l, 4 * l2;
  kb *= ei / (l2 * l);

  me << 156, 22 * l, 54, -13 * l,
        22 * l, 4 * l2, 13 * l, -3 * l2,
        54, 13 * l, 156, -22 * l,
        -13 * l, -3 * l2, -22 * l, 4 * l2;
  me *= rho_a * l / 420.0;

  kg << 36, 3 * l, -36, 3 * l,
        3 * l, 4 * l2, -3 * l, -l2,
        -36, -3 * l, 36, -3 * l,
        3 * l, -l2, -3 * l, 4 * l2;
  kg *= 1.0 / (30.0 * l);
}

inline std::vector<int> kept_dof_indices(int n_elements, BoundaryCondition bc) {
  const int n_nodes = n_elements + 1;
  const int n_full = 2 * n_nodes;
  std::vector<bool> drop(static_cast<std::size_t>(n_full), false);
  drop[0] = true;  // left w
  drop[1] = true;  // left theta
  if (bc == BoundaryCondition::ClampedClamped) {
    drop[static_cast<std::size_t>(n_full - 2)] = true;  // right w
    drop[static_cast<std::size_t>(n_full - 1)] = true;  // right theta
  } else {
    drop[static_cast<std::size_t>(n_full - 1)] = true;  // right theta only
  }
  std::vector<int> kept;
  kept.reserve(static_cast<std::size_t>(n_full));
  for (int i = 0; i < n_full; ++i)
    if (!drop[static_cast<std::size_t>(i)]) kept.push_back(i);
  return kept;
}

}  // namespace detail

/// Hermite-element mass, bending-stiffness, and geometric-stiffness matrices
/// on a uniform mesh. The geometric matrix is per unit axial tension: the
/// effective stiffness at tension P is bending + P*geometric.
inline BeamMatrices assemble(const BeamSpec& beam, int n_elements,
                             BoundaryCondition bc) {
  beam.validate();
  detail::require(n_elements >= 4, "assemble: n_elements must be >= 4");

  const int n_nodes = n_elements + 1;
  const int n_full = 2 * n_nodes;
  const double le = beam.length / static_cast<double>(n_elements);
  const double ei = beam.youngs_modulus * beam.second_moment();
  const double rho_a = beam.density * beam.area();

  Eigen::Matrix4d kb, me, kg;
  detail::element_matrices(ei, rho_a, le, kb, me, kg);

  Eigen::MatrixXd m_full = Eigen::MatrixXd::Zero(n_full, n_full);
  Eigen::MatrixXd kb_full = Eigen::MatrixXd::Zero(n_full, n_full);
  Eigen::MatrixXd kg_full = Eigen::MatrixXd::Zero(n_full, n_full);
  for (int e = 0; e < n_elements; ++e) {
    const int base = 2 * e;
    m_full.block<4, 4>(base, base) += me;
    kb_full.block<4, 4>(base, base) += kb;
    kg_full.block<4, 4>(base, base) += kg;
  }

  BeamMatrices out;
  out.n_elements = n_elements;
  out.kept_dofs = detail::kept_dof_indices(n_elements, bc);
  const int n = static_cast<int>(out.kept_dofs.size());
  out.mass.resize(n, n);
  out.bending.resize(n, n);
  out.geometric.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      out.mass(i, j) = m_full(out.kept_dofs[i], out.kept_dofs[j]);
      out.bending(i, j) = kb_full(out.kept_dofs[i], out.kept_dofs[j]);
      out.geometric(i, j) = kg_full(out.kept_dofs[i], out.kept_dofs[j]);
    }
  return out;
}

// ===== generalized eigensolver =====

namespace detail {

/// Smallest `count` eigenpairs of A x = lambda B x with A, B symmetric and
/// B positive definite. A must be positive definite too (LLT is used to
/// factor it for inverse iteration); if it is not, the beam is past its
/// buckling load and BeyondBuckling is thrown.
inline void smallest_eigenpairs(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                int count, std::vector<double>& lambdas,
                                std::vector<Eigen::VectorXd>& vectors) {
  const Eigen::Index n = a.rows();
  require(count >= 1 && count <= n, "smallest_eigenpairs: bad count");
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success)
    throw BeyondBuckling("effective stiffness is not positive definite");

  lambdas.clear();
  vectors.clear();
  for (int k = 0; k < count; ++k) {
    Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
    for (int i = 0; i < n; ++i) x(i) += 1e-3 * static_cast<double>((i * 2654435761u) % 97);
    // B-orthogonalize against converged modes, then inverse-iterate on A.
    auto deflate = [&](Eigen::VectorXd& v) {
      for (const auto& u : vectors) v -= u * (u.dot(b * v));
    };
    deflate(x);
    x /= std::sqrt(x.dot(b * x));
    double lambda = x.dot(a * x);
    for (int it = 0; it < 500; ++it) {
      Eigen::VectorXd y = llt.solve(b * x);
      deflate(y);
      const double norm = std::sqrt(y.dot(b * y));
      if (!(norm > 0.0) || !std::isfinite(norm))
        throw DegenerateFit("inverse iteration collapsed");
      y /= norm;
      const double next = y.dot(a * y);
      x = y;
      const bool done = std::abs(next - lambda) <= 1e-13 * std::abs(next);
      lambda = next;
      if (done && it >= 2) break;
    }
    lambdas.push_back(lambda);
    vectors.push_back(x / std::sqrt(x.dot(b * x)));
  }
}

}  // namespace detail

// ===== modal analysis =====

/// Fundamental mode under a given axial tension. The shape is re-expanded to
/// full DOF ordering and scaled so its largest translation entry is 1, and
/// modal mass/stiffness are computed from that same scaled shape, so
/// sqrt(modal_stiffness/modal_mass)/(2 pi) reproduces f0.
struct ModalResult {
  double f0 = 0.0;                 // Hz
  Eigen::VectorXd mode_shape;      // full DOFs (w0, th0, w1, th1, ...)
  double modal_mass = 0.0;         // kg
  double modal_stiffness = 0.0;    // N/m
};

inline ModalResult modal(const BeamSpec& beam, int n_elements,
                         BoundaryCondition bc, double p_static = 0.0) {
  detail::require(std::isfinite(p_static), "modal: p_static must be finite");
  const BeamMatrices mats = assemble(beam, n_elements, bc);
  const Eigen::MatrixXd k_eff = mats.bending + p_static * mats.geometric;

  std::vector<double> lambdas;
  std::vector<Eigen::VectorXd> vecs;
  detail::smallest_eigenpairs(k_eff, mats.mass, 1, lambdas, vecs);
  detail::require(lambdas[0] > 0.0, "modal: non-positive eigenvalue");

  const int n_full = 2 * (n_elements + 1);
  Eigen::VectorXd full = Eigen::VectorXd::Zero(n_full);
  for (std::size_t i = 0; i < mats.kept_dofs.size(); ++i)
    full(mats.kept_dofs[i]) = vecs[0](static_cast<Eigen::Index>(i));

  // Scale: unit peak translation, sign positive at the peak.
  double peak = 0.0;
  for (int node = 0; node <= n_elements; ++node) {
    const double w = full(2 * node);
    if (std::abs(w) > std::abs(peak)) peak = w;
  }
  detail::require(peak != 0.0, "modal: degenerate mode shape");
  full /= peak;

  ModalResult out;
  out.f0 = std::sqrt(lambdas[0]) / (2.0 * kPi);
  out.mode_shape = full;

  // Quadratic forms on the reduced matrices using the scaled reduced shape.
  Eigen::VectorXd red(mats.kept_dofs.size());
  for (std::size_t i = 0; i < mats.kept_dofs.size(); ++i)
    red(static_cast<Eigen::Index>(i)) = full(mats.kept_dofs[i]);
  out.modal_mass = red.dot(mats.mass * red);
  out.modal_stiffness = red.dot(k_eff * red);
  return out;
}

/// Euler buckling load (compression magnitude, newtons): smallest eigenvalue
/// of bending x = P * geometric x.
inline double buckling_load(const BeamSpec& beam, int n_elements,
                            BoundaryCondition bc) {
  const BeamMatrices mats = assemble(beam, n_elements, bc);
  std::vector<double> lambdas;
  std::vector<Eigen::VectorXd> vecs;
  detail::smallest_eigenpairs(mats.bending, mats.geometric, 1, lambdas, vecs);
  detail::require(lambdas[0] > 0.0, "buckling_load: non-positive eigenvalue");
  return lambdas[0];
}

/// Static transverse stiffness at the midpoint: unit transverse force at the
/// center node, stiffness = 1/deflection. Requires an even element count so
/// a node sits exactly at midspan.
inline double midpoint_stiffness(const BeamSpec& beam, int n_elements,
                                 BoundaryCondition bc, double p_static = 0.0) {
  detail::require(n_elements % 2 == 0,
                  "midpoint_stiffness: n_elements must be even");
  const BeamMatrices mats = assemble(beam, n_elements, bc);
  const Eigen::MatrixXd k_eff = mats.bending + p_static * mats.geometric;

  const int mid_full = 2 * (n_elements / 2);  // translation DOF of center node
  int mid_red = -1;
  for (std::size_t i = 0; i < mats.kept_dofs.size(); ++i)
    if (mats.kept_dofs[i] == mid_full) mid_red = static_cast<int>(i);
  detail::require(mid_red >= 0, "midpoint_stiffness: midpoint DOF eliminated");

  Eigen::LLT<Eigen::MatrixXd> llt(k_eff);
  if (llt.info() != Eigen::Success)
    throw BeyondBuckling("effective stiffness is not positive definite");
  Eigen::VectorXd f = Eigen::VectorXd::Zero(mats.kept_dofs.size());
  f(mid_red) = 1.0;
  const Eigen::VectorXd u = llt.solve(f);
  detail::require(u(mid_red) > 0.0, "midpoint_stiffness: non-positive deflection");
  return 1.0 / u(mid_red);
}

// ===== stiffness modulation =====

/// Relative stiffness modulation depth delta = (k+ - k-)/(2 k0) computed two
/// ways that must agree for a valid single-mode reduction:
///  - stiffness_route: quadratic forms phi0' K(P) phi0 with the mode shape
///    frozen at the static bias, evaluated at p_static +/- p_var;
///  - frequency_route: (f+ - f-)/f0 from full modal solves at the same loads.
/// Freezing the shape in the first route is what the single-mode model
/// actually assumes; re-solving the shape at each load lets mode drift leak
/// into the quadratic form and the two routes part ways near buckling.
struct StiffnessModulation {
  double stiffness_route = 0.0;
  double frequency_route = 0.0;
};

inline StiffnessModulation delta_k_over_k(const BeamSpec& beam, int n_elements,
                                          BoundaryCondition bc,
                                          const AxialLoadCase& load) {
  detail::require(std::isfinite(load.p_static) && std::isfinite(load.p_var),
                  "delta_k_over_k: loads must be finite");
  detail::require(load.p_var >= 0.0, "delta_k_over_k: p_var must be non-negative");
  const double p_cr = buckling_load(beam, n_elements, bc);
  detail::require(load.p_static - load.p_var > -0.9 * p_cr,
                  "delta_k_over_k: compression approaches buckling");

  const BeamMatrices mats = assemble(beam, n_elements, bc);
  const ModalResult base = modal(beam, n_elements, bc, load.p_static);

  Eigen::VectorXd phi0(mats.kept_dofs.size());
  for (std::size_t i = 0; i < mats.kept_dofs.size(); ++i)
    phi0(static_cast<Eigen::Index>(i)) = base.mode_shape(mats.kept_dofs[i]);

  const auto k_of = [&](double p) {
    return phi0.dot((mats.bending + p * mats.geometric) * phi0);
  };
  const double k0 = k_of(load.p_static);
  const double k_plus = k_of(load.p_static + load.p_var);
  const double k_minus = k_of(load.p_static - load.p_var);

  StiffnessModulation out;
  out.stiffness_route = (k_plus - k_minus) / (2.0 * k0);

  const ModalResult hi = modal(beam, n_elements, bc, load.p_static + load.p_var);
  const ModalResult lo = modal(beam, n_elements, bc, load.p_static - load.p_var);
  out.frequency_route = (hi.f0 - lo.f0) / base.f0;
  return out;
}

// ===== reduction to the oscillator model =====

/// Single-mode reduction of a biased, axially pumped beam. The pump depth is
/// the frozen-shape stiffness-route delta; the pump runs at twice the biased
/// natural frequency and the drive phase sits on the amplified quadrature.
struct ReducedSystem {
  MathieuSystem system;
  ModalResult base_mode;
  StiffnessModulation modulation;
};

inline ReducedSystem reduce_to_mathieu(const BeamSpec& beam, BoundaryCondition bc,
                                       const AxialLoadCase& load, double q_factor,
                                       double drive_accel, double beta = 0.0,
                                       int n_elements = 64) {
  detail::require(std::isfinite(q_factor) && q_factor > 0.0,
                  "reduce_to_mathieu: q_factor must be positive");
  detail::require(std::isfinite(drive_accel) && drive_accel > 0.0,
                  "reduce_to_mathieu: drive_accel must be positive");
  detail::require(std::isfinite(beta) && beta >= 0.0,
                  "reduce_to_mathieu: beta must be non-negative");

  ReducedSystem out;
  out.base_mode = modal(beam, n_elements, bc, load.p_static);
  out.modulation = delta_k_over_k(beam, n_elements, bc, load);

  const double w0 = 2.0 * kPi * out.base_mode.f0;
  out.system.resonator = ResonatorParams{q_factor, w0};
  out.system.drive =
      DriveSpec{drive_accel, w0, amplified_drive_phase(0.0)};
  out.system.pump = PumpSpec{out.modulation.stiffness_route, 2.0 * w0, 0.0};
  out.system.duffing = DuffingSpec{beta};
  out.system.validate();
  return out;
}

// ===== design report =====

/// Achievable pump depth and frequency for one boundary condition.
struct DesignVariant {
  double delta_achievable = 0.0;
  double f0_hz = 0.0;
};

/// End-to-end design summary: electrostatic force, achievable modulation for
/// both boundary conditions at that force, the numeric parametric threshold
/// at the primary geometry's Q, and the closed-form gain prediction.
struct DesignReport {
  double force_newtons = 0.0;
  BoundaryCondition primary_bc = BoundaryCondition::ClampedClamped;
  DesignVariant clamped_clamped;
  DesignVariant clamped_guided;
  double delta_crit = 0.0;                  // numeric, normalized frame
  double pump_margin = 0.0;                 // delta*Q/2 for the primary variant
  std::optional<double> predicted_max_gain; // closed form; empty above threshold
  double q_factor = 0.0;
};

inline DesignReport design_report(const BeamSpec& beam, BoundaryCondition bc,
                                  const CombDriveSpec& comb, double q_factor,
                                  int n_elements = 64) {
  detail::require(std::isfinite(q_factor) && q_factor > 0.0,
                  "design_report: q_factor must be positive");
  DesignReport out;
  out.q_factor = q_factor;
  out.primary_bc = bc;
  out.force_newtons = comb_force(comb);

  const AxialLoadCase load{out.force_newtons, out.force_newtons};
  const auto variant = [&](BoundaryCondition which) {
    DesignVariant v;
    const ModalResult m = modal(beam, n_elements, which, load.p_static);
    v.f0_hz = m.f0;
    v.delta_achievable = delta_k_over_k(beam, n_elements, which, load).stiffness_route;
    return v;
  };
  out.clamped_clamped = variant(BoundaryCondition::ClampedClamped);
  out.clamped_guided = variant(BoundaryCondition::ClampedGuided);

  const DesignVariant& primary = bc == BoundaryCondition::ClampedClamped
                                     ? out.clamped_clamped
                                     : out.clamped_guided;
  out.delta_crit = critical_delta(ResonatorParams{q_factor, 1.0}, 2.0);
  out.pump_margin = pump_margin(q_factor, primary.delta_achievable);
  out.predicted_max_gain = max_gain(q_factor, primary.delta_achievable);
  return out;
}

}  // namespace paramp::beam
