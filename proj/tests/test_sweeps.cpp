#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "paramp/oracle.hpp"
#include "paramp/sweeps.hpp"

using namespace paramp;

namespace {

MathieuSystem make_system(double q, double delta, double phi = -0.25 * kPi) {
  MathieuSystem s;
  s.resonator = ResonatorParams{q, 1.0};
  s.drive = DriveSpec{1.0, 1.0, phi};
  s.pump = PumpSpec{delta, 2.0, 0.0};
  return s;
}

SweepSpec make_spec(const MathieuSystem& base, SweepAxis axis,
                    std::vector<double> values) {
  SweepSpec spec;
  spec.base = base;
  spec.axis = axis;
  spec.values = std::move(values);
  return spec;
}

}  // namespace

// ===== drive-phase sweep =====

TEST_CASE("drive-phase sweep peaks on the amplified quadrature and repeats after pi") {
  std::vector<double> degs = {0, 45, 90, 135, 180, 225, 270, 315};
  std::vector<double> vals;
  for (double d : degs) vals.push_back(d * kPi / 180.0);
  const auto spec = make_spec(make_system(200.0, 0.008), SweepAxis::DrivePhase, vals);
  const SweepResult r = sweep_phase(spec);

  REQUIRE(r.values.size() == 8);
  REQUIRE(r.gains.size() == 8);
  std::size_t best = 0;
  for (std::size_t i = 0; i < 8; ++i) {
    REQUIRE(r.statuses[i] == RowStatus::Settled);
    if (r.gains[i] > r.gains[best]) best = i;
  }
  // amplified quadrature at -45 deg, i.e. 135 or 315 on this grid
  REQUIRE((degs[best] == 135.0 || degs[best] == 315.0));
  for (std::size_t i = 0; i < 4; ++i)
    REQUIRE(r.gains[i] == Catch::Approx(r.gains[i + 4]).epsilon(1e-9));
}

TEST_CASE("pump-phase extremes match the quadrature rule") {
  // phi = 0: theta = psi/2 + pi/4, so psi = 90 amplifies and psi = 270 deamplifies
  const double q = 200.0, d = 0.008, s = 0.8;
  std::vector<double> vals = {0.0, 0.5 * kPi, kPi, 1.5 * kPi};
  const auto spec = make_spec(make_system(q, d, 0.0), SweepAxis::PumpPhase, vals);
  const SweepResult r = sweep_phase(spec);

  REQUIRE(r.gains[1] == Catch::Approx(1.0 / (1.0 - s)).epsilon(0.02));
  REQUIRE(r.gains[3] == Catch::Approx(1.0 / (1.0 + s)).epsilon(0.02));
  REQUIRE(r.gains[0] == Catch::Approx(r.gains[2]).epsilon(0.01));
  REQUIRE(r.gains[0] ==
          Catch::Approx(analytic_gain(q, d, kThetaOffset)).epsilon(0.02));
}

// ===== detune sweep =====

TEST_CASE("detune sweep peaks on resonance and is symmetric") {
  const double q = 1000.0;
  std::vector<double> vals = {-10.0 / q, -5.0 / q, 0.0, 5.0 / q, 10.0 / q};
  auto spec = make_spec(make_system(q, 0.0018), SweepAxis::ActuationDetune, vals);
  const SweepResult r = sweep_detune(spec);

  REQUIRE(r.values.size() == 5);
  REQUIRE(r.gains[2] > r.gains[1]);
  REQUIRE(r.gains[2] > r.gains[3]);
  // far detuning kills the resonant response almost entirely
  REQUIRE(r.gains[0] < 0.5 * r.gains[2]);
  REQUIRE(r.gains[4] < 0.5 * r.gains[2]);
  REQUIRE(r.gains[1] == Catch::Approx(r.gains[3]).epsilon(0.05));
  REQUIRE(r.gains[0] == Catch::Approx(r.gains[4]).epsilon(0.05));
}

// ===== ratio sweep =====

TEST_CASE("ratio sweep beats exactly when the pump is off 2:1") {
  auto spec = make_spec(make_system(1000.0, 0.0018), SweepAxis::FrequencyRatio,
                        {1.999, 2.0, 2.001, 2.002});
  const SweepResult r = sweep_ratio(spec);

  REQUIRE(r.beat_frequencies.size() == 4);
  REQUIRE_FALSE(r.beat_frequencies[1].has_value());
  REQUIRE(r.beat_frequencies[0].has_value());
  REQUIRE(r.beat_frequencies[2].has_value());
  REQUIRE(r.beat_frequencies[3].has_value());

  // beat rate in cycles per drive period equals |r - 2|
  REQUIRE(*r.beat_frequencies[0] == Catch::Approx(0.001).epsilon(0.02));
  REQUIRE(*r.beat_frequencies[2] == Catch::Approx(0.001).epsilon(0.02));
  REQUIRE(*r.beat_frequencies[3] == Catch::Approx(0.002).epsilon(0.02));
  REQUIRE(*r.beat_frequencies[3] ==
          Catch::Approx(2.0 * *r.beat_frequencies[2]).epsilon(0.02));

  // gain is maximal at the exact 2:1 ratio and decays with distance
  REQUIRE(r.gains[1] > r.gains[0]);
  REQUIRE(r.gains[1] > r.gains[2]);
  REQUIRE(r.gains[2] > r.gains[3]);
  for (const RowStatus st : r.statuses) REQUIRE(st == RowStatus::Settled);
}

// ===== delta sweep =====

TEST_CASE("delta sweep matches the closed-form gain curve") {
  const double q = 1000.0;
  std::vector<double> vals = {0.0, 0.0005, 0.0010, 0.0015, 0.0019};
  auto spec = make_spec(make_system(q, 0.0), SweepAxis::Delta, vals);
  const SweepResult r = sweep_delta(spec);

  REQUIRE(r.gains[0] == 1.0);
  for (std::size_t i = 1; i < r.gains.size(); ++i) {
    REQUIRE(r.gains[i] > r.gains[i - 1]);
    REQUIRE(r.gains[i] == Catch::Approx(*max_gain(q, vals[i])).epsilon(0.02));
  }
  REQUIRE(r.gains[2] < 2.0);
  REQUIRE(r.gains[4] > 15.0);
}

TEST_CASE("delta sweep marks super-threshold rows Unstable with NaN gain") {
  auto spec = make_spec(make_system(1000.0, 0.0), SweepAxis::Delta, {0.0021});
  const SweepResult r = sweep_delta(spec);
  REQUIRE(r.statuses[0] == RowStatus::Unstable);
  REQUIRE(std::isnan(r.gains[0]));
}

// ===== required-delta curve =====

TEST_CASE("required_delta_curve lands near the closed-form inverse") {
  auto spec = make_spec(make_system(100.0, 0.0), SweepAxis::QRequirement,
                        {10.0, 100.0, 1000.0});
  spec.target_gain = 10.0;
  const SweepResult r = required_delta_curve(spec);

  REQUIRE(r.deltas.size() == 3);
  REQUIRE(r.oracle_deltas.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    REQUIRE(r.statuses[i] == RowStatus::Settled);
    REQUIRE(r.deltas[i] == Catch::Approx(r.oracle_deltas[i]).epsilon(0.05));
    REQUIRE(r.gains[i] == Catch::Approx(10.0).epsilon(0.10));
  }
  REQUIRE(r.oracle_deltas[0] == Catch::Approx(0.18).epsilon(1e-12));
  REQUIRE(r.deltas[0] > r.deltas[1]);
  REQUIRE(r.deltas[1] > r.deltas[2]);
}

// ===== harness contracts =====

TEST_CASE("sweep outputs are permutation equivariant") {
  const MathieuSystem base = make_system(200.0, 0.0);
  auto fwd = make_spec(base, SweepAxis::Delta, {0.002, 0.004});
  auto rev = make_spec(base, SweepAxis::Delta, {0.004, 0.002});
  const SweepResult a = sweep_delta(fwd);
  const SweepResult b = sweep_delta(rev);
  REQUIRE(a.gains[0] == b.gains[1]);
  REQUIRE(a.gains[1] == b.gains[0]);
  REQUIRE(a.amplitudes[0] == b.amplitudes[1]);
}

TEST_CASE("every input value produces exactly one row") {
  auto spec = make_spec(make_system(100.0, 0.0), SweepAxis::Delta,
                        {0.0, 0.005, 0.010, 0.019});
  const SweepResult r = sweep_delta(spec);
  REQUIRE(r.values.size() == 4);
  REQUIRE(r.gains.size() == 4);
  REQUIRE(r.amplitudes.size() == 4);
  REQUIRE(r.statuses.size() == 4);
}

TEST_CASE("sweep validation rejects bad input") {
  auto spec = make_spec(make_system(100.0, 0.0), SweepAxis::Delta, {});
  REQUIRE_THROWS_AS(sweep_delta(spec), InvalidInput);
  spec = make_spec(make_system(100.0, 0.0), SweepAxis::Delta, {0.001});
  REQUIRE_THROWS_AS(sweep_phase(spec), InvalidInput);
  spec = make_spec(make_system(100.0, 0.0), SweepAxis::ActuationDetune, {-2.0});
  REQUIRE_THROWS_AS(sweep_detune(spec), InvalidInput);
}
