#pragma once

// ===== umbrella header =====
// Parametric-amplification toolkit: a damped, pumped, driven oscillator
// model with analytic and Floquet references, measurement utilities,
// figure-style sweeps, and a beam-based device design path.

#include "paramp/analysis.hpp"
#include "paramp/beam.hpp"
#include "paramp/config.hpp"
#include "paramp/errors.hpp"
#include "paramp/integrator.hpp"
#include "paramp/io.hpp"
#include "paramp/mathieu.hpp"
#include "paramp/oracle.hpp"
#include "paramp/sweeps.hpp"

namespace paramp {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace paramp
