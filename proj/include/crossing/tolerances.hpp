#pragma once

// Shared numeric tolerance table. Every comparison constant used by the
// library lives here so that tests and production code agree on slack.

namespace crossing::tol {

// Equality slack for simulation clock comparisons (phase deadlines).
inline constexpr double time_eq = 1e-9;

// Geometric slack when classifying a stopped car as "at the stop line".
inline constexpr double at_line = 1e-9;

// Slack for runtime invariant checks (spacing, speed box).
inline constexpr double invariant = 1e-9;

// Relative tolerance of the closed-form/round-trip identities.
inline constexpr double round_trip_rel = 1e-9;

}  // namespace crossing::tol
