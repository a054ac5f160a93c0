#pragma once

#include "defcast/config.hpp"
#include "defcast/transcript.hpp"

namespace defcast {

/// Plays the configured game for exactly `rounds` rounds. Delegates to
/// doubling_wrapper when doubling is enabled. SolverFailure carries the
/// failing round index.
///
/// Each record carries the round's certificate (max gain at the emitted
/// forecast) and the capitals of the attached Skeptics: "quadratic" (the
/// engine's own S_N, or an independent quadratic Skeptic in test mode),
/// "mixture", and "slln" for binary games.
Transcript run_game(const RunConfig& config);

/// Scaled-radius removal game: whenever |x_n| >= R the radius is multiplied
/// by the factor until it contains x_n, the inner strategy (and its
/// Skeptics) restart, and the inner engine sees x_n R_0 / R.
Transcript doubling_wrapper(const RunConfig& config);

}  // namespace defcast
