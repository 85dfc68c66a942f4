#pragma once

namespace lowrank {

/// Project-wide numerical tolerances.
struct Tolerances {
  double orthonormality = 1e-10;
  double reconstruction = 1e-8;
  double stochastic_rows = 1e-10;
  double stationarity = 1e-10;
  /// sigma_{r+1} / sigma_1 below this counts as numerically zero.
  double rank_gap = 1e-10;
  /// Entries of nu below this flag the chain as reducible.
  double reducible_mass = 1e-12;
  /// Two entries closer than this are treated as tied maxima.
  double gap_tie = 1e-12;
  double value_iteration = 1e-8;
};

inline constexpr Tolerances kTolerances{};

}  // namespace lowrank
