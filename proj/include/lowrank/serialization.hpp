#pragma once

#include <string>

#include <json.hpp>

#include "lowrank/data_gen.hpp"
#include "lowrank/estimators.hpp"
#include "lowrank/linalg.hpp"
#include "lowrank/metrics.hpp"

namespace lowrank {

using Json = nlohmann::json;

/// Shortest text that round-trips the double exactly (%.17g); NaN and
/// infinities are written as nan, inf, -inf.
std::string format_double(double x);

/// Row-major nested arrays.
Json matrix_to_json(const Matrix& a);
/// Throws InputError on ragged or non-numeric input.
Matrix matrix_from_json(const Json& j);

/// {m, n, r, entries, mu, kappa, seed}
Json to_json(const LowRankMatrix& l);
/// Rebuilds factors and diagnostics from the entries and checks them against
/// the stored mu and kappa.
LowRankMatrix low_rank_from_json(const Json& j);

/// {M_hat, P_hat, r, tau, T}
Json to_json(const FrequencyEstimate& e);

Json to_json(const ErrorPanel& p);

/// The estimation CSV cells from `spectral` through `subspace_v`; absent
/// p_* values are empty cells.
std::string error_panel_csv_cells(const ErrorPanel& p);

}  // namespace lowrank
