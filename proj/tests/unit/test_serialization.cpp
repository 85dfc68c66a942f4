#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>

#include "generators.hpp"
#include "lowrank/data_gen.hpp"
#include "lowrank/errors.hpp"
#include "lowrank/serialization.hpp"

using namespace lowrank;

TEST_CASE("format_double round-trips and spells special values") {
  Rng rng(1);
  for (int k = 0; k < 1000; ++k) {
    const double x = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-30, 30));
    CHECK(std::stod(format_double(x)) == x);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_double(INFINITY) == "inf");
  CHECK(format_double(-INFINITY) == "-inf");
}

TEST_CASE("matrix JSON round trip") {
  Rng rng(2);
  const Matrix a = gen::uniform_matrix(3, 4, rng);
  CHECK(matrix_from_json(matrix_to_json(a)) == a);
  CHECK_THROWS_AS(matrix_from_json(Json::parse("[[1, 2], [3]]")), InputError);
  CHECK_THROWS_AS(matrix_from_json(Json::parse("[[1, \"x\"]]")), InputError);
  CHECK_THROWS_AS(matrix_from_json(Json::parse("{}")), InputError);
}

TEST_CASE("low-rank instance document") {
  Rng rng(3);
  const LowRankMatrix l = make_low_rank_matrix(5, 4, 2, MatrixStyle::Homogeneous, rng);
  const Json j = to_json(l);
  for (const char* key : {"m", "n", "r", "entries", "mu", "kappa", "seed"}) CHECK(j.contains(key));
  const LowRankMatrix back = low_rank_from_json(Json::parse(j.dump()));
  CHECK(back.matrix == l.matrix);
  CHECK(back.seed == l.seed);
  CHECK(std::abs(back.mu - l.mu) < 1e-12);
  Json tampered = j;
  tampered["kappa"] = l.kappa * 2;
  CHECK_THROWS_AS(low_rank_from_json(tampered), InputError);
  Json truncated = j;
  truncated.erase("seed");
  CHECK_THROWS_AS(low_rank_from_json(truncated), InputError);
}

TEST_CASE("frequency estimate and panel documents") {
  FrequencyEstimate e;
  e.M_hat = Matrix::Identity(2, 2) * 0.5;
  e.P_hat = Matrix::Identity(2, 2);
  e.r = 2;
  e.tau = 3;
  e.T = 99;
  const Json j = to_json(e);
  CHECK(j.size() == 5);
  CHECK(j.at("tau") == 3);
  CHECK(j.at("T") == 99);
  CHECK(matrix_from_json(j.at("P_hat")) == e.P_hat);

  ErrorPanel p;
  p.spectral = 0.25;
  CHECK(to_json(p).at("p_one_to_inf").is_null());
  CHECK(error_panel_csv_cells(p) == "0.25,0,0,0,,,0,0");
  p.p_one_to_inf = 0.125;
  p.p_entry_max = 1.5;
  CHECK(to_json(p).at("p_one_to_inf") == 0.125);
  CHECK(error_panel_csv_cells(p) == "0.25,0,0,0,0.125,1.5,0,0");
}
