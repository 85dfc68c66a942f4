#include "lowrank/serialization.hpp"

#include <charconv>
#include <cmath>

#include "lowrank/errors.hpp"

namespace lowrank {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

Json matrix_to_json(const Matrix& a) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array()) throw InputError("matrix_from_json: expected an array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = rows > 0 && j[0].is_array() ? j[0].size() : 0;
  Matrix a(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      throw InputError("matrix_from_json: row " + std::to_string(i) + " has the wrong length");
    for (std::size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number())
        throw InputError("matrix_from_json: non-numeric entry in row " + std::to_string(i));
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
    }
  }
  return a;
}

Json to_json(const LowRankMatrix& l) {
  return Json{{"m", l.rows()},   {"n", l.cols()},       {"r", l.r},
              {"entries", matrix_to_json(l.matrix)}, {"mu", l.mu},
              {"kappa", l.kappa}, {"seed", l.seed}};
}

LowRankMatrix low_rank_from_json(const Json& j) {
  try {
    LowRankMatrix l = low_rank_from_matrix(matrix_from_json(j.at("entries")), j.at("r").get<int>());
    if (l.rows() != j.at("m").get<int>() || l.cols() != j.at("n").get<int>())
      throw InputError("low_rank_from_json: shape disagrees with m and n");
    constexpr double kSlack = 1e-9;
    if (std::abs(l.mu - j.at("mu").get<double>()) > kSlack * l.mu ||
        std::abs(l.kappa - j.at("kappa").get<double>()) > kSlack * l.kappa)
      throw InputError("low_rank_from_json: stored mu or kappa disagrees with the entries");
    l.seed = j.at("seed").get<std::uint64_t>();
    return l;
  } catch (const Json::exception& e) {
    throw InputError(std::string("low_rank_from_json: ") + e.what());
  }
}

Json to_json(const FrequencyEstimate& e) {
  return Json{{"M_hat", matrix_to_json(e.M_hat)},
              {"P_hat", matrix_to_json(e.P_hat)},
              {"r", e.r},
              {"tau", e.tau},
              {"T", e.T}};
}

Json to_json(const ErrorPanel& p) {
  Json j{{"spectral", p.spectral},
         {"two_to_inf", p.two_to_inf},
         {"one_to_inf", p.one_to_inf},
         {"entry_max", p.entry_max},
         {"p_one_to_inf", nullptr},
         {"p_entry_max", nullptr},
         {"subspace_u", p.subspace_u},
         {"subspace_v", p.subspace_v},
         {"subspace_u_sign", p.subspace_u_sign},
         {"subspace_v_sign", p.subspace_v_sign}};
  if (p.p_one_to_inf) j["p_one_to_inf"] = *p.p_one_to_inf;
  if (p.p_entry_max) j["p_entry_max"] = *p.p_entry_max;
  return j;
}

std::string error_panel_csv_cells(const ErrorPanel& p) {
  auto optional_cell = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
  };
  return format_double(p.spectral) + ',' + format_double(p.two_to_inf) + ',' +
         format_double(p.one_to_inf) + ',' + format_double(p.entry_max) + ',' +
         optional_cell(p.p_one_to_inf) + ',' + optional_cell(p.p_entry_max) + ',' +
         format_double(p.subspace_u) + ',' + format_double(p.subspace_v);
}

}  // namespace lowrank
