#pragma once

#include <cmath>
#include <nlohmann/json.hpp>

#include "mgbeam/cm.hpp"
#include "mgbeam/model.hpp"
#include "mgbeam/pagd.hpp"

namespace mgbeam {

using nlohmann::json;

namespace detail {

/// Non-finite values become null so that certificates of baseline solvers
/// (NaN) round-trip as "not available".
inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json complex_to_json(cdouble z) { return json::array({z.real(), z.imag()}); }

inline cdouble complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw DimensionError("complex entries are [re, im] pairs");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

}  // namespace detail

/// Row-major list of rows, each entry an [re, im] pair.
inline json matrix_to_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(detail::complex_to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline CMatrix matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw DimensionError("matrix has the wrong number of rows");
  }
  CMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j.at(static_cast<std::size_t>(r));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw DimensionError("matrix row has the wrong number of entries");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = detail::complex_from_json(row.at(static_cast<std::size_t>(c)));
    }
  }
  return m;
}

inline json to_json(const Scenario& s) {
  json j;
  j["L"] = s.L;
  j["G"] = s.G;
  j["group_sizes"] = s.group_sizes;
  j["H"] = matrix_to_json(s.H);
  j["noise_power"] = std::vector<double>(s.noise_power.data(), s.noise_power.data() + s.noise_power.size());
  j["P_t"] = s.P_t;
  j["weights"] = std::vector<double>(s.weights.data(), s.weights.data() + s.weights.size());
  return j;
}

inline Scenario scenario_from_json(const json& j) {
  Scenario s;
  s.L = j.at("L").get<int>();
  s.G = j.at("G").get<int>();
  s.group_sizes = j.at("group_sizes").get<std::vector<int>>();
  const auto noise = j.at("noise_power").get<std::vector<double>>();
  const auto weights = j.at("weights").get<std::vector<double>>();
  s.noise_power = Eigen::Map<const RVector>(noise.data(), static_cast<Eigen::Index>(noise.size()));
  s.weights = Eigen::Map<const RVector>(weights.data(), static_cast<Eigen::Index>(weights.size()));
  s.P_t = j.at("P_t").get<double>();
  s.H = matrix_from_json(j.at("H"), s.L, s.num_users());
  s.validate();
  return s;
}

inline json to_json(const KktResiduals& r) {
  return {{"stationarity", detail::finite_or_null(r.stationarity)},
          {"hyperplane", detail::finite_or_null(r.hyperplane)},
          {"complementary_slackness", detail::finite_or_null(r.complementary_slackness)},
          {"dual_feasibility", detail::finite_or_null(r.dual_feasibility)},
          {"structure_fit", detail::finite_or_null(r.structure_fit)},
          {"structure_fit_identity", detail::finite_or_null(r.structure_fit_identity)}};
}

inline json to_json(const PagdReport& r) {
  json j;
  j["W"] = matrix_to_json(r.beamformer.W);
  j["delta"] = std::vector<double>(r.duals.delta.data(), r.duals.delta.data() + r.duals.delta.size());
  j["primal"] = r.primal;
  j["dual"] = r.dual;
  j["duality_gap"] = r.duality_gap;
  j["relative_gap"] = r.relative_gap;
  j["residuals"] = to_json(r.residuals);
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  return j;
}

inline json to_json(const InnerStats& st) {
  return {{"iterations", st.iterations},
          {"converged", st.converged},
          {"duality_gap", detail::finite_or_null(st.duality_gap)},
          {"relative_gap", detail::finite_or_null(st.relative_gap)},
          {"kkt_stationarity", detail::finite_or_null(st.kkt_stationarity)},
          {"complementary_slackness", detail::finite_or_null(st.complementary_slackness)},
          {"hyperplane", detail::finite_or_null(st.hyperplane)}};
}

inline json to_json(const CmReport& r) {
  json j;
  j["W"] = matrix_to_json(r.beamformer.W);
  j["trajectory_bits"] = r.trajectory_bits;
  json inner = json::array();
  for (const auto& st : r.inner) inner.push_back(to_json(st));
  j["inner"] = std::move(inner);
  j["converged"] = r.converged;
  j["stop"] = to_string(r.stop);
  j["wall_time"] = r.wall_time;
  return j;
}

}  // namespace mgbeam
