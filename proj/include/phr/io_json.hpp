#pragma once

#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "phr/config.hpp"
#include "phr/errors.hpp"
#include "phr/numeric.hpp"
#include "phr/ph_form.hpp"
#include "phr/positive_real.hpp"
#include "phr/synthesis.hpp"
#include "phr/system.hpp"

namespace phr {

namespace detail {

inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j, const std::string& key) {
  if (!j.is_array()) {
    throw InvalidInputError("matrix '" + key + "' must be an array of rows");
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Matrix(0, 0);
  if (!j[0].is_array()) {
    throw InvalidInputError("matrix '" + key + "' rows must be arrays");
  }
  const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!j[i].is_array() || static_cast<Eigen::Index>(j[i].size()) != cols) {
      throw InvalidInputError("matrix '" + key + "' has ragged rows");
    }
    for (Eigen::Index jj = 0; jj < cols; ++jj) {
      if (!j[i][jj].is_number()) {
        throw InvalidInputError("matrix '" + key + "' has a non-numeric entry");
      }
      m(i, jj) = j[i][jj].get<double>();
    }
  }
  return m;
}

}  // namespace detail

struct SystemFile {
  DescriptorSystem system{Matrix(0, 0), Matrix(0, 0), Matrix(0, 0),
                          Matrix(0, 0), Matrix(0, 0)};
  std::string name;
  std::optional<ToleranceConfig> tolerances;
};

inline ToleranceConfig tolerances_from_json(const nlohmann::json& j,
                                            ToleranceConfig base) {
  if (j.contains("rank_rtol")) base.rank_rtol = j.at("rank_rtol").get<double>();
  if (j.contains("psd_tol")) base.psd_tol = j.at("psd_tol").get<double>();
  if (j.contains("residual_tol")) {
    base.residual_tol = j.at("residual_tol").get<double>();
  }
  if (j.contains("tf_rtol")) base.tf_rtol = j.at("tf_rtol").get<double>();
  if (j.contains("sample_count")) {
    base.sample_count = j.at("sample_count").get<int>();
  }
  if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
  base.validate();
  return base;
}

inline nlohmann::json tolerances_to_json(const ToleranceConfig& cfg) {
  return nlohmann::json{{"rank_rtol", cfg.rank_rtol},
                        {"psd_tol", cfg.psd_tol},
                        {"residual_tol", cfg.residual_tol},
                        {"tf_rtol", cfg.tf_rtol},
                        {"sample_count", cfg.sample_count},
                        {"seed", cfg.seed}};
}

inline SystemFile system_from_json(const nlohmann::json& j) {
  for (const char* key : {"E", "A", "B", "C", "D"}) {
    if (!j.contains(key)) {
      throw InvalidInputError(std::string("system file is missing matrix '") +
                              key + "'");
    }
  }
  SystemFile f;
  f.system = DescriptorSystem(detail::matrix_from_json(j.at("E"), "E"),
                              detail::matrix_from_json(j.at("A"), "A"),
                              detail::matrix_from_json(j.at("B"), "B"),
                              detail::matrix_from_json(j.at("C"), "C"),
                              detail::matrix_from_json(j.at("D"), "D"));
  if (j.contains("name")) f.name = j.at("name").get<std::string>();
  if (j.contains("tolerances")) {
    f.tolerances = tolerances_from_json(j.at("tolerances"), ToleranceConfig{});
  }
  return f;
}

inline nlohmann::json system_to_json(const DescriptorSystem& sys,
                                     const std::string& name = "") {
  nlohmann::json j{{"E", detail::matrix_to_json(sys.E)},
                   {"A", detail::matrix_to_json(sys.A)},
                   {"B", detail::matrix_to_json(sys.B)},
                   {"C", detail::matrix_to_json(sys.C)},
                   {"D", detail::matrix_to_json(sys.D)}};
  if (!name.empty()) j["name"] = name;
  return j;
}

inline SystemFile load_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError("cannot parse JSON in " + path + ": " + e.what());
  }
  return system_from_json(j);
}

inline nlohmann::json certificate_to_json(const Certificate& cert) {
  return nlohmann::json{
      {"Q", detail::matrix_to_json(cert.Q)},
      {"W", detail::matrix_to_json(cert.W)},
      {"residuals",
       {{"lmi_margin", cert.lmi_margin},
        {"etq_psd_margin", cert.etq_psd_margin},
        {"etq_sym_residual", cert.etq_sym_residual},
        {"etw_residual", cert.etw_residual}}},
      {"valid", cert.valid}};
}

inline nlohmann::json realization_to_json(const RealizationResult& result) {
  nlohmann::json j;
  j["system"] = system_to_json(result.system);
  j["ph"] = nlohmann::json{{"J", detail::matrix_to_json(result.ph.J)},
                           {"R", detail::matrix_to_json(result.ph.R)},
                           {"Q", detail::matrix_to_json(result.ph.Q)},
                           {"G", detail::matrix_to_json(result.ph.G)},
                           {"P", detail::matrix_to_json(result.ph.P)},
                           {"S", detail::matrix_to_json(result.ph.S)},
                           {"N", detail::matrix_to_json(result.ph.N)}};
  j["certificate"] = certificate_to_json(result.certificate);
  nlohmann::json prov{{"path", result.provenance.path},
                      {"alpha", result.provenance.alpha},
                      {"beta", result.provenance.beta},
                      {"tf_max_rel_err", result.provenance.tf_max_rel_err},
                      {"notes", result.provenance.notes}};
  prov["W"] = detail::matrix_to_json(result.provenance.W);
  prov["staircase_blocks"] = result.provenance.staircase_blocks;
  if (result.provenance.M0.size() > 0) {
    prov["M0"] = detail::matrix_to_json(result.provenance.M0);
    prov["M1"] = detail::matrix_to_json(result.provenance.M1);
  }
  j["provenance"] = std::move(prov);
  return j;
}

struct RealizationFile {
  DescriptorSystem system{Matrix(0, 0), Matrix(0, 0), Matrix(0, 0),
                          Matrix(0, 0), Matrix(0, 0)};
  PHForm ph;
  Matrix Q;  // certificate
  Matrix W;
};

inline RealizationFile load_realization_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError("cannot parse JSON in " + path + ": " + e.what());
  }
  if (!j.contains("system") || !j.contains("ph") || !j.contains("certificate")) {
    throw InvalidInputError(
        "realization file needs 'system', 'ph' and 'certificate' objects");
  }
  RealizationFile f;
  f.system = system_from_json(j.at("system")).system;
  const auto& ph = j.at("ph");
  for (const char* key : {"J", "R", "Q", "G", "P", "S", "N"}) {
    if (!ph.contains(key)) {
      throw InvalidInputError(std::string("ph object is missing matrix '") +
                              key + "'");
    }
  }
  f.ph.E = f.system.E;
  f.ph.J = detail::matrix_from_json(ph.at("J"), "J");
  f.ph.R = detail::matrix_from_json(ph.at("R"), "R");
  f.ph.Q = detail::matrix_from_json(ph.at("Q"), "Q");
  f.ph.G = detail::matrix_from_json(ph.at("G"), "G");
  f.ph.P = detail::matrix_from_json(ph.at("P"), "P");
  f.ph.S = detail::matrix_from_json(ph.at("S"), "S");
  f.ph.N = detail::matrix_from_json(ph.at("N"), "N");
  f.Q = detail::matrix_from_json(j.at("certificate").at("Q"), "certificate.Q");
  if (j.at("certificate").contains("W")) {
    f.W = detail::matrix_from_json(j.at("certificate").at("W"), "certificate.W");
  } else {
    f.W = Matrix::Zero(f.system.n(), f.system.m());
  }
  return f;
}

}  // namespace phr
