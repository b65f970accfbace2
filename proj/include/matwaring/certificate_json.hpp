#pragma once

#include "matwaring/decompose.hpp"
#include "matwaring/json_io.hpp"

namespace matwaring::io {

// ---------------------------------------------------------------------------
// Certificates

inline Json step_to_json(const waring::Step& s) {
  return Json{{"name", s.name},
              {"term", s.term},
              {"T", matrix_to_json(s.cert.T)},
              {"Tinv", matrix_to_json(s.cert.Tinv)},
              {"from", matrix_to_json(s.cert.from)},
              {"to", matrix_to_json(s.cert.to)},
              {"residualInverse", s.cert.residualInverse},
              {"residualMap", s.cert.residualMap},
              {"conditionEstimate", s.cert.conditionEstimate}};
}

inline Json certificate_to_json(const waring::WaringCertificate& c) {
  Json j;
  j["format"] = kCertificateFormat;
  j["version"] = kCertificateVersion;
  j["mode"] = waring::to_string(c.mode);
  j["polynomial"] = c.polynomial;
  j["n"] = c.n;
  j["target"] = matrix_to_json(c.target);
  j["witness"] = Json{{"matrix", matrix_to_json(c.witnessB)}, {"args", matrices_to_json(c.witnessArgs)}};
  if (c.mode == waring::Mode::FiveTerm)
    j["traceWitness"] = Json{{"matrix", matrix_to_json(c.traceWitness)}, {"args", matrices_to_json(c.traceArgs)}};
  Json tuples = Json::array();
  for (const auto& t : c.tuples) tuples.push_back(matrices_to_json(t));
  j["tuples"] = std::move(tuples);
  j["terms"] = matrices_to_json(c.terms);
  Json coeffs = Json::array();
  for (const auto& z : c.coefficients) coeffs.push_back(complex_to_json(z));
  j["coefficients"] = std::move(coeffs);
  j["residual"] = c.residual;
  j["tolerances"] = tolerances_to_json(c.tolerances);
  Json steps = Json::array();
  for (const auto& s : c.steps) steps.push_back(step_to_json(s));
  j["steps"] = std::move(steps);
  return j;
}

}  // namespace matwaring::io
