#pragma once

#include <optional>
#include <string>
#include <vector>

#include "matwaring/freealg.hpp"
#include "matwaring/json_io.hpp"

// Re-checks a serialized certificate from its stored data alone. Only the
// polynomial parser/evaluator and plain matrix arithmetic are used here; none
// of the construction code is reachable from this header.

namespace matwaring::verify {

struct Report {
  bool ok = true;
  std::string failure;              // first failing bound, empty when ok
  std::vector<std::string> passed;  // bounds checked, in order
  double residual = 0.0;            // recomputed ||target - sum c_i f(tuple_i)||_F
};

namespace detail {

struct Checker {
  Report report;

  bool check(bool holds, const std::string& what) {
    if (!report.ok) return false;
    if (holds) {
      report.passed.push_back(what);
    } else {
      report.ok = false;
      report.failure = what;
    }
    return holds;
  }
};

inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

inline bool exactly(Complex z, double re) { return z.real() == re && z.imag() == 0.0; }

}  // namespace detail

/// Every bound in the certificate, stopping at the first violation.
/// Structural problems (missing fields, wrong sizes) raise Error(Format).
inline Report verify_certificate(const io::Json& j) {
  using io::matrix_from_json;
  using io::matrices_from_json;
  detail::Checker ck;

  if (!j.is_object() || j.value("format", "") != io::kCertificateFormat)
    throw Error(ErrorKind::Format, "not a certificate document");
  for (const char* key : {"mode", "polynomial", "n", "target", "witness", "tuples", "terms", "coefficients", "tolerances", "steps"})
    if (!j.contains(key)) throw Error(ErrorKind::Format, std::string("certificate lacks \"") + key + "\"");

  const std::string mode = j["mode"].get<std::string>();
  const std::string poly_text = j["polynomial"].get<std::string>();
  const auto n = static_cast<Index>(j["n"].get<long long>());
  const Tolerances tol = io::tolerances_from_json(j["tolerances"]);
  const CMatrix target = matrix_from_json(j["target"]);
  const CMatrix witness = matrix_from_json(j["witness"]["matrix"]);
  const auto witness_args = matrices_from_json(j["witness"].value("args", io::Json::array()));
  std::vector<std::vector<CMatrix>> tuples;
  for (const auto& t : j["tuples"]) tuples.push_back(matrices_from_json(t));
  const auto stored_terms = matrices_from_json(j["terms"]);
  std::vector<Complex> coeffs;
  for (const auto& c : j["coefficients"]) coeffs.push_back(io::complex_from_json(c));
  if (target.rows() != n || witness.rows() != n) throw Error(ErrorKind::Format, "matrix sizes disagree with n");

  // Sign discipline.
  const std::vector<double> four{1, -1, 1, -1};
  auto signs_are = [&](std::size_t first, const std::vector<double>& want) {
    if (coeffs.size() != first + want.size()) return false;
    for (std::size_t i = 0; i < want.size(); ++i)
      if (!detail::exactly(coeffs[first + i], want[i])) return false;
    return true;
  };
  if (mode == "FourTerm") ck.check(signs_are(0, four), "sign discipline: FourTerm coefficients are (+1,-1,+1,-1)");
  else if (mode == "TwoTerm") ck.check(signs_are(0, {1, -1}), "sign discipline: TwoTerm coefficients are (+1,-1)");
  else if (mode == "FiveTerm") ck.check(signs_are(1, four), "sign discipline: FiveTerm coefficients are (c0,+1,-1,+1,-1)");
  else throw Error(ErrorKind::Format, "unknown mode " + mode);

  // Terms: recomputed from the tuples whenever a polynomial is present.
  std::optional<freealg::NcPolynomial> f;
  if (!poly_text.empty()) f = freealg::parse(poly_text);
  std::vector<CMatrix> terms;
  if (f) {
    ck.check(tuples.size() == coeffs.size(), "one argument tuple per coefficient");
    if (!ck.report.ok) return ck.report;
    for (const auto& t : tuples) {
      for (const auto& a : t)
        if (a.rows() != n || a.cols() != n) throw Error(ErrorKind::Format, "tuple matrix has the wrong size");
      terms.push_back(freealg::evaluate(*f, t, n));
    }
  } else {
    ck.check(stored_terms.size() == coeffs.size(), "one term per coefficient");
    if (!ck.report.ok) return ck.report;
    terms = stored_terms;
  }

  CMatrix sum = CMatrix::Zero(n, n);
  for (std::size_t i = 0; i < terms.size(); ++i) sum += coeffs[i] * terms[i];
  ck.report.residual = (target - sum).norm();
  const double end_bound = tol.endTol * std::max(1.0, target.norm());
  ck.check(ck.report.residual <= end_bound,
           "reconstruction residual " + detail::fmt(ck.report.residual) + " <= endTol*max(1,||target||) = " + detail::fmt(end_bound));

  // Witnesses are genuine image points.
  auto image_matches = [&](const CMatrix& b, const std::vector<CMatrix>& args, const std::string& what) {
    const CMatrix fb = freealg::evaluate(*f, args, n);
    const double d = (fb - b).norm();
    const double bound = tol.certTol * std::max(1.0, b.norm());
    ck.check(d <= bound, what + " equals f(args): " + detail::fmt(d) + " <= " + detail::fmt(bound));
  };
  if (f) image_matches(witness, witness_args, "witness");
  if (mode == "FiveTerm") {
    if (!j.contains("traceWitness")) throw Error(ErrorKind::Format, "FiveTerm certificate lacks \"traceWitness\"");
    const CMatrix tw = matrix_from_json(j["traceWitness"]["matrix"]);
    const auto targs = matrices_from_json(j["traceWitness"]["args"]);
    if (f) {
      image_matches(tw, targs, "trace witness");
      bool same = tuples.size() >= 1 && tuples[0].size() == targs.size();
      for (std::size_t k = 0; same && k < targs.size(); ++k) same = tuples[0][k] == targs[k];
      ck.check(same, "first tuple is the trace witness arguments");
    }
    ck.check(std::abs(tw.trace()) > tol.traceTol * tw.norm(), "trace witness has nonzero trace");
  }

  // Similarity steps.
  const auto& steps = j["steps"];
  std::vector<bool> term_certified(coeffs.size(), false);
  for (std::size_t si = 0; si < steps.size(); ++si) {
    const auto& s = steps[si];
    const std::string name = s.value("name", "step" + std::to_string(si));
    const int term = s.value("term", -1);
    const CMatrix T = matrix_from_json(s["T"]);
    const CMatrix Tinv = matrix_from_json(s["Tinv"]);
    const CMatrix from = matrix_from_json(s["from"]);
    const CMatrix to = matrix_from_json(s["to"]);
    const Index m = T.rows();
    if (Tinv.rows() != m || from.rows() != m || to.rows() != m) throw Error(ErrorKind::Format, "step " + name + " has inconsistent sizes");
    const double res_inv = (T * Tinv - CMatrix::Identity(m, m)).norm();
    const double res_map = (T * from * Tinv - to).norm();
    const double kappa = T.norm() * Tinv.norm();
    ck.check(res_inv <= tol.certTol, "step " + name + ": ||T Tinv - I|| = " + detail::fmt(res_inv) + " <= certTol");
    const double map_bound = tol.certTol * kappa * from.norm();
    ck.check(res_map <= map_bound, "step " + name + ": ||T from Tinv - to|| = " + detail::fmt(res_map) + " <= certTol*kappa*||from|| = " + detail::fmt(map_bound));
    if (term < 0) continue;
    if (static_cast<std::size_t>(term) >= coeffs.size()) throw Error(ErrorKind::Format, "step " + name + " names a missing term");
    const double wd = (from - witness).norm();
    ck.check(wd <= tol.certTol * std::max(1.0, witness.norm()), "step " + name + " starts at the witness");
    if (f) {
      const auto& tuple = tuples[static_cast<std::size_t>(term)];
      bool ok = tuple.size() == witness_args.size();
      double worst = 0.0;
      for (std::size_t k = 0; ok && k < tuple.size(); ++k) {
        const double d = (T * witness_args[k] * Tinv - tuple[k]).norm();
        worst = std::max(worst, d / (kappa * std::max(1.0, witness_args[k].norm())));
      }
      ck.check(ok && worst <= tol.certTol, "step " + name + ": tuple equals T args Tinv (relative " + detail::fmt(worst) + ")");
    } else {
      const double d = (to - stored_terms[static_cast<std::size_t>(term)]).norm();
      ck.check(d <= tol.certTol * kappa * std::max(1.0, witness.norm()), "step " + name + " ends at its term");
    }
    term_certified[static_cast<std::size_t>(term)] = true;
  }

  // Every signed term must be tied to the witness (five-term c0 term is the trace witness itself).
  for (std::size_t i = 0; i < term_certified.size(); ++i) {
    if (mode == "FiveTerm" && i == 0) continue;
    ck.check(term_certified[i], "term " + std::to_string(i + 1) + " has a similarity chain from the witness");
  }
  return ck.report;
}

}  // namespace matwaring::verify
