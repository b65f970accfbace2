#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <algorithm>
#include <span>
#include <vector>

#include <json.hpp>

#include "matwaring/core.hpp"

namespace matwaring::io {

using Json = nlohmann::ordered_json;

inline constexpr const char* kCertificateFormat = "matwaring-certificate";
inline constexpr int kCertificateVersion = 1;

// ---------------------------------------------------------------------------
// Matrices: {"n": n, "entries": [[re, im], ...]} row-major

inline Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw Error(ErrorKind::Format, "complex entry must be [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline Json matrix_to_json(const CMatrix& m) {
  Json entries = Json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) entries.push_back(complex_to_json(m(i, j)));
  return Json{{"n", m.rows()}, {"entries", std::move(entries)}};
}

inline CMatrix matrix_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("entries"))
    throw Error(ErrorKind::Format, "matrix must be an object with \"n\" and \"entries\"");
  if (!j["n"].is_number_integer() || j["n"].get<long long>() < 0) throw Error(ErrorKind::Format, "matrix \"n\" must be a nonnegative integer");
  const auto n = static_cast<Index>(j["n"].get<long long>());
  const auto& e = j["entries"];
  if (!e.is_array() || static_cast<Index>(e.size()) != n * n)
    throw Error(ErrorKind::Format, "matrix \"entries\" must hold n*n = " + std::to_string(n * n) + " values");
  CMatrix m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < n; ++k) {
      const Complex z = complex_from_json(e[static_cast<std::size_t>(i * n + k)]);
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw Error(ErrorKind::Format, "matrix entries must be finite");
      m(i, k) = z;
    }
  return m;
}

inline Json matrices_to_json(std::span<const CMatrix> ms) {
  Json a = Json::array();
  for (const auto& m : ms) a.push_back(matrix_to_json(m));
  return a;
}

inline std::vector<CMatrix> matrices_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorKind::Format, "expected an array of matrices");
  std::vector<CMatrix> out;
  for (const auto& m : j) out.push_back(matrix_from_json(m));
  return out;
}

// ---------------------------------------------------------------------------
// Tolerances

#define MATWARING_TOLERANCE_FIELDS(X) \
  X(gapTol) X(clusterTol) X(hollowTol) X(splitTol) X(certTol) X(endTol) X(rankTol) X(solveTol) X(backTol) X(eigTol) X(traceTol)

inline Json tolerances_to_json(const Tolerances& t) {
  Json j = Json::object();
#define X(name) j[#name] = t.name;
  MATWARING_TOLERANCE_FIELDS(X)
#undef X
  return j;
}

inline Tolerances tolerances_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Format, "\"tolerances\" must be an object");
  Tolerances t;
#define X(name)                                                                               \
  if (j.contains(#name)) {                                                                    \
    if (!j[#name].is_number() || !(j[#name].get<double>() > 0.0))                             \
      throw Error(ErrorKind::Format, "tolerance " #name " must be a positive number");       \
    t.name = j[#name].get<double>();                                                          \
  }
  MATWARING_TOLERANCE_FIELDS(X)
#undef X
  return t;
}

// ---------------------------------------------------------------------------
// Serialization with 17 significant digits

namespace detail {

inline void write_string(std::ostream& os, const std::string& s) {
  os << Json(s).dump();
}

inline void write_number(std::ostream& os, double x) {
  if (!std::isfinite(x)) {
    os << "null";
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x == 0.0 ? 0.0 : x);
  os << buf;
}

inline void write(std::ostream& os, const Json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  // Arrays of scalars stay on one line.
  auto flat = [](const Json& a) {
    return std::all_of(a.begin(), a.end(), [](const Json& e) { return !e.is_structured() || (e.is_array() && e.size() <= 2 && std::all_of(e.begin(), e.end(), [](const Json& x) { return !x.is_structured(); })); });
  };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) { os << "{}"; return; }
      os << '{' << nl;
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) os << ',' << nl;
        first = false;
        os << pad;
        write_string(os, k);
        os << (indent > 0 ? ": " : ":");
        write(os, v, indent, depth + 1);
      }
      os << nl << close_pad << '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) { os << "[]"; return; }
      if (flat(j)) {
        os << '[';
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) os << ", ";
          write(os, j[i], 0, 0);
        }
        os << ']';
        return;
      }
      os << '[' << nl;
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ',' << nl;
        os << pad;
        write(os, j[i], indent, depth + 1);
      }
      os << nl << close_pad << ']';
      return;
    }
    case Json::value_t::number_float: write_number(os, j.get<double>()); return;
    case Json::value_t::string: write_string(os, j.get<std::string>()); return;
    default: os << j.dump(); return;
  }
}

}  // namespace detail

/// Deterministic text: insertion-ordered keys, doubles as %.17g.
inline std::string dump(const Json& j, int indent = 1) {
  std::ostringstream os;
  detail::write(os, j, indent, 0);
  os << '\n';
  return os.str();
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Format, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Format, "cannot write " + path);
  out << text;
}

}  // namespace matwaring::io
