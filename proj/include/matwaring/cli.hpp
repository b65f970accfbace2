#pragma once

#include <ostream>
#include <string>

#include "matwaring/certificate_json.hpp"
#include "matwaring/decompose.hpp"
#include "matwaring/json_io.hpp"
#include "matwaring/verify.hpp"

namespace matwaring::cli {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kVerifyFailed = 1;
inline constexpr int kInputError = 2;
inline constexpr int kNotGeneric = 3;
inline constexpr int kBudgetExhausted = 4;
inline constexpr int kNumericalFailure = 5;
inline constexpr int kPreconditionUnmet = 6;
}  // namespace exit_code

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Syntax:
    case ErrorKind::InvalidVariable:
    case ErrorKind::MalformedComplex:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::TooFewArguments:
    case ErrorKind::NonzeroTrace:
    case ErrorKind::InvalidParameter:
    case ErrorKind::InvalidPattern:
    case ErrorKind::Format: return exit_code::kInputError;
    case ErrorKind::NotGeneric: return exit_code::kNotGeneric;
    case ErrorKind::BudgetExhausted: return exit_code::kBudgetExhausted;
    case ErrorKind::PreconditionUnmet: return exit_code::kPreconditionUnmet;
    case ErrorKind::NonConvergence:
    case ErrorKind::SpectraOverlap:
    case ErrorKind::IllConditioned:
    case ErrorKind::ClusterGapTooSmall:
    case ErrorKind::MultiplicityTooLarge:
    case ErrorKind::ResidualTooLarge:
    case ErrorKind::CertificateFailure: return exit_code::kNumericalFailure;
  }
  return exit_code::kNumericalFailure;
}

struct RunConfig {
  std::uint64_t seed = 0;
  int budget = 1000;
  Tolerances tol;
  std::string outputPath;  // empty: standard output
  int samples = 32;        // classify only
};

inline void validate(const RunConfig& cfg) {
  if (cfg.budget < 1) throw Error(ErrorKind::InvalidParameter, "--budget must be >= 1");
  if (cfg.samples < 1) throw Error(ErrorKind::InvalidParameter, "--samples must be >= 1");
  const io::Json t = io::tolerances_to_json(cfg.tol);
  for (const auto& [name, v] : t.items())
    if (!(v.get<double>() > 0.0)) throw Error(ErrorKind::InvalidParameter, "tolerance " + name + " must be positive");
}

struct CommandResult {
  int exitCode = exit_code::kOk;
  std::string output;  // the document or verdict for standard output / --out
};

enum class DecomposeMode { Four, Two, Five, Auto };

inline DecomposeMode parse_mode(const std::string& s) {
  if (s == "four") return DecomposeMode::Four;
  if (s == "two") return DecomposeMode::Two;
  if (s == "five") return DecomposeMode::Five;
  if (s == "auto") return DecomposeMode::Auto;
  throw Error(ErrorKind::InvalidParameter, "--mode must be four, two, five or auto");
}

/// Runs `body`, mapping library errors onto exit codes and messages on `err`.
template <class Body>
CommandResult guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return {exit_code_for(e.kind()), {}};
  }
}

inline CommandResult cmd_decompose(const std::string& poly, const io::Json& matrix, const std::string& mode_text,
                                   const RunConfig& cfg, std::ostream& err) {
  return guarded(err, [&]() -> CommandResult {
    validate(cfg);
    const auto mode = parse_mode(mode_text);
    const auto f = freealg::parse(poly);
    CMatrix a = io::matrix_from_json(matrix);
    const waring::RunOptions opt{cfg.budget, cfg.seed, cfg.tol};
    const bool traceless = waring::is_traceless(a, cfg.tol);

    waring::WaringCertificate cert;
    switch (mode) {
      case DecomposeMode::Four:
        if (!traceless) throw Error(ErrorKind::NonzeroTrace, "four-term mode needs a traceless matrix");
        cert = waring::waring_express(f, a, opt);
        break;
      case DecomposeMode::Two:
        if (!traceless) throw Error(ErrorKind::NonzeroTrace, "two-term mode needs a traceless matrix");
        cert = waring::two_term_decompose(f, a, opt);
        break;
      case DecomposeMode::Five:
        cert = waring::five_term_express(f, a, opt);
        break;
      case DecomposeMode::Auto:
        if (!traceless) {
          err << "warning: input trace " << std::abs(a.trace()) << " removed by projecting onto trace zero\n";
          a = linalg::project_traceless(a);
        }
        cert = waring::is_prime(a.rows()) || f.is_multilinear() ? waring::two_term_decompose(f, a, opt)
                                                                 : waring::waring_express(f, a, opt);
        break;
    }
    return {exit_code::kOk, io::dump(io::certificate_to_json(cert))};
  });
}

inline CommandResult cmd_verify(const io::Json& certificate, std::ostream& err) {
  return guarded(err, [&]() -> CommandResult {
    try {
      const auto report = verify::verify_certificate(certificate);
      if (!report.ok) return {exit_code::kVerifyFailed, "FAIL: " + report.failure + "\n"};
      return {exit_code::kOk, "OK: " + std::to_string(report.passed.size()) + " bounds hold; residual " +
                                  verify::detail::fmt(report.residual) + "\n"};
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Format, e.what());
    }
  });
}

inline CommandResult cmd_classify(const std::string& poly, Index n, const RunConfig& cfg, std::ostream& err) {
  return guarded(err, [&]() -> CommandResult {
    validate(cfg);
    const auto f = freealg::parse(poly);
    freealg::ClassifyOptions opt;
    opt.samples = cfg.samples;
    opt.seed = cfg.seed;
    const auto c = freealg::classify(f, n, opt);
    return {exit_code::kOk, freealg::to_string(c) + "\n"};
  });
}

inline waring::Goal parse_goal(const std::string& s) {
  if (s == "MultiplicityHalf" || s == "multiplicity-half") return waring::Goal::MultiplicityHalf;
  if (s == "DistinctEigs" || s == "distinct-eigs") return waring::Goal::DistinctEigs;
  if (s == "NonzeroTrace" || s == "nonzero-trace") return waring::Goal::NonzeroTrace;
  throw Error(ErrorKind::InvalidParameter, "--goal must be MultiplicityHalf, DistinctEigs or NonzeroTrace");
}

inline CommandResult cmd_search_image(const std::string& poly, Index n, const std::string& goal_text,
                                      const RunConfig& cfg, std::ostream& err) {
  return guarded(err, [&]() -> CommandResult {
    validate(cfg);
    const auto goal = parse_goal(goal_text);
    const auto f = freealg::parse(poly);
    const auto w = waring::image_search(f, n, goal, cfg.budget, cfg.seed, cfg.tol);
    io::Json j;
    j["polynomial"] = freealg::to_string(f);
    j["goal"] = waring::to_string(goal);
    j["seed"] = cfg.seed;
    j["sampleIndex"] = w.sampleIndex;
    j["matrix"] = io::matrix_to_json(w.B);
    j["args"] = io::matrices_to_json(w.args);
    return {exit_code::kOk, io::dump(j)};
  });
}

}  // namespace matwaring::cli
