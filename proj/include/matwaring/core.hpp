#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace matwaring {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Index = Eigen::Index;

enum class ErrorKind {
  Syntax,
  InvalidVariable,
  MalformedComplex,
  DimensionMismatch,
  TooFewArguments,
  NonConvergence,
  SpectraOverlap,
  IllConditioned,
  ClusterGapTooSmall,
  MultiplicityTooLarge,
  NonzeroTrace,
  InvalidParameter,
  InvalidPattern,
  ResidualTooLarge,
  CertificateFailure,
  BudgetExhausted,
  NotGeneric,
  PreconditionUnmet,
  Format,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Syntax: return "Syntax";
    case ErrorKind::InvalidVariable: return "InvalidVariable";
    case ErrorKind::MalformedComplex: return "MalformedComplex";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::TooFewArguments: return "TooFewArguments";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::SpectraOverlap: return "SpectraOverlap";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::ClusterGapTooSmall: return "ClusterGapTooSmall";
    case ErrorKind::MultiplicityTooLarge: return "MultiplicityTooLarge";
    case ErrorKind::NonzeroTrace: return "NonzeroTrace";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::InvalidPattern: return "InvalidPattern";
    case ErrorKind::ResidualTooLarge: return "ResidualTooLarge";
    case ErrorKind::CertificateFailure: return "CertificateFailure";
    case ErrorKind::BudgetExhausted: return "BudgetExhausted";
    case ErrorKind::NotGeneric: return "NotGeneric";
    case ErrorKind::PreconditionUnmet: return "PreconditionUnmet";
    case ErrorKind::Format: return "Format";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by the polynomial parser; `position` is a 0-based character offset.
class ParseError : public Error {
 public:
  ParseError(ErrorKind kind, std::size_t position, const std::string& what)
      : Error(kind, what + " at position " + std::to_string(position)), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Named numerical thresholds shared by every stage of the pipeline.
/// Relative tolerances are scaled by the quantity named next to them.
struct Tolerances {
  double gapTol = 1e-8;      // x spectral scale; minimum eigenvalue separation
  double clusterTol = 1e-7;  // x max|lambda|; eigenvalue clustering radius
  double hollowTol = 1e-10;  // x ||A||_F; trace-zero and zero-diagonal checks
  double splitTol = 1e-9;    // x max(1, ||M||_F); hollow split residual
  double certTol = 1e-9;     // similarity certificate residuals
  double endTol = 1e-6;      // x max(1, ||A||_F); final reconstruction
  double rankTol = 1e-10;    // x largest singular value
  double solveTol = 1e-10;   // relative Sylvester residual
  double backTol = 1e-12;    // x ||A||_F; Schur reconstruction
  double eigTol = 1e-6;      // spectra comparison between similar matrices
  double traceTol = 1e-8;    // x ||B||_F; nonzero-trace witness test
};

/// Independent generator for sample `index` of `stream` under `seed`.
/// Every sample owns its generator, so any partition of the index range
/// over workers reproduces the same draws.
inline std::mt19937_64 sample_rng(std::uint64_t seed, std::uint32_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream,
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

/// i.i.d. entries with standard normal real and imaginary parts.
inline CMatrix random_gaussian_matrix(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix m(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      m(i, j) = Complex(re, im);
    }
  }
  return m;
}

}  // namespace matwaring
