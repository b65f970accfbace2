// Command-line front end: decompose, verify, classify, search-image.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "matwaring/cli.hpp"

namespace {

using namespace matwaring;

void add_run_flags(CLI::App* app, cli::RunConfig& cfg) {
  app->add_option("--seed", cfg.seed, "master seed for all random sampling");
  app->add_option("--budget", cfg.budget, "maximum number of witness samples");
  app->add_option("--out", cfg.outputPath, "output file (default: standard output)");
#define X(name) app->add_option("--tol-" #name, cfg.tol.name, "tolerance " #name);
  MATWARING_TOLERANCE_FIELDS(X)
#undef X
}

int emit(const cli::CommandResult& r, const std::string& out_path) {
  if (r.output.empty()) return r.exitCode;
  if (out_path.empty()) {
    std::cout << r.output;
  } else {
    try {
      io::write_text_file(out_path, r.output);
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return cli::exit_code::kInputError;
    }
  }
  return r.exitCode;
}

io::Json load(const std::string& path, int& code) {
  try {
    return io::read_json_file(path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    code = cli::exit_code::kInputError;
    return {};
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Express trace-zero matrices through images of noncommutative polynomials"};
  app.require_subcommand(1);

  cli::RunConfig cfg;
  std::string poly, path, mode = "auto", goal = "MultiplicityHalf";
  long long n = 0;

  auto* decompose = app.add_subcommand("decompose", "write a certificate expressing a matrix through f");
  decompose->add_option("polynomial", poly, "polynomial, e.g. \"[X1,X2]\"")->required();
  decompose->add_option("matrix", path, "matrix JSON file {\"n\":..,\"entries\":[[re,im],..]}")->required();
  decompose->add_option("--mode", mode, "four | two | five | auto")->check(CLI::IsMember({"four", "two", "five", "auto"}));
  add_run_flags(decompose, cfg);

  auto* verify = app.add_subcommand("verify", "re-check a certificate from its stored data");
  verify->add_option("certificate", path, "certificate JSON file")->required();

  auto* classify = app.add_subcommand("classify", "probabilistic identity/central classification");
  classify->add_option("polynomial", poly)->required();
  classify->add_option("--n", n, "matrix size")->required()->check(CLI::PositiveNumber);
  classify->add_option("--seed", cfg.seed);
  classify->add_option("--samples", cfg.samples);

  auto* search = app.add_subcommand("search-image", "find an image point of f with a spectral property");
  search->add_option("polynomial", poly)->required();
  search->add_option("--n", n, "matrix size")->required()->check(CLI::PositiveNumber);
  search->add_option("--goal", goal, "MultiplicityHalf | DistinctEigs | NonzeroTrace");
  add_run_flags(search, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::exit_code::kInputError;
  }

  int code = cli::exit_code::kOk;
  if (*decompose) {
    const auto m = load(path, code);
    if (code != 0) return code;
    return emit(cli::cmd_decompose(poly, m, mode, cfg, std::cerr), cfg.outputPath);
  }
  if (*verify) {
    const auto c = load(path, code);
    if (code != 0) return code;
    const auto r = cli::cmd_verify(c, std::cerr);
    std::cout << r.output;
    return r.exitCode;
  }
  if (*classify) return emit(cli::cmd_classify(poly, static_cast<Index>(n), cfg, std::cerr), "");
  return emit(cli::cmd_search_image(poly, static_cast<Index>(n), goal, cfg, std::cerr), cfg.outputPath);
}
