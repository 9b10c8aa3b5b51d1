// sharptrace: run experiment configs, list the experiment kinds, or write a
// radial kernel calibration.
//
//   sharptrace run <config.json>...
//   sharptrace list [--json]
//   sharptrace calibrate --out <path>
//
// SHARPTRACE_THREADS sets the OpenMP worker count (default: all cores).

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>

#include "sharptrace/errors.hpp"
#include "sharptrace/experiment.hpp"
#include "sharptrace/radial.hpp"

namespace ex = sharptrace::experiment;

namespace {

int apply_thread_setting() {
  const char* env = std::getenv("SHARPTRACE_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const long threads = std::strtol(env, &end, 10);
  if (*end != '\0' || threads < 1 || threads > 4096) {
    std::cerr << "SHARPTRACE_THREADS must be a positive integer, got '" << env << "'\n";
    return 1;
  }
  omp_set_num_threads(static_cast<int>(threads));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace and smoothing estimate experiments on dilated level sets"};
  app.set_version_flag("--version", ex::version());
  app.require_subcommand(1);

  std::vector<std::string> configs;
  auto* run = app.add_subcommand("run", "run experiment configs (all are validated before any runs)");
  run->add_option("config", configs, "config files")->required()->check(CLI::ExistingFile);

  bool as_json = false;
  auto* list = app.add_subcommand("list", "list the experiment kinds");
  list->add_flag("--json", as_json, "machine-readable listing");

  std::string out;
  auto* calibrate = app.add_subcommand("calibrate", "fit the radial kernel constant and write the artifact");
  calibrate->add_option("--out", out, "output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (const int bad = apply_thread_setting()) return bad;

  try {
    if (*run) return ex::run_files(configs, std::cerr);
    if (*list) {
      if (as_json) {
        std::cout << ex::list_json().dump(2) << "\n";
      } else {
        std::cout << ex::list_text();
      }
      return 0;
    }
    if (*calibrate) {
      const auto kernel = sharptrace::RadialKernel::calibrate();
      kernel.save(out);
      for (const auto& e : kernel.entries()) {
        std::cerr << "n=" << e.n << " kappa=" << e.kappa << " residual=" << e.residual << "\n";
      }
      std::cerr << "wrote " << out << "\n";
      return 0;
    }
  } catch (const sharptrace::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
