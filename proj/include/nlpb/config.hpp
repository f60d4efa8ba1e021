#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nlpb/stepper.hpp"

namespace nlpb {

enum class Command { Evolve, Consistency, Converge, Decay, Poincare, Contraction, Denoise };

/// Parsed `key = value` experiment file. Defaults are listed in the README.
struct ExperimentConfig {
  Command command = Command::Evolve;
  std::string kernel = "tent";
  double epsilon = 0.2;
  std::vector<double> epsilon_list;  // strictly decreasing
  double p = 2.0;
  int dim = 1;
  int nx = 64;
  int ny = 0;  // 0: same as nx
  double lo = 0.0;
  double hi = 1.0;
  double h = 0.005;
  double T = 1.0;
  std::uint64_t seed = 1;
  StepMode mode = StepMode::Implicit;
  InnerSolver solver = InnerSolver::Newton;
  int record_every = 1;
  std::string initial = "random";  // zero | bump | random | sine
  double amplitude = 1.0;
  double inner_tol = 0.0;
  int inner_max_iters = 5000;
  double flux_delta = 0.0;
  std::string test_function = "sin";  // sin | quadratic
  double q = 2.0;
  int pairs = 5;
  double perturbation = 0.1;
  std::string input;
  std::string output = "denoised.pgm";
  /// Raw file text, hashed into the manifest.
  std::string source;

  StepperConfig stepper() const;
};

std::string command_name(Command c);

/// Throws ConfigError(line, key) for syntax errors, unknown keys and values
/// outside the preconditions of the target command; IoError if unreadable.
ExperimentConfig parse_config(const std::filesystem::path& path);
ExperimentConfig parse_config_text(const std::string& text);

}  // namespace nlpb
