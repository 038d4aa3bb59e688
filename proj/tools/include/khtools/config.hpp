#ifndef KHTOOLS_CONFIG_HPP
#define KHTOOLS_CONFIG_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kh/problems.hpp"
#include "kh/proximal.hpp"

namespace khtools {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Method { KatyushaH, Fista, Pgd, Psgd };
std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct ProblemSpec {
  kh::Loss family = kh::Loss::LeastSquares;
  std::optional<std::string> dataset;  ///< libsvm file; otherwise synthesized
  kh::SynthSpec synth;
  kh::Regularizer reg;
};

struct SolverSpec {
  Method method = Method::KatyushaH;
  std::vector<double> alphas{1.0};
  std::vector<std::size_t> batch_sizes{1};
  std::optional<double> eta;  ///< absent means the largest admissible step
  bool cache_slopes = false;
};

struct RunSpec {
  std::uint64_t iterations = 1000;
  std::optional<double> target_gap;
  std::vector<std::uint64_t> seeds{0};
  bool track_lyapunov = false;
  unsigned threads = 1;
};

struct ReferenceSpec {
  bool present = false;            ///< a [reference] section exists
  std::optional<std::string> file; ///< load instead of solving
  double tol = 1e-12;
  std::uint64_t max_iterations = 2'000'000;
};

struct OutputSpec {
  std::string dir = ".";
  std::string prefix = "trace";
  std::uint64_t stride = 1;
};

struct ExperimentConfig {
  ProblemSpec problem;
  SolverSpec solver;
  RunSpec run;
  ReferenceSpec reference;
  OutputSpec output;
  std::string source;  ///< path the config was read from, if any

  /// Throws ConfigError with a message naming the offending key.
  void validate() const;
};

/// key = value sections: [problem] [solver] [run] [reference] [output].
/// Unknown sections or keys are rejected. Relative dataset and reference
/// paths resolve against the config file's directory.
ExperimentConfig parse_config(const std::string& text, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

/// Builds the problem described by the config (dataset or synthesis).
kh::FiniteSumProblem build_problem(const ExperimentConfig& cfg);

/// "0,0.5,1" style lists; also accepts "a:b" seed ranges for integers.
std::vector<double> parse_real_list(const std::string& s);
std::vector<std::uint64_t> parse_uint_list(const std::string& s);

}  // namespace khtools

#endif  // KHTOOLS_CONFIG_HPP
