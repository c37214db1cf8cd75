#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "halfext/solver.hpp"

namespace halfext::app {

/// Bad experiment name or parameters outside an experiment's domain.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  std::string experiment;
  int n = 3;
  std::optional<double> p;  // unset: the experiment's natural exponent
  int grid_n = 128;
  int height_count = 96;
  std::optional<int> quad_order;  // unset: per-routine default
  int trials = 8;
  std::uint64_t seed = 0;
  int threads = 0;  // 0: all hardware threads
  bool reproducible = false;
  std::string out = "halfext-out";
  std::string init = "gaussian";
  int max_iters = 4000;
  double tol = 1e-8;
  double damping = 0.5;
  std::string normalization = "mass_half";
};

const std::vector<std::string>& experiment_names();

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Overwrites the fields present in a flat JSON object. Unknown keys are
/// usage errors.
void merge_json(ExperimentConfig& cfg, const nlohmann::json& j);

/// Throws UsageError when cfg is outside the experiment's domain.
void validate(const ExperimentConfig& cfg);

struct Check {
  std::string name;
  double value = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  std::string relation;  // how value is compared with reference
  bool pass = false;
};

struct Outcome {
  nlohmann::json summary;  // full summary.json document
  std::string trace_csv;
  std::string profile_csv;
  bool pass = false;
};

/// Runs one experiment in process; throws UsageError for bad input and
/// lets numerical exceptions propagate.
Outcome execute(const ExperimentConfig& cfg);

/// execute() plus artifacts in cfg.out; returns the exit code
/// (0 pass, 1 numerical failure, 2 usage).
int run(const ExperimentConfig& cfg, std::ostream& log);

/// Directory named by HALFEXT_FIXTURES, else "fixtures".
std::string fixtures_dir();

struct DerivedConstant {
  std::string name;
  int n = 3;
  double p = 0.0;
  double value = 0.0;
};

std::vector<DerivedConstant> read_derived_constants(const std::string& dir);
std::optional<double> find_constant(const std::vector<DerivedConstant>& all, const std::string& name, int n,
                                    double p);

/// Recomputes derived_constants.csv in dir.
void regenerate_fixtures(const std::string& dir, std::ostream& log);

struct ClassifierCase {
  std::string id, form;
  double c1 = 0.0, c2 = 0.0, x0 = 0.0, alpha = -1.0, eps = 0.0;
  InvertedClass expected = InvertedClass::none;

  bool member() const { return expected != InvertedClass::none; }
  double radial(double r) const;
  /// 1-D samples for the third-difference check.
  std::vector<double> line_samples(double& h) const;
};

std::vector<ClassifierCase> read_classifier_cases(const std::string& path);

}  // namespace halfext::app
