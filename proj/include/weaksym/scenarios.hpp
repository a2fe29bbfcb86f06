#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "weaksym/model_file.hpp"
#include "weaksym/report.hpp"

namespace weaksym {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScenarioOptions {
  uint64_t seed = 42;
  double tol = 1e-8;
  std::vector<double> eps_grid;           // empty -> 2^-3 .. 2^-12
  std::map<std::string, double> overrides;
};

std::vector<std::string> scenario_names();

/// The built-in scenario expressed in the model DSL (round-trip source).
/// Throws ScenarioError for unknown names.
std::string scenario_model_text(const std::string& name);

/// Parse the embedded model, apply overrides to its parameters, and execute
/// the scenario's check list.
Report run_scenario(const std::string& name, const ScenarioOptions& opt = {});

/// Same, driven by an already-parsed model (dispatch on its scenario name).
Report run_scenario(const ModelFile& m, const ScenarioOptions& opt = {});

/// Task pipelines on a user model:
///   factor      compute the factor matrix and verify the factorization
///   determining generate the determining system for the generator ansatz
///   verify      infinitesimal symmetry criterion for the generator
///   associate   weak residual curves of the declared net
///   scenario    dispatch to the embedded scenario checks
/// Empty task list yields an empty passing report.
Report analyze(const ModelFile& m, const std::vector<std::string>& tasks,
               const ScenarioOptions& opt = {});

}  // namespace weaksym
