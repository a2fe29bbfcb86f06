#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "weaksym/gnet.hpp"
#include "weaksym/group_action.hpp"
#include "weaksym/pde_system.hpp"

namespace weaksym {

/// Parse/validation failure with 1-based line and column.
class ModelError : public std::runtime_error {
 public:
  ModelError(const std::string& msg, int line, int column)
      : std::runtime_error("line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ": " + msg),
        line(line),
        column(column) {}
  int line, column;
};

/// Raw model description: expression strings plus declarations, one section
/// per concern. Expressions are kept as text so they survive a round trip
/// unchanged.
struct ModelFile {
  // vars
  std::vector<std::string> independent;
  std::vector<std::string> dependent;
  int order = 1;
  // system
  std::vector<std::string> equations;
  std::vector<std::string> solved;  // jet coordinate names
  // group (one xi per independent variable, one phi per dependent)
  std::vector<std::string> xi, phi;
  bool linear_in_u = false;
  // generator
  std::vector<std::string> gen_xi, gen_phi;
  // net
  std::vector<std::string> net_components;  // raw expressions in (x, eps)
  std::optional<std::string> net_layer;
  // shock shorthand: u = left + (right-left)*H_eps(x - speed*t)
  struct Shock {
    double left, right, speed;
  };
  std::optional<Shock> shock;
  std::vector<std::pair<double, double>> domain;
  // scenario
  std::string scenario_name;
  std::map<std::string, double> params;   // `set key value`
  std::string flux;                       // "id" | "exp" | ""

  // source positions of expression entries, keyed "eq:0", "xi:1", "layer",
  // ...; filled by parse_model_file, ignored by serialize_model_file
  std::map<std::string, std::pair<int, int>> positions;
};

ModelFile parse_model_file(const std::string& text);
std::string serialize_model_file(const ModelFile& m);

/// Everything the pipelines need, built from a ModelFile. The SymbolTable is
/// heap-held so the compiled pieces can reference it stably.
struct CompiledModel {
  std::unique_ptr<SymbolTable> table;
  std::unique_ptr<JetSpec> spec;
  std::optional<PDESystem> sys;
  std::optional<GroupAction> group;
  std::optional<VectorField> generator;
  std::optional<GNet> net;
};

/// Declares the variables, parses every expression, and assembles the typed
/// pieces. Undeclared symbols and malformed expressions surface as ModelError
/// with the position inside the original text.
CompiledModel compile_model(const ModelFile& m);

}  // namespace weaksym
