#pragma once

// Run configuration: one JSON document per run, with command-line flags
// layered on top.
//
// Precedence, lowest first: built-in defaults, the PURITY_SEED environment
// variable (seed only), the document, then flags.

#include "purity/bloch_model.hpp"
#include "purity/variational.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace purity {

using Json = nlohmann::ordered_json;

enum class ModelForm { lindblad_ops, a_matrix, b_matrix, planar };

std::string_view to_string(ModelForm form);

struct OutputPaths {
  std::string solution;
  std::string trajectory;
  std::string controls;
  std::string timeseries;
};

struct RunConfig {
  /// The model block exactly as it was given, kept for re-emission.
  Json model_source;
  ModelForm form = ModelForm::planar;
  DissipationModel model = DissipationModel::planar(-1.0, -1.0, 0.0, 0.0);
  /// Only filled for the lindblad_ops form.
  std::vector<LindbladOperator> operators;
  int dimension = 2;
  CostKind objective = CostKind::time;
  int order = 1;
  double epsilon = 1e-3;
  double delta = 1e-3;
  int panels = 1000;
  int multistart = 25;
  std::uint64_t seed = 0;
  int zeroed_control = 1;
  double residual_tolerance = 1e-4;
  WarmStart warm_start = WarmStart::fallback;
  OutputPaths outputs;
};

/// Values a command line may override. Unset members leave the document
/// (or default) in place.
struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> order;
  std::optional<CostKind> objective;
  std::optional<int> panels;
  std::optional<int> multistart;
  std::optional<int> zeroed_control;
  std::optional<WarmStart> warm_start;
  std::optional<std::string> output_dir;
};

/// Seed used when neither the document nor a flag sets one: PURITY_SEED if
/// it parses as an unsigned integer, else 0.
std::uint64_t default_seed();

/// Builds the model from a `model` block in any of the accepted forms:
///   {"lindblad_ops": [[[re,im],[re,im]],[[re,im],[re,im]]], ...]}
///   {"A": 3x3, "b": [3]}      B = A - tr(A) I
///   {"B": 3x3, "b": [3]}      A = B - tr(B)/2 I
///   {"a": [a1,a2], "b": [b1,b2]}   planar, B = diag(a1, a2)
DissipationModel parse_model(const Json& block, ModelForm* form = nullptr,
                             std::vector<LindbladOperator>* operators = nullptr);

/// Throws ValidationError naming the field on unknown keys, wrong shapes or
/// out-of-range values.
RunConfig parse_config(const Json& document, const ConfigOverrides& overrides = {});

RunConfig load_config(const std::string& path, const ConfigOverrides& overrides = {});

/// Fully resolved document; parse_config(to_json(c)) reproduces c.
Json to_json(const RunConfig& config);

/// ProblemSpec for the config (apogee and boundary conditions included).
ProblemSpec make_problem(const RunConfig& config);

}  // namespace purity
