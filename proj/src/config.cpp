#include "purity/config.hpp"

#include "purity/errors.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <set>
#include <vector>

namespace purity {

namespace {

const std::set<std::string> kModelKeys = {"lindblad_ops", "A", "B", "a", "b"};
const std::set<std::string> kTopKeys = {"model",      "dimension",  "objective",
                                        "order",      "epsilon",    "delta",
                                        "panels",     "multistart", "seed",
                                        "zeroed_control", "residual_tolerance",
                                        "warm_start", "outputs"};
const std::set<std::string> kOutputKeys = {"solution", "trajectory", "controls", "timeseries"};

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ValidationError(field + ": " + what);
}

double real_at(const Json& v, const std::string& field) {
  if (!v.is_number()) fail(field, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(field, "must be finite");
  return x;
}

std::vector<double> reals(const Json& v, const std::string& field, std::size_t n) {
  if (!v.is_array() || v.size() != n) fail(field, "expected an array of " + std::to_string(n) + " numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(real_at(v[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

Mat3 matrix3(const Json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 3) fail(field, "expected a 3x3 array of numbers");
  Mat3 m;
  for (int i = 0; i < 3; ++i) {
    const auto row = reals(v[i], field + "[" + std::to_string(i) + "]", 3);
    for (int j = 0; j < 3; ++j) m(i, j) = row[j];
  }
  return m;
}

std::complex<double> complex_at(const Json& v, const std::string& field) {
  if (v.is_number()) return {real_at(v, field), 0.0};
  const auto parts = reals(v, field, 2);
  return {parts[0], parts[1]};
}

int integer_at(const Json& v, const std::string& field, int lo, int hi) {
  if (!v.is_number_integer()) fail(field, "expected an integer");
  const auto x = v.get<long long>();
  if (x < lo || x > hi) {
    fail(field, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return static_cast<int>(x);
}

CostKind objective_from(const std::string& s, const std::string& field) {
  if (s == "time") return CostKind::time;
  if (s == "energy") return CostKind::energy;
  fail(field, "must be \"time\" or \"energy\"");
}

WarmStart warm_from(const std::string& s, const std::string& field) {
  if (s == "never") return WarmStart::never;
  if (s == "fallback") return WarmStart::fallback;
  if (s == "always") return WarmStart::always;
  fail(field, "must be \"never\", \"fallback\" or \"always\"");
}

std::string string_at(const Json& v, const std::string& field) {
  if (!v.is_string()) fail(field, "expected a string");
  return v.get<std::string>();
}

void reject_unknown(const Json& obj, const std::set<std::string>& allowed,
                    const std::string& prefix) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.contains(key)) fail(prefix + key, "unknown field");
  }
}

}  // namespace

std::string_view to_string(ModelForm form) {
  switch (form) {
    case ModelForm::lindblad_ops:
      return "lindblad_ops";
    case ModelForm::a_matrix:
      return "A";
    case ModelForm::b_matrix:
      return "B";
    case ModelForm::planar:
      break;
  }
  return "a";
}

std::uint64_t default_seed() {
  const char* env = std::getenv("PURITY_SEED");
  if (env == nullptr) return 0;
  std::uint64_t value = 0;
  const char* end = env + std::strlen(env);
  const auto [ptr, ec] = std::from_chars(env, end, value);
  if (ec != std::errc() || ptr != end || ptr == env) return 0;
  return value;
}

DissipationModel parse_model(const Json& block, ModelForm* form_out,
                             std::vector<LindbladOperator>* operators) {
  if (!block.is_object()) fail("model", "expected an object");
  reject_unknown(block, kModelKeys, "model.");
  const bool ops = block.contains("lindblad_ops");
  const bool a_mat = block.contains("A");
  const bool b_mat = block.contains("B");
  const bool planar = block.contains("a");
  const int forms = int(ops) + int(a_mat) + int(b_mat) + int(planar);
  if (forms == 0) {
    fail("model", "required: one of lindblad_ops, A with b, B with b, or a with b");
  }
  if (forms > 1) fail("model", "give exactly one of lindblad_ops, A, B or a");

  ModelForm form;
  DissipationModel model = DissipationModel::planar(-1.0, -1.0, 0.0, 0.0);
  if (ops) {
    if (block.contains("b")) fail("model.b", "not allowed with lindblad_ops");
    const Json& list = block["lindblad_ops"];
    if (!list.is_array() || list.empty()) fail("model.lindblad_ops", "expected a non-empty array");
    std::vector<CVec3> ls;
    std::vector<LindbladOperator> kept;
    for (std::size_t k = 0; k < list.size(); ++k) {
      const std::string field = "model.lindblad_ops[" + std::to_string(k) + "]";
      const Json& m = list[k];
      if (!m.is_array() || m.size() != 2) fail(field, "expected a 2x2 matrix of [re, im] pairs");
      CMat2 entries;
      for (int i = 0; i < 2; ++i) {
        const std::string row = field + "[" + std::to_string(i) + "]";
        if (!m[i].is_array() || m[i].size() != 2) fail(row, "expected two entries");
        for (int j = 0; j < 2; ++j) entries(i, j) = complex_at(m[i][j], row + "[" + std::to_string(j) + "]");
      }
      try {
        kept.emplace_back(entries);
        ls.push_back(pauli_decompose(kept.back()));
      } catch (const ValidationError& e) {
        fail(field, e.what());
      }
    }
    form = ModelForm::lindblad_ops;
    model = build_dissipation(ls);
    if (operators != nullptr) *operators = std::move(kept);
  } else {
    if (!block.contains("b")) fail("model.b", "required");
    if (planar) {
      const auto a = reals(block["a"], "model.a", 2);
      const auto b = reals(block["b"], "model.b", 2);
      form = ModelForm::planar;
      model = DissipationModel::planar(a[0], a[1], b[0], b[1]);
    } else {
      const auto bv = reals(block["b"], "model.b", 3);
      const Vec3 b(bv[0], bv[1], bv[2]);
      const Mat3 given = matrix3(block[a_mat ? "A" : "B"], a_mat ? "model.A" : "model.B");
      if (b_mat) {
        const double top = Eigen::SelfAdjointEigenSolver<Mat3>(0.5 * (given + given.transpose()))
                               .eigenvalues()
                               .maxCoeff();
        if (top > -1e-10) {
          fail("model.B", "must be negative definite; largest eigenvalue = " + std::to_string(top));
        }
      }
      form = a_mat ? ModelForm::a_matrix : ModelForm::b_matrix;
      try {
        model = a_mat ? DissipationModel::from_a(given, b) : DissipationModel::from_b(given, b);
      } catch (const ValidationError& e) {
        fail(a_mat ? "model.A" : "model.B", e.what());
      }
    }
  }
  try {
    model.require_negative_definite();
  } catch (const ValidationError& e) {
    fail("model", e.what());
  }
  if (form_out != nullptr) *form_out = form;
  return model;
}

RunConfig parse_config(const Json& document, const ConfigOverrides& overrides) {
  if (!document.is_object()) fail("document", "expected a JSON object");
  if (document.empty()) {
    fail("document",
         "empty; required fields: model (lindblad_ops | A+b | B+b | a+b); optional: "
         "objective, order, epsilon, delta, panels, multistart, seed, zeroed_control, "
         "residual_tolerance, warm_start, outputs");
  }

  // Model keys may sit at the top level instead of inside "model".
  Json top = document;
  Json model_block = Json::object();
  for (const auto& key : kModelKeys) {
    if (top.contains(key)) {
      model_block[key] = top[key];
      top.erase(key);
    }
  }
  if (top.contains("model")) {
    if (!model_block.empty()) fail("model", "given both as a block and as top-level fields");
    model_block = top["model"];
  }
  reject_unknown(top, kTopKeys, "");

  RunConfig c;
  c.model_source = model_block;
  c.model = parse_model(model_block, &c.form, &c.operators);
  c.dimension = c.model.dimension();
  if (top.contains("dimension")) {
    const int d = integer_at(top["dimension"], "dimension", 2, 3);
    if (d != c.dimension) {
      fail("dimension", "is " + std::to_string(d) + " but the model is " +
                            std::to_string(c.dimension) + "D");
    }
  }
  c.multistart = c.dimension == 2 ? 25 : 50;
  c.seed = default_seed();

  if (top.contains("objective")) c.objective = objective_from(string_at(top["objective"], "objective"), "objective");
  if (top.contains("order")) c.order = integer_at(top["order"], "order", 1, 20);
  if (top.contains("epsilon")) c.epsilon = real_at(top["epsilon"], "epsilon");
  if (top.contains("delta")) c.delta = real_at(top["delta"], "delta");
  if (top.contains("panels")) c.panels = integer_at(top["panels"], "panels", 2, 10'000'000);
  if (top.contains("multistart")) c.multistart = integer_at(top["multistart"], "multistart", 1, 100'000);
  if (top.contains("seed")) {
    const Json& seed = top["seed"];
    if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0)) {
      fail("seed", "expected a non-negative integer");
    }
    c.seed = top["seed"].get<std::uint64_t>();
  }
  if (top.contains("zeroed_control")) c.zeroed_control = integer_at(top["zeroed_control"], "zeroed_control", 1, 3);
  if (top.contains("residual_tolerance")) c.residual_tolerance = real_at(top["residual_tolerance"], "residual_tolerance");
  if (top.contains("warm_start")) c.warm_start = warm_from(string_at(top["warm_start"], "warm_start"), "warm_start");
  if (top.contains("outputs")) {
    const Json& o = top["outputs"];
    if (!o.is_object()) fail("outputs", "expected an object");
    reject_unknown(o, kOutputKeys, "outputs.");
    if (o.contains("solution")) c.outputs.solution = string_at(o["solution"], "outputs.solution");
    if (o.contains("trajectory")) c.outputs.trajectory = string_at(o["trajectory"], "outputs.trajectory");
    if (o.contains("controls")) c.outputs.controls = string_at(o["controls"], "outputs.controls");
    if (o.contains("timeseries")) c.outputs.timeseries = string_at(o["timeseries"], "outputs.timeseries");
  }

  if (overrides.seed) c.seed = *overrides.seed;
  if (overrides.order) c.order = *overrides.order;
  if (overrides.objective) c.objective = *overrides.objective;
  if (overrides.panels) c.panels = *overrides.panels;
  if (overrides.multistart) c.multistart = *overrides.multistart;
  if (overrides.zeroed_control) c.zeroed_control = *overrides.zeroed_control;
  if (overrides.warm_start) c.warm_start = *overrides.warm_start;
  if (overrides.output_dir) {
    const std::string dir = overrides.output_dir->empty() ? "." : *overrides.output_dir;
    c.outputs = {dir + "/solution.json", dir + "/trajectory.csv", dir + "/controls.csv",
                 dir + "/timeseries.csv"};
  }
  if (c.outputs.solution.empty()) c.outputs.solution = "solution.json";
  if (c.outputs.trajectory.empty()) c.outputs.trajectory = "trajectory.csv";
  if (c.outputs.controls.empty()) c.outputs.controls = "controls.csv";
  if (c.outputs.timeseries.empty()) c.outputs.timeseries = "timeseries.csv";

  if (c.order < 1 || c.order > 20) fail("order", "must lie in [1, 20]");
  if (c.panels < 2) fail("panels", "must be at least 2");
  if (c.multistart < 1) fail("multistart", "must be at least 1");
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) fail("epsilon", "must lie in (0, 1)");
  if (!(c.delta > 0.0 && c.delta < 1.0)) fail("delta", "must lie in (0, 1)");
  if (!(c.residual_tolerance > 0.0)) fail("residual_tolerance", "must be positive");
  if (c.zeroed_control < 1 || c.zeroed_control > 3) fail("zeroed_control", "must be 1, 2 or 3");
  return c;
}

RunConfig load_config(const std::string& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open " + path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError("config: " + path + " is not valid JSON (" + e.what() + ")");
  }
  return parse_config(doc, overrides);
}

Json to_json(const RunConfig& c) {
  Json j;
  j["model"] = c.model_source;
  j["dimension"] = c.dimension;
  j["objective"] = std::string(to_string(c.objective));
  j["order"] = c.order;
  j["epsilon"] = c.epsilon;
  j["delta"] = c.delta;
  j["panels"] = c.panels;
  j["multistart"] = c.multistart;
  j["seed"] = c.seed;
  j["zeroed_control"] = c.zeroed_control;
  j["residual_tolerance"] = c.residual_tolerance;
  j["warm_start"] = std::string(to_string(c.warm_start));
  j["outputs"] = {{"solution", c.outputs.solution},
                  {"trajectory", c.outputs.trajectory},
                  {"controls", c.outputs.controls},
                  {"timeseries", c.outputs.timeseries}};
  return j;
}

ProblemSpec make_problem(const RunConfig& c) {
  ProblemSpec spec = make_problem(c.model, c.objective, c.order, c.epsilon, c.delta);
  spec.panels = c.panels;
  spec.multistart = c.multistart;
  spec.seed = c.seed;
  spec.zeroed_control = c.zeroed_control;
  spec.residual_tolerance = c.residual_tolerance;
  spec.warm_start = c.warm_start;
  return spec;
}

}  // namespace purity
