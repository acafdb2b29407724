#include "purity/config.hpp"
#include "purity/errors.hpp"
#include "purity/report.hpp"

#include <doctest.h>

#include <cstdlib>
#include <sstream>

using namespace purity;

namespace {

std::string error_of(const Json& doc, const ConfigOverrides& o = {}) {
  try {
    parse_config(doc, o);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

bool contains(const std::string& s, const std::string& part) {
  return s.find(part) != std::string::npos;
}

}  // namespace

TEST_CASE("planar document with defaults") {
  const RunConfig c = parse_config(Json::parse(R"({"a": [-3, -4], "b": [1, 2]})"));
  CHECK(c.form == ModelForm::planar);
  CHECK(c.dimension == 2);
  CHECK(c.epsilon == 1e-3);
  CHECK(c.delta == 1e-3);
  CHECK(c.panels == 1000);
  CHECK(c.multistart == 25);
  CHECK(c.model.b_matrix()(0, 0) == -3.0);
  CHECK(c.model.b()(1) == 2.0);
  CHECK(c.outputs.solution == "solution.json");
  CHECK(c.outputs.trajectory == "trajectory.csv");
}

TEST_CASE("3D documents default to 50 starts") {
  const RunConfig c = parse_config(Json::parse(
      R"({"model": {"B": [[-7,0,0],[0,-6,0],[0,0,-5]], "b": [1,2,3]}, "objective": "energy"})"));
  CHECK(c.dimension == 3);
  CHECK(c.multistart == 50);
  CHECK(c.objective == CostKind::energy);
  CHECK(c.zeroed_control == 1);
}

TEST_CASE("validation errors name the field") {
  CHECK(contains(error_of(Json::parse(R"({"a": [-3, -4], "b": [1, 2], "bogus": 1})")), "bogus"));
  CHECK(contains(error_of(Json::parse(R"({"a": [-3, -4], "b": [1, 2], "order": 0})")), "order"));
  CHECK(contains(error_of(Json::parse(R"({"a": [-3, -4], "b": [1, 2, 3]})")), "model.b"));
  CHECK(contains(error_of(Json::parse(R"({"a": [-3, -4], "b": [1, 2], "objective": "speed"})")),
                 "objective"));
  CHECK(contains(error_of(Json::parse(R"({"a": [-3, -4], "b": [1, 2], "outputs": {"x": "y"}})")),
                 "outputs"));
}

TEST_CASE("empty document lists the required fields") {
  const std::string e = error_of(Json::object());
  CHECK(contains(e, "lindblad_ops"));
  CHECK(contains(e, "b"));
}

TEST_CASE("direct B input must be negative definite") {
  const std::string e =
      error_of(Json::parse(R"({"model": {"B": [[7,0,0],[0,6,0],[0,0,5]], "b": [1,2,3]}})"));
  CHECK(contains(e, "model.B"));
  CHECK(contains(e, "negative definite"));
}

TEST_CASE("A input derives B") {
  const RunConfig c =
      parse_config(Json::parse(R"({"model": {"A": [[2,0,0],[0,3,0],[0,0,4]], "b": [1,2,3]}})"));
  CHECK(c.form == ModelForm::a_matrix);
  CHECK(c.model.b_matrix()(0, 0) == -7.0);
  CHECK(c.model.b_matrix()(2, 2) == -5.0);
}

TEST_CASE("lindblad operator input") {
  // Two operators with non-commuting Pauli parts give a 3D model.
  const RunConfig c = parse_config(Json::parse(R"({"model": {"lindblad_ops": [
      [[[0,0],[0,0]], [[1,0],[0,0]]],
      [[[0.3,0],[0,0.2]], [[0,0.1],[-0.3,0]]]]}})"));
  CHECK(c.form == ModelForm::lindblad_ops);
  CHECK(c.operators.size() == 2);
  CHECK(c.dimension == 3);
  CHECK(c.model.largest_b_eigenvalue() < 0.0);
  CHECK(contains(error_of(Json::parse(R"({"model": {"lindblad_ops": [[[[1,0],[0,0]],[[0,0],[0,0]]]]}})")),
                 "lindblad_ops"));
}

TEST_CASE("seed precedence: default < environment < document < flag") {
  const Json base = Json::parse(R"({"a": [-3, -4], "b": [1, 2]})");
  ::unsetenv("PURITY_SEED");
  CHECK(parse_config(base).seed == 0);
  ::setenv("PURITY_SEED", "17", 1);
  CHECK(parse_config(base).seed == 17);
  Json with_seed = base;
  with_seed["seed"] = 5;
  CHECK(parse_config(with_seed).seed == 5);
  ConfigOverrides o;
  o.seed = 9;
  CHECK(parse_config(with_seed, o).seed == 9);
  ::unsetenv("PURITY_SEED");
}

TEST_CASE("flags override document fields") {
  const Json doc = Json::parse(R"({"a": [-3, -4], "b": [1, 2], "order": 3, "panels": 500})");
  ConfigOverrides o;
  o.order = 5;
  o.objective = CostKind::energy;
  o.output_dir = "out";
  o.warm_start = WarmStart::never;
  const RunConfig c = parse_config(doc, o);
  CHECK(c.order == 5);
  CHECK(c.panels == 500);
  CHECK(c.objective == CostKind::energy);
  CHECK(c.warm_start == WarmStart::never);
  CHECK(c.outputs.solution == "out/solution.json");
}

TEST_CASE("resolved config round trips") {
  ConfigOverrides o;
  o.seed = 4;
  const RunConfig c = parse_config(
      Json::parse(R"({"model": {"B": [[-7,0,0],[0,-6,0],[0,0,-5]], "b": [1,2,3]}, "order": 2,
                      "zeroed_control": 2, "warm_start": "always"})"),
      o);
  const Json doc = to_json(c);
  const RunConfig back = parse_config(doc);
  CHECK(to_json(back) == doc);
  CHECK(back.seed == 4);
  CHECK(back.zeroed_control == 2);
  CHECK(back.warm_start == WarmStart::always);
  CHECK((back.model.b_matrix() - c.model.b_matrix()).norm() == 0.0);
}

TEST_CASE("solution documents and CSVs are reproducible") {
  ConfigOverrides o;
  o.seed = 2;
  o.panels = 200;
  o.multistart = 4;
  const RunConfig c = parse_config(Json::parse(R"({"a": [-3, -4], "b": [1, 2]})"), o);
  const ProblemSpec spec = make_problem(c);
  const Solution s1 = solve(spec);
  const Solution s2 = solve(spec);
  std::ostringstream t1, t2, u1, u2;
  write_trajectory_csv(t1, s1);
  write_trajectory_csv(t2, s2);
  write_controls_csv(u1, s1);
  write_controls_csv(u2, s2);
  CHECK(t1.str() == t2.str());
  CHECK(u1.str() == u2.str());
  CHECK(t1.str().substr(0, t1.str().find('\n')) == "x,y,yp,u1,u2,u3,dtdx,f");
  CHECK(u1.str().substr(0, u1.str().find('\n')) == "x,u1,u2,u3");

  const Json doc = solution_document(c, s1);
  CHECK(doc["seed"] == 2);
  CHECK(doc["config"] == to_json(c));
  RunConfig rc;
  const Solution back = solution_from_document(Json::parse(doc.dump()), &rc);
  CHECK(back.coefficients == s1.coefficients);
  CHECK(back.time == s1.time);
  CHECK(rc.seed == 2);
  CHECK(format_real(0.1) == "0.10000000000000001");
}

TEST_CASE("reference fixtures") {
  CHECK(reference_rows(1).size() == 4);
  CHECK(reference_rows(2).size() == 4);
  CHECK(reference_rows(1).back().order == 7);
  CHECK(parse_config(reference_model(2)).dimension == 3);
  CHECK_THROWS(reference_rows(3));
}
