#include "purity/report.hpp"

#include "purity/errors.hpp"
#include "purity/kernels.hpp"

#include <cstdio>
#include <ostream>

namespace purity {

namespace {

constexpr ReferenceRow kTable1[] = {
    {1, 1, 1.9371, 7.5830, 1.9393, 0.5365},
    {1, 3, 1.9366, 8.6873, 2.1477, 0.2410},
    {1, 5, 1.9361, 1.6368, 2.1789, 0.2334},
    {1, 7, 1.9359, 1.3765, 2.1569, 0.2369},
};

constexpr ReferenceRow kTable2[] = {
    {2, 1, 1.3188, 207.26, 1.3243, 36.365},
    {2, 2, 1.3188, 47.519, 1.3205, 32.491},
    {2, 3, 1.3189, 42.431, 1.3212, 29.356},
    {2, 4, 1.3188, 49.693, 1.3214, 31.682},
};

Json nullable(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

void row(std::ostream& out, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) out << ',';
    out << format_real(v);
    first = false;
  }
  out << '\n';
}

}  // namespace

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json vector_json(const Vec3& v, int dimension) {
  Json a = Json::array();
  for (int i = 0; i < dimension; ++i) a.push_back(nullable(v[i]));
  return a;
}

Json apogee_document(const RunConfig& config, const ChimneyGeometry& geom,
                     const BoundaryConditions& bounds) {
  const int d = config.dimension;
  Json j;
  j["config"] = to_json(config);
  j["apogee"] = vector_json(geom.apogee, d);
  j["apogee_radius"] = geom.apogee_radius;
  j["max_purity"] = geom.max_purity();
  j["largest_b_eigenvalue"] = config.model.largest_b_eigenvalue();
  j["q0"] = vector_json(bounds.q0, d);
  j["qf"] = vector_json(bounds.qf, d);
  j["purity_q0"] = 0.5 * (1.0 + bounds.q0.squaredNorm());
  j["purity_qf"] = 0.5 * (1.0 + bounds.qf.squaredNorm());
  return j;
}

Json solution_document(const RunConfig& config, const Solution& s) {
  const int d = config.dimension;
  Json j;
  j["config"] = to_json(config);
  j["seed"] = config.seed;
  j["simd"] = std::string(kernels::to_string(kernels::active_simd_level()));
  j["coefficients"] = s.coefficients;
  const int m = s.spec.order;
  Json split;
  split["y"] = std::vector<double>(s.coefficients.begin(), s.coefficients.begin() + m);
  if (d == 3) split["z"] = std::vector<double>(s.coefficients.begin() + m, s.coefficients.end());
  j["coefficients_by_axis"] = split;
  j["residual"] = s.residual;
  j["objective_value"] = nullable(s.objective_value);
  j["time"] = nullable(s.time);
  j["energy"] = nullable(s.energy);
  j["feasible"] = s.feasible;
  j["starts_used"] = s.starts_used;
  j["starts_accepted"] = s.starts_accepted;
  j["best_start"] = s.best_start;
  j["warm_started"] = s.warm_started;
  j["q0"] = vector_json(s.spec.bounds.q0, d);
  j["qf"] = vector_json(s.spec.bounds.qf, d);
  const Vec3 u = s.endpoint_control();
  j["endpoint_control"] = vector_json(u, 3);
  try {
    j["endpoint_fixed_point"] = vector_json(s.endpoint_fixed_point(), d);
  } catch (const PreconditionError&) {
    j["endpoint_fixed_point"] = nullptr;
  }
  Json starts = Json::array();
  for (const auto& r : s.starts) {
    starts.push_back({{"index", r.index},
                      {"residual", nullable(r.residual)},
                      {"value", nullable(r.value)},
                      {"accepted", r.accepted},
                      {"iterations", r.iterations}});
  }
  j["starts"] = starts;
  return j;
}

Json simulation_document(const SimulationReport& r) {
  Json j;
  j["reached"] = r.reached;
  j["stayed_in_chimney"] = r.stayed_in_chimney;
  j["purity_monotone"] = r.purity_monotone;
  j["elapsed"] = r.elapsed;
  j["energy"] = r.energy;
  j["terminal"] = vector_json(r.terminal, 3);
  j["terminal_error"] = r.terminal_error;
  j["time_mismatch"] = nullable(r.time_mismatch);
  j["ok"] = r.ok();
  if (!r.message.empty()) j["message"] = r.message;
  return j;
}

void write_trajectory_csv(std::ostream& out, const Solution& s) {
  const bool space = s.spec.dimension == 3;
  out << (space ? "x,y,z,yp,zp,u1,u2,u3,dtdx,f\n" : "x,y,yp,u1,u2,u3,dtdx,f\n");
  for (const auto& n : s.profile) {
    if (space) {
      row(out, {n.x, n.y, n.z, n.yp, n.zp, n.u[0], n.u[1], n.u[2], n.dtdx, n.f});
    } else {
      row(out, {n.x, n.y, n.yp, n.u[0], n.u[1], n.u[2], n.dtdx, n.f});
    }
  }
}

void write_controls_csv(std::ostream& out, const Solution& s) {
  out << "x,u1,u2,u3\n";
  for (const auto& n : s.profile) row(out, {n.x, n.u[0], n.u[1], n.u[2]});
}

void write_timeseries_csv(std::ostream& out, const SimulationReport& r, int dimension) {
  const bool space = dimension == 3;
  out << (space ? "t,x,y,z,u1,u2,u3,purity\n" : "t,x,y,u1,u2,u3,purity\n");
  for (const auto& s : r.samples) {
    if (space) {
      row(out, {s.t, s.q.x(), s.q.y(), s.q.z(), s.u[0], s.u[1], s.u[2], s.purity});
    } else {
      row(out, {s.t, s.q.x(), s.q.y(), s.u[0], s.u[1], s.u[2], s.purity});
    }
  }
}

Solution solution_from_document(const Json& doc, RunConfig* config_out) {
  if (!doc.is_object() || !doc.contains("config")) {
    throw ValidationError("solution: missing config block");
  }
  if (!doc.contains("coefficients") || !doc["coefficients"].is_array()) {
    throw ValidationError("solution.coefficients: expected an array of numbers");
  }
  RunConfig config = parse_config(doc["config"]);
  std::vector<double> c;
  for (const auto& v : doc["coefficients"]) {
    if (!v.is_number()) throw ValidationError("solution.coefficients: expected numbers");
    c.push_back(v.get<double>());
  }
  const ProblemSpec spec = make_problem(config);
  if (static_cast<int>(c.size()) != spec.coefficient_count()) {
    throw ValidationError("solution.coefficients: expected " +
                          std::to_string(spec.coefficient_count()) + " values");
  }
  Solution s = make_solution(spec, std::move(c));
  if (doc.contains("starts_used") && doc["starts_used"].is_number_integer()) {
    s.starts_used = doc["starts_used"].get<int>();
  }
  if (config_out != nullptr) *config_out = std::move(config);
  return s;
}

std::span<const ReferenceRow> reference_rows(int table) {
  if (table == 1) return kTable1;
  if (table == 2) return kTable2;
  throw ValidationError("table: must be 1 or 2");
}

Json reference_model(int table) {
  if (table == 1) return Json{{"a", {-3.0, -4.0}}, {"b", {1.0, 2.0}}};
  if (table == 2) {
    return Json{{"B", {{-7.0, 0.0, 0.0}, {0.0, -6.0, 0.0}, {0.0, 0.0, -5.0}}},
                {"b", {1.0, 2.0, 3.0}}};
  }
  throw ValidationError("table: must be 1 or 2");
}

}  // namespace purity
