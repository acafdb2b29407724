#include "purity/chimney.hpp"
#include "purity/errors.hpp"
#include "purity/numerics.hpp"
#include "purity/variational.hpp"

#include <doctest.h>

#include <cmath>

using namespace purity;

namespace {

DissipationModel planar_model() { return DissipationModel::planar(-3, -4, 1, 2); }

DissipationModel space_model() {
  return DissipationModel::from_b(Vec3(-7, -6, -5).asDiagonal().toDenseMatrix(), Vec3(1, 2, 3));
}

// Independent closed form for u2, u3 with u1 = 0 and diagonal B, written
// for the q x u convention; the u x q controls are its negation.
Vec3 closed_form_controls(const Vec3& q, double yp, double zp, const Vec3& a, const Vec3& b) {
  const double x = q.x(), y = q.y(), z = q.z();
  const double gamma = 1.0 / (x * x + x * y * yp + x * z * zp);
  const double u2 = -gamma * (b(2) * x - a(0) * x * x * zp - a(1) * y * y * zp + a(2) * x * z -
                              b(0) * x * zp + b(2) * y * yp - b(1) * y * zp + a(2) * y * yp * z);
  const double u3 = gamma * (b(1) * x - a(0) * x * x * yp - a(2) * yp * z * z + a(1) * x * y -
                             b(0) * x * yp - b(2) * yp * z + b(1) * z * zp + a(1) * y * z * zp);
  return -Vec3(0.0, u2, u3);
}

Vec3 random_inside(RandomSource& rng, const DissipationModel& m, int dim) {
  for (;;) {
    Vec3 q(rng.uniform(0.02, 0.6), rng.uniform(0.02, 0.6), dim == 3 ? rng.uniform(0.02, 0.7) : 0.0);
    if (purity_derivative(q, m) > 1e-3) return q;
  }
}

}  // namespace

TEST_CASE("basis curves pin both endpoints exactly") {
  RandomSource rng(31);
  const Vec3 start(1e-3, 2e-3, 3e-3), end(0.11, 0.29, 0.62);
  for (int order : {1, 3, 7}) {
    for (int k = 0; k < 50; ++k) {
      const auto c = sample_linf_ball(rng, 2 * order, 50.0);
      const BasisCurve curve(c, 3, start, end);
      const CurvePoint a = curve.eval(start.x());
      const CurvePoint b = curve.eval(end.x());
      CHECK(a.y == start.y());
      CHECK(a.z == start.z());
      CHECK(std::abs(b.y - end.y()) <= 1e-16);
      CHECK(std::abs(b.z - end.z()) <= 1e-16);
    }
  }
}

TEST_CASE("basis derivatives match central differences") {
  const double x0 = 0.01, xf = 0.4, y0 = 0.02, yf = 0.45;
  for (int i = 0; i <= 6; ++i) {
    for (double x : {0.05, 0.2, 0.37}) {
      const double h = 1e-6;
      const double fd = (basis_eval(i, x + h, x0, xf, y0, yf).first -
                         basis_eval(i, x - h, x0, xf, y0, yf).first) / (2 * h);
      CHECK(basis_eval(i, x, x0, xf, y0, yf).second == doctest::Approx(fd).epsilon(1e-7));
    }
  }
  CHECK(basis_eval(2, 0.2, x0, xf, y0, yf).first ==
        doctest::Approx((0.2 - x0) * (0.2 - xf) * (0.2 - xf)));
}

TEST_CASE("energy lagrangians equal |u|^2 times the time lagrangian") {
  RandomSource rng(32);
  const DissipationModel m2 = planar_model();
  const DissipationModel m3 = space_model();
  double worst = 0.0;
  for (int k = 0; k < 500; ++k) {
    const Vec3 q2 = random_inside(rng, m2, 2);
    const Vec3 qp2(1.0, rng.uniform(-3, 3), 0.0);
    if (std::abs(q2.dot(qp2)) < 1e-3) continue;
    const double u = control_from_slope_2d(q2, qp2.y(), m2);
    const double lt = lagrangian_time(q2, qp2, m2);
    worst = std::max(worst, std::abs(lagrangian_energy_2d(q2, qp2, m2) - u * u * lt) /
                                std::max(1.0, std::abs(u * u * lt)));

    const Vec3 q3 = random_inside(rng, m3, 3);
    const Vec3 qp3(1.0, rng.uniform(-3, 3), rng.uniform(-3, 3));
    if (std::abs(q3.dot(qp3)) < 1e-3) continue;
    for (int zc = 1; zc <= 3; ++zc) {
      const Vec3 u3 = controls_from_slope_3d(q3, qp3.y(), qp3.z(), m3, zc);
      const double l3 = lagrangian_time(q3, qp3, m3);
      worst = std::max(worst, std::abs(lagrangian_energy_3d(q3, qp3, m3, zc) - u3.squaredNorm() * l3) /
                                  std::max(1.0, std::abs(u3.squaredNorm() * l3)));
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("recovered controls reproduce the curve slopes") {
  RandomSource rng(33);
  const DissipationModel m2 = planar_model();
  const DissipationModel m3 = space_model();
  double worst = 0.0;
  for (int k = 0; k < 500; ++k) {
    const Vec3 q2 = random_inside(rng, m2, 2);
    const double yp = rng.uniform(-3, 3);
    if (std::abs(q2.x() + q2.y() * yp) < 1e-3) continue;
    const double u = control_from_slope_2d(q2, yp, m2);
    const Vec3 flow = bloch_rhs(q2, Vec3(0, 0, u), m2);
    worst = std::max(worst, std::abs(flow.y() / flow.x() - yp));

    const Vec3 q3 = random_inside(rng, m3, 3);
    const double y3 = rng.uniform(-3, 3), z3 = rng.uniform(-3, 3);
    if (std::abs(q3.dot(Vec3(1, y3, z3))) < 1e-3) continue;
    for (int zc = 1; zc <= 3; ++zc) {
      const Vec3 u3 = controls_from_slope_3d(q3, y3, z3, m3, zc);
      CHECK(u3(zc - 1) == 0.0);
      const Vec3 f3 = bloch_rhs(q3, u3, m3);
      worst = std::max({worst, std::abs(f3.y() / f3.x() - y3), std::abs(f3.z() / f3.x() - z3)});
    }
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("3D controls agree with the negated closed form") {
  RandomSource rng(34);
  const DissipationModel m = space_model();
  const Vec3 a(-7, -6, -5), b(1, 2, 3);
  for (int k = 0; k < 200; ++k) {
    const Vec3 q = random_inside(rng, m, 3);
    const double yp = rng.uniform(-3, 3), zp = rng.uniform(-3, 3);
    if (std::abs(q.dot(Vec3(1, yp, zp))) < 1e-3) continue;
    const Vec3 ours = controls_from_slope_3d(q, yp, zp, m, 1);
    const Vec3 oracle = closed_form_controls(q, yp, zp, a, b);
    CHECK((ours - oracle).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, oracle.norm()));
  }
}

TEST_CASE("singular control denominators are reported") {
  const DissipationModel m = planar_model();
  CHECK_THROWS_AS(control_from_slope_2d(Vec3(0.2, 0.1, 0), -2.0, m), SingularIntegrand);
  CHECK_THROWS_AS(controls_from_slope_3d(Vec3(0.2, 0.1, 0.3), 1.0, 1.0, space_model(), 4),
                  ValidationError);
}

TEST_CASE("curves that leave the chimney are penalized") {
  ProblemSpec spec = make_problem(planar_model(), CostKind::time, 1);
  spec.panels = 100;
  const Functional fn(spec);
  // A large bulge pushes the middle of the curve past f = 0.
  const std::vector<double> out{-60.0};
  CHECK(fn(out) >= kPenalty);
  CHECK(fn.residual(out) == fn(out));
  const std::vector<double> in{0.0};
  CHECK(fn(in) < kPenalty);
  CHECK(fn(in) > 0.0);
  CHECK(fn(in) == doctest::Approx(fn.reference(in)).epsilon(1e-12));
}

TEST_CASE("nearly vertical boundary conditions are rejected") {
  ProblemSpec spec = make_problem(planar_model(), CostKind::time, 1);
  spec.bounds.qf.x() = spec.bounds.q0.x() + 5e-7;
  CHECK_THROWS_AS(validate(spec), ValidationError);
  ProblemSpec bad_order = make_problem(planar_model(), CostKind::time, 1);
  bad_order.order = 0;
  CHECK_THROWS_AS(validate(bad_order), ValidationError);
}

TEST_CASE("2D time-minimal solve, stationarity and forward simulation") {
  ProblemSpec spec = make_problem(planar_model(), CostKind::time, 1);
  spec.multistart = 6;
  spec.panels = 400;
  spec.seed = 3;
  const Solution s = solve(spec);
  CHECK(s.feasible);
  CHECK(s.residual < spec.residual_tolerance);
  CHECK(s.time == doctest::Approx(1.935).epsilon(0.01));
  for (const auto& node : s.profile) CHECK(node.dtdx > 0.0);

  // Central first-order change of I under +-1e-3 on each coefficient.
  const Functional fn(spec);
  for (std::size_t i = 0; i < s.coefficients.size(); ++i) {
    auto up = s.coefficients, down = s.coefficients;
    up[i] += 1e-3;
    down[i] -= 1e-3;
    CHECK(std::abs(fn(up) - fn(down)) / 2 < 1e-5);
  }

  const SimulationReport r = forward_simulate(spec, s);
  CHECK(r.reached);
  CHECK(r.stayed_in_chimney);
  CHECK(r.terminal_error <= 5e-3);
  CHECK(r.time_mismatch <= 1e-2);

  const Solution again = solve(spec);
  CHECK(again.coefficients == s.coefficients);
  CHECK(again.time == s.time);
  CHECK(again.best_start == s.best_start);
}

TEST_CASE("fixed coefficients give consistent costs") {
  ProblemSpec spec = make_problem(planar_model(), CostKind::energy, 2);
  spec.panels = 200;
  const std::vector<double> c{0.5, -1.0};
  const Solution s = make_solution(spec, c);
  const Costs costs = evaluate_costs(spec, c);
  CHECK(s.time == doctest::Approx(costs.time));
  CHECK(s.energy == doctest::Approx(costs.energy));
  CHECK(s.objective_value == doctest::Approx(costs.energy));
  CHECK(s.profile.size() == 401);
}
