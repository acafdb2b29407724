#include "purity/validation.hpp"

#include "purity/chimney.hpp"
#include "purity/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace purity {

namespace {

CheckResult finish(std::string name, double err, double tol, std::string note = {}) {
  return {std::move(name), err <= tol, err, tol, std::move(note)};
}

// Point of the chimney interior with x bounded away from zero, plus slopes
// that make dt/dx positive there.
struct CurveSample {
  Vec3 q;
  Vec3 qp;
};

CurveSample random_feasible(RandomSource& rng, const DissipationModel& model) {
  const bool planar = model.dimension() == 2;
  for (;;) {
    Vec3 q = random_ball_point(rng);
    if (planar) q.z() = 0.0;
    if (std::abs(q.x()) < 1e-2 || purity_derivative(q, model) < 1e-3) continue;
    Vec3 qp(1.0, rng.uniform(-3.0, 3.0), planar ? 0.0 : rng.uniform(-3.0, 3.0));
    const double s = q.dot(qp);
    if (s < 1e-3) continue;
    return {q, qp};
  }
}

}  // namespace

LindbladOperator random_lindblad_operator(RandomSource& rng) {
  CMat2 m;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) m(i, j) = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  }
  const std::complex<double> half_trace = 0.5 * m.trace();
  m(0, 0) -= half_trace;
  m(1, 1) -= half_trace;
  return LindbladOperator(m);
}

Vec3 random_ball_point(RandomSource& rng, double radius) {
  for (;;) {
    const Vec3 q(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    if (q.squaredNorm() <= 1.0) return radius * q;
  }
}

std::vector<CheckResult> run_validation(const RunConfig& config, int cases, std::uint64_t seed) {
  if (cases < 1) throw ValidationError("cases: must be at least 1");
  const DissipationModel& model = config.model;
  const int dim = model.dimension();
  std::vector<CheckResult> out;

  {
    RandomSource rng = RandomSource(seed).split(0);
    double err = 0.0;
    const bool own = !config.operators.empty();
    for (int k = 0; k < cases; ++k) {
      std::vector<LindbladOperator> ops = config.operators;
      if (!own) {
        const int n = 1 + static_cast<int>(rng.uniform(0.0, 3.0));
        for (int j = 0; j < n; ++j) ops.push_back(random_lindblad_operator(rng));
      }
      std::vector<CVec3> ls;
      for (const auto& op : ops) ls.push_back(pauli_decompose(op));
      const DissipationModel m = build_dissipation(ls);
      const Vec3 q = random_ball_point(rng);
      const HamiltonianControl h{rng.uniform(-2.0, 2.0),
                                 Vec3(rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0),
                                      rng.uniform(-5.0, 5.0))};
      const CMat2 rho = density_from_bloch(BlochVector(q)).matrix();
      const Vec3 lhs = bloch_velocity(lindblad_rhs(rho, h, ops));
      const Vec3 rhs = bloch_rhs(q, h.u, m);
      err = std::max(err, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    out.push_back(finish("bloch/master-equation correspondence", err, 1e-10,
                         own ? "configured operators"
                             : "model given without operators; random operators used"));
  }

  {
    const Mat3& a = model.a();
    const Mat3& bm = model.b_matrix();
    double err;
    double min_eig;
    if (dim == 2) {
      const Mat2 a2 = a.topLeftCorner<2, 2>();
      err = (bm.topLeftCorner<2, 2>() - (a2 - a2.trace() * Mat2::Identity())).cwiseAbs().maxCoeff();
      min_eig = Eigen::SelfAdjointEigenSolver<Mat2>(a2).eigenvalues().minCoeff();
    } else {
      err = (bm - (a - a.trace() * Mat3::Identity())).cwiseAbs().maxCoeff();
      min_eig = Eigen::SelfAdjointEigenSolver<Mat3>(a).eigenvalues().minCoeff();
    }
    out.push_back(finish("B = A - tr(A) I", err, 0.0));
    out.push_back(finish("A positive semi-definite", std::max(0.0, -min_eig), 1e-12));
    const double lmax = model.largest_b_eigenvalue();
    out.push_back(finish("B negative definite", std::max(0.0, lmax + 1e-10), 0.0,
                         "largest eigenvalue " + std::to_string(lmax)));
  }

  {
    RandomSource rng = RandomSource(seed).split(1);
    double purity_err = 0.0;
    double rate_err = 0.0;
    for (int k = 0; k < cases; ++k) {
      Vec3 q = random_ball_point(rng);
      if (dim == 2) q.z() = 0.0;
      const BlochVector v(q);
      purity_err = std::max(purity_err,
                            std::abs(purity(v) - density_from_bloch(v).purity()));
      const Vec3 u(rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0));
      rate_err = std::max(rate_err,
                          std::abs(q.dot(bloch_rhs(q, u, model)) - purity_derivative(q, model)));
    }
    out.push_back(finish("purity = tr(rho^2)", purity_err, 1e-12));
    out.push_back(finish("purity rate independent of control", rate_err, 1e-12));
  }

  {
    const ChimneyGeometry geom = find_apogee(model);
    const double on_surface = std::abs(purity_derivative(geom.apogee, model));
    out.push_back(finish("apogee on the chimney boundary", on_surface, 1e-10));
    // Coarse grid search for any direction whose boundary point is farther.
    double best = 0.0;
    const double pi = std::numbers::pi;
    if (dim == 2) {
      for (int i = 0; i < 3600; ++i) {
        const Vec3 d = direction_from_angles(2, 0.0, 2.0 * pi * i / 3600.0);
        const double curv = d.dot(model.b_matrix() * d);
        if (curv < 0.0) best = std::max(best, -d.dot(model.b()) / curv);
      }
    } else {
      for (int i = 0; i <= 180; ++i) {
        for (int j = 0; j < 360; ++j) {
          const Vec3 d = direction_from_angles(3, pi * i / 180.0, 2.0 * pi * j / 360.0);
          const double curv = d.dot(model.b_matrix() * d);
          if (curv < 0.0) best = std::max(best, -d.dot(model.b()) / curv);
        }
      }
    }
    out.push_back(finish("apogee not beaten by grid", std::max(0.0, best - geom.apogee_radius),
                         1e-9));
  }

  {
    RandomSource rng = RandomSource(seed).split(2);
    double identity_err = 0.0;
    double closure_err = 0.0;
    for (int k = 0; k < cases; ++k) {
      const auto [q, qp] = random_feasible(rng, model);
      const double lt = lagrangian_time(q, qp, model);
      Vec3 u;
      double le;
      if (dim == 2) {
        u = Vec3(0.0, 0.0, control_from_slope_2d(q, qp.y(), model));
        le = lagrangian_energy_2d(q, qp, model);
      } else {
        const int zeroed = 1 + static_cast<int>(rng.uniform(0.0, 3.0));
        if (std::abs(q[zeroed - 1]) < 1e-2) continue;
        u = controls_from_slope_3d(q, qp.y(), qp.z(), model, zeroed);
        le = lagrangian_energy_3d(q, qp, model, zeroed);
      }
      const double expect = u.squaredNorm() * lt;
      identity_err = std::max(identity_err, std::abs(le - expect) / std::max(1.0, std::abs(expect)));
      const Vec3 v = bloch_rhs(q, u, model);
      const double sy = v.y() / v.x();
      closure_err = std::max(closure_err, std::abs(sy - qp.y()) / std::max(1.0, std::abs(qp.y())));
      if (dim == 3) {
        const double sz = v.z() / v.x();
        closure_err = std::max(closure_err, std::abs(sz - qp.z()) / std::max(1.0, std::abs(qp.z())));
      }
    }
    out.push_back(finish("energy Lagrangian = |u|^2 dt/dx", identity_err, 1e-12));
    out.push_back(finish("recovered controls reproduce slopes", closure_err, 1e-10));
  }
  return out;
}

}  // namespace purity
