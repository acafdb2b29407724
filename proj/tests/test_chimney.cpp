#include "purity/chimney.hpp"
#include "purity/errors.hpp"
#include "purity/numerics.hpp"

#include <doctest.h>

#include <chrono>
#include <numbers>

using namespace purity;

namespace {

const double kPi = std::numbers::pi;

DissipationModel planar_model() { return DissipationModel::planar(-3, -4, 1, 2); }

DissipationModel space_model() {
  return DissipationModel::from_b(Vec3(-7, -6, -5).asDiagonal().toDenseMatrix(), Vec3(1, 2, 3));
}

double boundary_radius(const Vec3& d, const DissipationModel& m) {
  return -d.dot(m.b()) / d.dot(m.b_matrix() * d);
}

// Exhaustive scan, then successively finer scans around the best point.
Vec3 brute_force_apogee(const DissipationModel& m) {
  if (m.dimension() == 2) {
    double best_phi = 0.0;
    double best = -1.0;
    double lo = 0.0, hi = 2.0 * kPi;
    for (int level = 0; level < 4; ++level) {
      const int n = 20000;
      for (int i = 0; i <= n; ++i) {
        const double phi = lo + (hi - lo) * i / n;
        const Vec3 d(std::cos(phi), std::sin(phi), 0.0);
        const double r = boundary_radius(d, m);
        if (r > best) {
          best = r;
          best_phi = phi;
        }
      }
      const double w = (hi - lo) / n * 4;
      lo = best_phi - w;
      hi = best_phi + w;
    }
    return best * Vec3(std::cos(best_phi), std::sin(best_phi), 0.0);
  }
  double bt = 0.0, bp = 0.0, best = -1.0;
  double t_lo = 0.0, t_hi = kPi, p_lo = 0.0, p_hi = 2.0 * kPi;
  for (int level = 0; level < 5; ++level) {
    const int n = 400;
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j <= n; ++j) {
        const double t = t_lo + (t_hi - t_lo) * i / n;
        const double p = p_lo + (p_hi - p_lo) * j / n;
        const Vec3 d(std::sin(t) * std::cos(p), std::sin(t) * std::sin(p), std::cos(t));
        const double r = boundary_radius(d, m);
        if (r > best) {
          best = r;
          bt = t;
          bp = p;
        }
      }
    }
    const double wt = (t_hi - t_lo) / n * 4, wp = (p_hi - p_lo) / n * 4;
    t_lo = bt - wt, t_hi = bt + wt, p_lo = bp - wp, p_hi = bp + wp;
  }
  return best * Vec3(std::sin(bt) * std::cos(bp), std::sin(bt) * std::sin(bp), std::cos(bt));
}

// -(M)^{-1} b by the adjugate.
Vec3 solve_by_adjugate(const Mat3& m, const Vec3& b) {
  const Vec3 c0 = m.col(0), c1 = m.col(1), c2 = m.col(2);
  const double det = c0.dot(c1.cross(c2));
  Mat3 inv;
  inv.row(0) = c1.cross(c2).transpose();
  inv.row(1) = c2.cross(c0).transpose();
  inv.row(2) = c0.cross(c1).transpose();
  return -(inv * b) / det;
}

}  // namespace

TEST_CASE("purity derivative is quadratic form plus linear term") {
  const DissipationModel m = space_model();
  const Vec3 q(0.1, -0.2, 0.3);
  const double expect = 1 * 0.1 + 2 * -0.2 + 3 * 0.3 - 7 * 0.01 - 6 * 0.04 - 5 * 0.09;
  CHECK(purity_derivative(q, m) == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("radial root lies on the boundary") {
  const DissipationModel m = space_model();
  RandomSource rng(3);
  for (int k = 0; k < 100; ++k) {
    Vec3 d(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    d.normalize();
    const double r = radial_root(d, m);
    CHECK(std::abs(purity_derivative(r * d, m)) <= 1e-14);
  }
  CHECK_THROWS_AS(radial_root(Vec3(1, 1, 0), m), ValidationError);
  const DissipationModel flat = DissipationModel::from_a(Mat3::Zero(), Vec3(1, 0, 0));
  CHECK_THROWS_AS(radial_root(Vec3(1, 0, 0), flat), PreconditionError);
}

TEST_CASE("2D apogee matches a brute-force scan and the reference value") {
  const auto t0 = std::chrono::steady_clock::now();
  const ChimneyGeometry g = find_apogee(planar_model());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const Vec3 oracle = brute_force_apogee(planar_model());
  CHECK((g.apogee - oracle).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(std::abs(g.apogee.x() - 0.4079) <= 2e-3);
  CHECK(std::abs(g.apogee.y() - 0.4493) <= 2e-3);
  CHECK(g.apogee.z() == 0.0);
  CHECK(g.apogee_radius == doctest::Approx(g.apogee.norm()));
  CHECK(std::abs(purity_derivative(g.apogee, g.model)) <= 1e-12);
  CHECK(secs < 1.0);
}

TEST_CASE("3D apogee matches a brute-force scan and the reference value") {
  const auto t0 = std::chrono::steady_clock::now();
  const ChimneyGeometry g = find_apogee(space_model());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const Vec3 oracle = brute_force_apogee(space_model());
  CHECK((g.apogee - oracle).cwiseAbs().maxCoeff() <= 1e-6);
  const Vec3 reference(0.1140, 0.2954, 0.6287);
  CHECK((g.apogee - reference).cwiseAbs().maxCoeff() <= 2e-3);
  CHECK(g.max_purity() == doctest::Approx(0.5 * (1 + g.apogee.squaredNorm())));
  CHECK(secs < 1.0);
}

TEST_CASE("apogee of a rotated model rotates with it") {
  // Conjugating B and b by a rotation must carry the apogee along.
  const DissipationModel base = space_model();
  const Mat3 r = Eigen::AngleAxisd(0.7, Vec3(1, 2, -1).normalized()).toRotationMatrix();
  const DissipationModel turned =
      DissipationModel::from_b(r * base.b_matrix() * r.transpose(), r * base.b());
  const Vec3 a = find_apogee(base).apogee;
  const Vec3 b = find_apogee(turned).apogee;
  CHECK((r * a - b).cwiseAbs().maxCoeff() <= 1e-7);
}

TEST_CASE("apogee preconditions") {
  const DissipationModel no_drive = DissipationModel::from_b(Vec3(-2, -3, -4).asDiagonal().toDenseMatrix(), Vec3::Zero());
  CHECK_THROWS_AS(find_apogee(no_drive), PreconditionError);
  // A = diag(1, 0, 0) gives B = diag(0, -1, -1): not negative definite.
  const DissipationModel open = DissipationModel::from_a(Vec3(1, 0, 0).asDiagonal().toDenseMatrix(), Vec3(0, 1, 0));
  CHECK_THROWS_AS(find_apogee(open), ValidationError);
}

TEST_CASE("chimney membership") {
  const DissipationModel m = planar_model();
  const ChimneyGeometry g = find_apogee(m);
  CHECK(in_chimney(Vec3::Zero(), m));
  CHECK(in_chimney(0.5 * g.apogee, m));
  CHECK_FALSE(in_chimney(1.01 * g.apogee, m));
  CHECK_FALSE(in_chimney(Vec3(-0.1, -0.1, 0), m));
}

TEST_CASE("boundary conditions") {
  const ChimneyGeometry g = find_apogee(space_model());
  const BoundaryConditions bc = boundary_conditions(g, 1e-3, 1e-3);
  CHECK((bc.q0 - 1e-3 * Vec3(1, 2, 3) / std::sqrt(14.0)).norm() <= 1e-18);
  CHECK((bc.qf - 0.999 * g.apogee).norm() <= 1e-16);
  CHECK(purity_derivative(bc.q0, g.model) > 0.0);
  CHECK(purity_derivative(bc.qf, g.model) > 0.0);
  CHECK_THROWS_AS(boundary_conditions(g, 0.0, 1e-3), ValidationError);
  CHECK_THROWS_AS(boundary_conditions(g, 1e-3, -1.0), ValidationError);
}

TEST_CASE("fixed point agrees with an adjugate solve") {
  const DissipationModel m = space_model();
  RandomSource rng(5);
  for (int k = 0; k < 50; ++k) {
    const Vec3 u(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
    const Vec3 q = fixed_point(m, u);
    CHECK((q - solve_by_adjugate(m.b_matrix() + cross_matrix(u), m.b())).norm() <= 1e-12);
    CHECK(bloch_rhs(q, u, m).norm() <= 1e-12);
  }
}

TEST_CASE("fixed point under the reference 3D end controls") {
  const Vec3 q = fixed_point(space_model(), Vec3(0.0, 1.265, 2.007));
  CHECK((q - Vec3(0.1364, 0.3789, 0.5655)).cwiseAbs().maxCoeff() <= 5e-3);
}

TEST_CASE("planar fixed point uses only the third control") {
  const DissipationModel m = planar_model();
  const Vec3 q = fixed_point(m, Vec3(0, 0, -0.5));
  // (B + u^) restricted to the plane: [[-3, 0.5], [-0.5, -4]].
  Mat2 k;
  k << -3.0, 0.5, -0.5, -4.0;
  const Vec2 expect = -k.inverse() * Vec2(1, 2);
  CHECK((q.head<2>() - expect).norm() <= 1e-14);
  CHECK(q.z() == 0.0);
  CHECK((fixed_point(m, Vec3(3, -2, -0.5)) - q).norm() <= 1e-15);
}

TEST_CASE("direction from angles") {
  CHECK((direction_from_angles(2, 0.3, kPi / 2) - Vec3(0, 1, 0)).norm() <= 1e-15);
  CHECK((direction_from_angles(3, 0.0, 1.0) - Vec3(0, 0, 1)).norm() <= 1e-15);
  CHECK(direction_from_angles(3, 1.1, 2.2).norm() == doctest::Approx(1.0));
}
