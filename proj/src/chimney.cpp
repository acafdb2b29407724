#include "purity/chimney.hpp"

#include "purity/errors.hpp"
#include "purity/numerics.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace purity {

namespace {

struct Candidate {
  Vec3 q;
  double g;
  std::array<double, 2> angles;
};

bool lexicographically_greater(const Vec3& a, const Vec3& b) {
  for (int i = 0; i < 3; ++i) {
    if (a(i) != b(i)) return a(i) > b(i);
  }
  return false;
}

// Candidates closer than this in g count as ties.
constexpr double kTieTol = 1e-12;

}  // namespace

double purity_derivative(const Vec3& q, const DissipationModel& model) {
  return q.dot(model.drift(q));
}

double radial_root(const Vec3& qhat, const DissipationModel& model) {
  if (std::abs(qhat.norm() - 1.0) > 1e-10) {
    throw ValidationError("radial_root needs a unit direction");
  }
  const double curvature = qhat.dot(model.b_matrix() * qhat);
  if (!(curvature < 0.0)) {
    throw PreconditionError("degenerate dissipation: <q, B q> >= 0 along the direction");
  }
  return -qhat.dot(model.b()) / curvature;
}

Vec3 direction_from_angles(int dim, double theta, double phi) {
  if (dim == 2) return Vec3(std::cos(phi), std::sin(phi), 0.0);
  return Vec3(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
}

ChimneyGeometry find_apogee(const DissipationModel& model) {
  model.require_negative_definite();
  if (model.b().norm() == 0.0) {
    throw PreconditionError("no chimney: b = 0 makes g vanish and the apogee is the origin");
  }
  const int dim = model.dimension();
  constexpr double pi = std::numbers::pi;

  auto g_at = [&](double theta, double phi) {
    return radial_root(direction_from_angles(dim, theta, phi), model);
  };
  auto angles_of = [&](std::span<const double> v) -> std::array<double, 2> {
    return dim == 2 ? std::array<double, 2>{pi / 2, v[0]} : std::array<double, 2>{v[0], v[1]};
  };
  const Objective negative_g = [&](std::span<const double> v) {
    const auto a = angles_of(v);
    return -g_at(a[0], a[1]);
  };

  OptimizerConfig tight;
  tight.x_tolerance = 1e-13;
  tight.f_tolerance = 1e-16;
  tight.max_iterations = 2000;

  auto climb = [&](std::array<double, 2> start) {
    std::vector<double> v = dim == 2 ? std::vector<double>{start[1]}
                                     : std::vector<double>{start[0], start[1]};
    MinimizeResult r = nelder_mead(negative_g, v, tight);
    // Polish: restart from the converged vertex with a fresh simplex.
    r = nelder_mead(negative_g, r.x, tight);
    const auto a = angles_of(r.x);
    const double g = -r.value;
    return Candidate{g * direction_from_angles(dim, a[0], a[1]), g, a};
  };

  std::vector<std::array<double, 2>> starts;
  constexpr int kStarts = 16;
  if (dim == 2) {
    for (int k = 0; k < kStarts; ++k) starts.push_back({pi / 2, 2.0 * pi * k / kStarts});
  } else {
    // Fibonacci lattice on the sphere.
    const double golden = pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < kStarts; ++k) {
      const double z = 1.0 - (2.0 * k + 1.0) / kStarts;
      starts.push_back({std::acos(z), std::fmod(golden * k, 2.0 * pi)});
    }
  }

  auto better = [](const Candidate& a, const Candidate& b) {
    if (a.g > b.g + kTieTol) return true;
    if (a.g < b.g - kTieTol) return false;
    return lexicographically_greater(a.q, b.q);
  };

  Candidate best = climb(starts.front());
  for (std::size_t k = 1; k < starts.size(); ++k) {
    Candidate c = climb(starts[k]);
    if (better(c, best)) best = c;
  }

  // Certification against a dense angular scan; a better grid point means
  // every start missed a basin, so climb from there instead.
  double grid_best = -1.0;
  std::array<double, 2> grid_arg{};
  if (dim == 2) {
    constexpr int n = 2000;
    for (int i = 0; i < n; ++i) {
      const double phi = 2.0 * pi * i / n;
      const double g = g_at(pi / 2, phi);
      if (g > grid_best) {
        grid_best = g;
        grid_arg = {pi / 2, phi};
      }
    }
  } else {
    constexpr int nphi = 360;
    constexpr int ntheta = 180;
    for (int i = 0; i < ntheta; ++i) {
      const double theta = pi * (i + 0.5) / ntheta;
      for (int j = 0; j < nphi; ++j) {
        const double phi = 2.0 * pi * j / nphi;
        const double g = g_at(theta, phi);
        if (g > grid_best) {
          grid_best = g;
          grid_arg = {theta, phi};
        }
      }
    }
  }
  if (grid_best > best.g + 1e-10) {
    Candidate c = climb(grid_arg);
    if (better(c, best)) best = c;
  }

  if (best.g > 1.0 + 1e-6) {
    throw ValidationError("apogee radius exceeds 1: the model does not keep the Bloch ball invariant");
  }
  return ChimneyGeometry{model, best.q, best.q.norm()};
}

bool in_chimney(const Vec3& q, const DissipationModel& model) {
  return purity_derivative(q, model) >= 0.0;
}

BoundaryConditions boundary_conditions(const ChimneyGeometry& geom, double epsilon, double delta) {
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  if (!(delta > 0.0)) throw ValidationError("delta must be positive");
  const Vec3& b = geom.model.b();
  BoundaryConditions bc{epsilon * b / b.norm(), (1.0 - delta) * geom.apogee, epsilon, delta};
  if (!(purity_derivative(bc.q0, geom.model) > 0.0)) {
    throw ValidationError("epsilon too large: q0 lies outside the escape chimney");
  }
  return bc;
}

Vec3 fixed_point(const DissipationModel& model, const Vec3& u) {
  const Mat3 m = model.b_matrix() + cross_matrix(u);
  if (model.dimension() == 2) {
    const Mat2 m2 = m.topLeftCorner<2, 2>();
    Eigen::FullPivLU<Mat2> lu(m2);
    if (!lu.isInvertible()) throw PreconditionError("B + u^ is singular");
    const Vec2 q = -lu.solve(model.b().head<2>());
    return Vec3(q(0), q(1), 0.0);
  }
  Eigen::FullPivLU<Mat3> lu(m);
  if (!lu.isInvertible()) throw PreconditionError("B + u^ is singular");
  return -lu.solve(model.b());
}

}  // namespace purity
