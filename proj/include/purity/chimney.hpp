#pragma once

// Geometry of the purity-growth region.
//
// f(q) = <q, b + B q> is r dr/dt along any controlled flow. The escape
// chimney is U = {f >= 0}, an ellipsoid through the origin; its point of
// largest norm (the apogee) is the state of maximal reachable purity.

#include "purity/bloch_model.hpp"

namespace purity {

struct ChimneyGeometry {
  DissipationModel model;
  Vec3 apogee;
  double apogee_radius;

  /// (1 + r^2) / 2 at the apogee.
  double max_purity() const { return 0.5 * (1.0 + apogee_radius * apogee_radius); }
};

struct BoundaryConditions {
  Vec3 q0;
  Vec3 qf;
  double epsilon;
  double delta;
};

/// <q, b + B q>.
double purity_derivative(const Vec3& q, const DissipationModel& model);

/// Nonzero root g(qhat) = -<qhat, b> / <qhat, B qhat> of r -> f(r qhat).
/// Throws ValidationError for a non-unit direction and PreconditionError
/// when <qhat, B qhat> >= 0.
double radial_root(const Vec3& qhat, const DissipationModel& model);

/// Maximizes g over the unit sphere (unit circle for planar models) with a
/// 16-start simplex search, polishes, and certifies the result against a
/// dense angular scan.
///
/// Throws ValidationError when B is not negative definite or the apogee
/// leaves the unit ball, PreconditionError when b = 0.
ChimneyGeometry find_apogee(const DissipationModel& model);

/// f(q) >= 0.
bool in_chimney(const Vec3& q, const DissipationModel& model);

/// q0 = epsilon b / |b|, qf = (1 - delta) apogee.
BoundaryConditions boundary_conditions(const ChimneyGeometry& geom, double epsilon, double delta);

/// Stationary state -(B + u^)^{-1} b under the constant control u. Planar
/// models solve on the 2x2 slice, where only u_3 acts. Throws
/// PreconditionError when the matrix is singular.
Vec3 fixed_point(const DissipationModel& model, const Vec3& u);

/// Point of the unit sphere (circle when dim == 2) for the given angles:
/// (cos phi, sin phi) in 2D, (sin theta cos phi, sin theta sin phi, cos theta)
/// in 3D.
Vec3 direction_from_angles(int dim, double theta, double phi);

}  // namespace purity
