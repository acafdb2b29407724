#pragma once

// Two-level density matrices and the Bloch-ball form of the Lindblad
// master equation.
//
// Conventions shared by every module:
//   * Pauli coefficients l_k = tr(sigma_k L) / 2, so L = sum_k l_k sigma_k
//     for traceless L.
//   * rho = (I + sum_j q_j sigma_j) / 2.
//   * The control enters as u x q, realised by cross_matrix(u) * q.

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <span>
#include <vector>

namespace purity {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using CVec3 = Eigen::Vector3cd;
using CMat2 = Eigen::Matrix2cd;

/// sigma_1, sigma_2, sigma_3.
const std::array<CMat2, 3>& pauli_matrices();

/// Matrix of the map q -> u x q.
Mat3 cross_matrix(const Vec3& u);

class LindbladOperator {
 public:
  /// Throws ValidationError when |tr L| > 1e-12.
  explicit LindbladOperator(const CMat2& entries);
  const CMat2& matrix() const { return entries_; }

 private:
  CMat2 entries_;
};

/// H = h0 I + sum_k u_k sigma_k. Only u reaches the dynamics.
struct HamiltonianControl {
  double h0 = 0.0;
  Vec3 u = Vec3::Zero();

  CMat2 matrix() const;
};

class DensityMatrix {
 public:
  /// Validates Hermiticity, unit trace and eigenvalues >= -1e-12.
  explicit DensityMatrix(const CMat2& entries);
  const CMat2& matrix() const { return entries_; }
  /// tr(rho^2).
  double purity() const;

 private:
  CMat2 entries_;
};

class BlochVector {
 public:
  /// Throws ValidationError unless ||q|| <= 1 + 1e-9.
  explicit BlochVector(const Vec3& q);
  static BlochVector planar(double x, double y) { return BlochVector(Vec3(x, y, 0.0)); }

  const Vec3& vec() const { return q_; }
  double radius() const { return q_.norm(); }

 private:
  Vec3 q_;
};

/// The real triple (A, b, B) defining dq/dt = b + B q + u x q.
///
/// Planar models (dimension() == 2) keep the third row and column of A and
/// B zero and b_3 = 0; the identity B = A - tr(A) I then holds on the 2x2
/// slice.
class DissipationModel {
 public:
  /// B = A - tr(A) I. Requires symmetric PSD A.
  static DissipationModel from_a(const Mat3& a, const Vec3& b);
  /// A = B - tr(B)/2 I, the inverse of the map above. Requires that A be PSD.
  static DissipationModel from_b(const Mat3& b_matrix, const Vec3& b);
  /// Planar model with B = diag(a1, a2) and b = (b1, b2).
  static DissipationModel planar(double a1, double a2, double b1, double b2);

  int dimension() const { return dim_; }
  const Mat3& a() const { return a_; }
  const Vec3& b() const { return b_; }
  const Mat3& b_matrix() const { return bm_; }

  /// b + B q.
  Vec3 drift(const Vec3& q) const { return b_ + bm_ * q; }

  /// Largest eigenvalue of B restricted to the model's dimension.
  double largest_b_eigenvalue() const;

  /// Throws ValidationError unless B is negative definite on the model's
  /// dimension (largest eigenvalue <= -1e-10).
  void require_negative_definite() const;

 private:
  DissipationModel(const Mat3& a, const Vec3& b, const Mat3& bm, int dim)
      : a_(a), b_(b), bm_(bm), dim_(dim) {}

  Mat3 a_;
  Vec3 b_;
  Mat3 bm_;
  int dim_;
};

/// l_k = tr(sigma_k L) / 2.
CVec3 pauli_decompose(const LindbladOperator& op);

/// A = 1/2 sum (l conj(l)^T + conj(l) l^T), b = i sum l x conj(l).
/// Imaginary residues below 1e-12 are dropped; above 1e-9 they raise
/// ConsistencyError. Throws ValidationError on an empty list.
DissipationModel build_dissipation(std::span<const CVec3> ls);

/// b + B q + u x q.
Vec3 bloch_rhs(const Vec3& q, const Vec3& u, const DissipationModel& model);

/// [-iH, rho] + sum_j (L rho L^dag - {L^dag L, rho}/2).
CMat2 lindblad_rhs(const CMat2& rho, const HamiltonianControl& h,
                   std::span<const LindbladOperator> ops);

DensityMatrix density_from_bloch(const BlochVector& q);
BlochVector bloch_from_density(const DensityMatrix& rho);

/// q_j = tr(sigma_j X) for Hermitian X. Throws ValidationError for
/// non-Hermitian input.
Vec3 bloch_coordinates(const CMat2& hermitian);

/// Image of a master-equation generator d(rho)/dt in the time unit of
/// bloch_rhs: tr(sigma_j X) / 2.
///
/// With l = tr(sigma L)/2 and H = h0 I + u.sigma, the master equation moves
/// q at exactly twice the rate b + B q + u x q, so the Bloch clock runs at
/// twice the master-equation clock.
Vec3 bloch_velocity(const CMat2& generator);

/// (1 + ||q||^2) / 2.
double purity(const BlochVector& q);

}  // namespace purity
