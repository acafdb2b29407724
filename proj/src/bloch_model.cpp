#include "purity/bloch_model.hpp"

#include "purity/errors.hpp"

#include <cmath>
#include <sstream>

namespace purity {

namespace {

using cd = std::complex<double>;

constexpr double kTraceTol = 1e-12;
constexpr double kFailImag = 1e-9;

bool is_hermitian(const CMat2& m, double tol) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

std::string format_residue(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

}  // namespace

const std::array<CMat2, 3>& pauli_matrices() {
  static const std::array<CMat2, 3> sigma = [] {
    std::array<CMat2, 3> s;
    s[0] << 0, 1, 1, 0;
    s[1] << 0, cd(0, -1), cd(0, 1), 0;
    s[2] << 1, 0, 0, -1;
    return s;
  }();
  return sigma;
}

Mat3 cross_matrix(const Vec3& u) {
  Mat3 m;
  m << 0, -u(2), u(1),
       u(2), 0, -u(0),
       -u(1), u(0), 0;
  return m;
}

LindbladOperator::LindbladOperator(const CMat2& entries) : entries_(entries) {
  const double residue = std::abs(entries.trace());
  if (!(residue <= kTraceTol)) {
    throw ValidationError("Lindblad operator must be traceless; |trace| = " +
                          format_residue(residue));
  }
}

CMat2 HamiltonianControl::matrix() const {
  const auto& s = pauli_matrices();
  CMat2 h = h0 * CMat2::Identity();
  for (int k = 0; k < 3; ++k) h += u(k) * s[k];
  return h;
}

DensityMatrix::DensityMatrix(const CMat2& entries) : entries_(entries) {
  if (!is_hermitian(entries, 1e-12)) throw ValidationError("density matrix is not Hermitian");
  if (std::abs(entries.trace() - cd(1.0)) > 1e-12) {
    throw ValidationError("density matrix trace differs from 1");
  }
  Eigen::SelfAdjointEigenSolver<CMat2> eig(entries, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-12) {
    throw ValidationError("density matrix has a negative eigenvalue");
  }
}

double DensityMatrix::purity() const { return (entries_ * entries_).trace().real(); }

BlochVector::BlochVector(const Vec3& q) : q_(q) {
  if (!q.allFinite() || q.norm() > 1.0 + 1e-9) {
    throw ValidationError("Bloch vector lies outside the unit ball");
  }
}

DissipationModel DissipationModel::from_a(const Mat3& a, const Vec3& b) {
  if (!a.allFinite() || !b.allFinite()) throw ValidationError("model entries must be finite");
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ValidationError("A must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(a, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-12) {
    throw ValidationError("A must be positive semi-definite; min eigenvalue = " +
                          format_residue(eig.eigenvalues().minCoeff()));
  }
  const Mat3 bm = a - a.trace() * Mat3::Identity();
  return DissipationModel(a, b, bm, 3);
}

DissipationModel DissipationModel::from_b(const Mat3& b_matrix, const Vec3& b) {
  if (!b_matrix.allFinite() || !b.allFinite()) {
    throw ValidationError("model entries must be finite");
  }
  // tr(B) = -2 tr(A) in three dimensions.
  const Mat3 a = b_matrix - 0.5 * b_matrix.trace() * Mat3::Identity();
  return from_a(0.5 * (a + a.transpose()), b);
}

DissipationModel DissipationModel::planar(double a1, double a2, double b1, double b2) {
  if (!std::isfinite(a1) || !std::isfinite(a2) || !std::isfinite(b1) || !std::isfinite(b2)) {
    throw ValidationError("model entries must be finite");
  }
  Mat3 bm = Mat3::Zero();
  bm(0, 0) = a1;
  bm(1, 1) = a2;
  // On the 2x2 slice tr(B) = -tr(A), so A = B - tr(B) I.
  Mat3 a = Mat3::Zero();
  a(0, 0) = a1 - (a1 + a2);
  a(1, 1) = a2 - (a1 + a2);
  return DissipationModel(a, Vec3(b1, b2, 0.0), bm, 2);
}

double DissipationModel::largest_b_eigenvalue() const {
  if (dim_ == 2) {
    Eigen::SelfAdjointEigenSolver<Mat2> eig(bm_.topLeftCorner<2, 2>(), Eigen::EigenvaluesOnly);
    return eig.eigenvalues().maxCoeff();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(bm_, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

void DissipationModel::require_negative_definite() const {
  const double top = largest_b_eigenvalue();
  if (!(top <= -1e-10)) {
    throw ValidationError("B must be negative definite; largest eigenvalue = " +
                          format_residue(top));
  }
}

CVec3 pauli_decompose(const LindbladOperator& op) {
  const auto& s = pauli_matrices();
  CVec3 l;
  for (int k = 0; k < 3; ++k) l(k) = 0.5 * (s[k] * op.matrix()).trace();
  return l;
}

DissipationModel build_dissipation(std::span<const CVec3> ls) {
  if (ls.empty()) throw ValidationError("at least one Lindblad vector is required");
  Eigen::Matrix3cd a = Eigen::Matrix3cd::Zero();
  CVec3 b = CVec3::Zero();
  for (const CVec3& l : ls) {
    const CVec3 lc = l.conjugate();
    a += 0.5 * (l * lc.transpose() + lc * l.transpose());
    // Written out: Eigen's cross() conjugates its result for complex input.
    const CVec3 lxlc(l(1) * lc(2) - l(2) * lc(1), l(2) * lc(0) - l(0) * lc(2),
                     l(0) * lc(1) - l(1) * lc(0));
    b += cd(0, 1) * lxlc;
  }
  const double residue = std::max(a.imag().cwiseAbs().maxCoeff(), b.imag().cwiseAbs().maxCoeff());
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (residue > kFailImag * scale) {
    throw ConsistencyError("imaginary residue " + format_residue(residue) +
                           " in dissipation matrices");
  }
  Mat3 ar = a.real();
  Vec3 br = b.real();
  // Residues under the failure threshold are rounding and are dropped.
  ar = 0.5 * (ar + ar.transpose());
  return DissipationModel::from_a(ar, br);
}

Vec3 bloch_rhs(const Vec3& q, const Vec3& u, const DissipationModel& model) {
  return model.drift(q) + cross_matrix(u) * q;
}

CMat2 lindblad_rhs(const CMat2& rho, const HamiltonianControl& h,
                   std::span<const LindbladOperator> ops) {
  const CMat2 hm = h.matrix();
  CMat2 out = cd(0, -1) * (hm * rho - rho * hm);
  for (const LindbladOperator& op : ops) {
    const CMat2& l = op.matrix();
    const CMat2 ld = l.adjoint();
    const CMat2 ldl = ld * l;
    out += l * rho * ld - 0.5 * (ldl * rho + rho * ldl);
  }
  return out;
}

DensityMatrix density_from_bloch(const BlochVector& q) {
  const auto& s = pauli_matrices();
  CMat2 rho = 0.5 * CMat2::Identity();
  for (int j = 0; j < 3; ++j) rho += 0.5 * q.vec()(j) * s[j];
  return DensityMatrix(rho);
}

Vec3 bloch_coordinates(const CMat2& hermitian) {
  const double scale = std::max(1.0, hermitian.cwiseAbs().maxCoeff());
  if (!is_hermitian(hermitian, 1e-12 * scale)) {
    throw ValidationError("matrix is not Hermitian");
  }
  const auto& s = pauli_matrices();
  Vec3 q;
  for (int j = 0; j < 3; ++j) q(j) = (s[j] * hermitian).trace().real();
  return q;
}

Vec3 bloch_velocity(const CMat2& generator) { return 0.5 * bloch_coordinates(generator); }

BlochVector bloch_from_density(const DensityMatrix& rho) {
  return BlochVector(bloch_coordinates(rho.matrix()));
}

double purity(const BlochVector& q) { return 0.5 * (1.0 + q.vec().squaredNorm()); }

}  // namespace purity
