#include "purity/bloch_model.hpp"
#include "purity/errors.hpp"
#include "purity/numerics.hpp"
#include "purity/validation.hpp"

#include <doctest.h>

using namespace purity;
using cd = std::complex<double>;

namespace {

// d rho/dt mapped into the Bloch velocity, affine in q. Probing it at the
// origin and the unit vectors recovers b and B without using the
// dissipation formulas.
std::pair<Vec3, Mat3> probe_affine_map(std::span<const LindbladOperator> ops) {
  const HamiltonianControl h;
  auto velocity = [&](const Vec3& q) {
    CMat2 rho = 0.5 * CMat2::Identity();
    for (int j = 0; j < 3; ++j) rho += 0.5 * q(j) * pauli_matrices()[j];
    const CMat2 x = lindblad_rhs(rho, h, ops);
    Vec3 v;
    for (int j = 0; j < 3; ++j) v(j) = 0.5 * (pauli_matrices()[j] * x).trace().real();
    return v;
  };
  const Vec3 c = velocity(Vec3::Zero());
  Mat3 m;
  for (int j = 0; j < 3; ++j) m.col(j) = velocity(Vec3::Unit(j)) - c;
  return {c, m};
}

}  // namespace

TEST_CASE("pauli decomposition reconstructs traceless operators") {
  RandomSource rng(11);
  for (int k = 0; k < 50; ++k) {
    const LindbladOperator op = random_lindblad_operator(rng);
    const CVec3 l = pauli_decompose(op);
    CMat2 back = CMat2::Zero();
    for (int j = 0; j < 3; ++j) back += l(j) * pauli_matrices()[j];
    CHECK((back - op.matrix()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("operators with a trace are rejected") {
  CMat2 m;
  m << cd(1, 0), cd(0, 0), cd(0, 0), cd(0, 0);
  CHECK_THROWS_AS(LindbladOperator{m}, ValidationError);
  m(1, 1) = cd(-1.0 + 5e-13, 0);
  CHECK_NOTHROW(LindbladOperator{m});
}

TEST_CASE("amplitude damping has the textbook dissipation matrices") {
  // L = sqrt(g) |1><0| relaxes toward q_z = -1; in master-equation time
  // q_x' = -g/2 q_x and q_z' = -g (1 + q_z). The Bloch clock runs twice as
  // fast, so b = (0, 0, -g/2) and B = diag(-g/4, -g/4, -g/2).
  const double g = 0.8;
  CMat2 m = CMat2::Zero();
  m(1, 0) = std::sqrt(g);
  const LindbladOperator op(m);
  const std::vector<CVec3> ls{pauli_decompose(op)};
  const DissipationModel model = build_dissipation(ls);
  CHECK(model.b().isApprox(Vec3(0, 0, -g / 2), 1e-15));
  const Mat3 expect_b = Vec3(-g / 4, -g / 4, -g / 2).asDiagonal();
  CHECK((model.b_matrix() - expect_b).cwiseAbs().maxCoeff() <= 1e-15);
  const Mat3 expect_a = Vec3(g / 4, g / 4, 0).asDiagonal();
  CHECK((model.a() - expect_a).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("dissipation matrices match the probed master-equation map") {
  RandomSource rng(12);
  for (int k = 0; k < 100; ++k) {
    std::vector<LindbladOperator> ops;
    const int n = 1 + k % 4;
    for (int j = 0; j < n; ++j) ops.push_back(random_lindblad_operator(rng));
    std::vector<CVec3> ls;
    for (const auto& op : ops) ls.push_back(pauli_decompose(op));
    const DissipationModel model = build_dissipation(ls);
    const auto [c, m] = probe_affine_map(ops);
    CHECK((model.b() - c).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((model.b_matrix() - m).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(Eigen::SelfAdjointEigenSolver<Mat3>(model.a()).eigenvalues().minCoeff() >= -1e-12);
  }
}

TEST_CASE("bloch and master-equation right-hand sides agree on 200 random cases") {
  RandomSource rng(13);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    std::vector<LindbladOperator> ops;
    const int n = 1 + static_cast<int>(rng.uniform(0.0, 3.0));
    for (int j = 0; j < n; ++j) ops.push_back(random_lindblad_operator(rng));
    std::vector<CVec3> ls;
    for (const auto& op : ops) ls.push_back(pauli_decompose(op));
    const DissipationModel model = build_dissipation(ls);
    const Vec3 q = random_ball_point(rng);
    const HamiltonianControl h{rng.uniform(-3, 3),
                               Vec3(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5))};
    const CMat2 rho = density_from_bloch(BlochVector(q)).matrix();
    const Vec3 lhs = bloch_velocity(lindblad_rhs(rho, h, ops));
    worst = std::max(worst, (lhs - bloch_rhs(q, h.u, model)).cwiseAbs().maxCoeff());
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("h0 does not reach the dynamics") {
  RandomSource rng(14);
  const std::vector<LindbladOperator> ops{random_lindblad_operator(rng)};
  const CMat2 rho = density_from_bloch(BlochVector(Vec3(0.1, -0.3, 0.2))).matrix();
  const Vec3 u(0.4, 0.1, -0.7);
  const CMat2 a = lindblad_rhs(rho, {0.0, u}, ops);
  const CMat2 b = lindblad_rhs(rho, {5.0, u}, ops);
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("control term is u x q") {
  const DissipationModel zero = DissipationModel::from_a(Mat3::Zero(), Vec3::Zero());
  const Vec3 q(0.2, 0.3, -0.1);
  const Vec3 u(1.0, -2.0, 0.5);
  CHECK((bloch_rhs(q, u, zero) - u.cross(q)).norm() <= 1e-15);
  CHECK((cross_matrix(u) * q - u.cross(q)).norm() <= 1e-15);
}

TEST_CASE("purity identity on 1000 random states") {
  RandomSource rng(15);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const BlochVector q(random_ball_point(rng));
    const double tr = density_from_bloch(q).purity();
    const CMat2 rho = density_from_bloch(q).matrix();
    const double direct = (rho * rho).trace().real();
    worst = std::max({worst, std::abs(purity::purity(q) - tr), std::abs(purity::purity(q) - direct)});
  }
  CHECK(worst <= 1e-12);
  CHECK(purity::purity(BlochVector(Vec3::Zero())) == doctest::Approx(0.5));
  CHECK(purity::purity(BlochVector(Vec3(0, 0.6, 0.8))) == doctest::Approx(1.0));
}

TEST_CASE("density and bloch vector round trip") {
  RandomSource rng(16);
  for (int k = 0; k < 100; ++k) {
    const Vec3 q = random_ball_point(rng);
    const BlochVector back = bloch_from_density(density_from_bloch(BlochVector(q)));
    CHECK((back.vec() - q).cwiseAbs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("state validation") {
  CHECK_THROWS_AS(BlochVector(Vec3(1.0, 0.1, 0.0)), ValidationError);
  CHECK_NOTHROW(BlochVector(Vec3(1.0 + 5e-10, 0.0, 0.0)));
  CMat2 m;
  m << cd(0.5, 0), cd(0.1, 0.2), cd(0.1, 0.2), cd(0.5, 0);
  CHECK_THROWS_AS(DensityMatrix{m}, ValidationError);  // not Hermitian
  m << cd(0.6, 0), cd(0, 0), cd(0, 0), cd(0.6, 0);
  CHECK_THROWS_AS(DensityMatrix{m}, ValidationError);  // trace 1.2
  m << cd(1.2, 0), cd(0, 0), cd(0, 0), cd(-0.2, 0);
  CHECK_THROWS_AS(DensityMatrix{m}, ValidationError);  // negative eigenvalue
  m << cd(0.5, 0), cd(0, 0.3), cd(0, 0.1), cd(0.5, 0);
  CHECK_THROWS_AS(bloch_coordinates(m), ValidationError);
}

TEST_CASE("A and B inputs are inverse and keep B = A - tr(A) I") {
  Mat3 a;
  a << 2.0, 0.3, 0.1, 0.3, 3.0, -0.2, 0.1, -0.2, 4.0;
  const Vec3 b(1, 2, 3);
  const DissipationModel from_a = DissipationModel::from_a(a, b);
  CHECK((from_a.b_matrix() - (a - a.trace() * Mat3::Identity())).cwiseAbs().maxCoeff() == 0.0);
  const DissipationModel from_b = DissipationModel::from_b(from_a.b_matrix(), b);
  CHECK((from_b.a() - a).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((from_b.b_matrix() - (from_b.a() - from_b.a().trace() * Mat3::Identity()))
            .cwiseAbs()
            .maxCoeff() == 0.0);

  Mat3 bad = Mat3::Identity();
  bad(0, 0) = -1.0;
  CHECK_THROWS_AS(DissipationModel::from_a(bad, b), ValidationError);
  Mat3 skew = a;
  skew(0, 1) += 0.5;
  CHECK_THROWS_AS(DissipationModel::from_a(skew, b), ValidationError);
}

TEST_CASE("3D reference model") {
  const DissipationModel m =
      DissipationModel::from_b(Vec3(-7, -6, -5).asDiagonal().toDenseMatrix(), Vec3(1, 2, 3));
  CHECK((m.a() - Mat3(Vec3(2, 3, 4).asDiagonal())).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(m.largest_b_eigenvalue() == doctest::Approx(-5.0));
  CHECK_NOTHROW(m.require_negative_definite());
}

TEST_CASE("planar shorthand") {
  const DissipationModel m = DissipationModel::planar(-3, -4, 1, 2);
  CHECK(m.dimension() == 2);
  CHECK(m.b_matrix()(0, 0) == -3.0);
  CHECK(m.b_matrix()(1, 1) == -4.0);
  const Mat2 a2 = m.a().topLeftCorner<2, 2>();
  CHECK((m.b_matrix().topLeftCorner<2, 2>() - (a2 - a2.trace() * Mat2::Identity())).norm() == 0.0);
  CHECK(Eigen::SelfAdjointEigenSolver<Mat2>(a2).eigenvalues().minCoeff() >= 0.0);
  CHECK_THROWS_AS(DissipationModel::planar(1, -4, 1, 2).require_negative_definite(), ValidationError);
}
