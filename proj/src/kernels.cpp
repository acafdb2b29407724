#include "purity/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>

namespace purity::kernels {

namespace {

bool is_planar(LagrangianKind kind) {
  return kind == LagrangianKind::time2d || kind == LagrangianKind::energy2d;
}

}  // namespace

NodeSample evaluate_node(LagrangianKind kind, const ModelTerms& m, double x, double y, double yp,
                         double z, double zp) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  NodeSample s;
  s.x = x;
  s.y = y;
  s.yp = yp;
  const auto& bm = m.bm;
  if (is_planar(kind)) {
    const double d1 = m.b[0] + bm[0] * x + bm[1] * y;
    const double d2 = m.b[1] + bm[3] * x + bm[4] * y;
    const double f = x * d1 + y * d2;
    const double radial = x + y * yp;
    s.f = f;
    s.dtdx = radial / f;
    bool bad = !(f >= kSingular) || !(m.orientation * s.dtdx > 0.0);
    const bool control_ok = std::abs(radial) >= kSingular;
    const double u = control_ok ? (yp * d1 - d2) / radial : nan;
    s.u = {0.0, 0.0, u};
    if (kind == LagrangianKind::time2d) {
      s.lagrangian = s.dtdx;
    } else {
      bad = bad || !control_ok;
      s.lagrangian = u * u * s.dtdx;
    }
    s.bad = bad || !std::isfinite(s.lagrangian);
    return s;
  }

  s.z = z;
  s.zp = zp;
  const double q[3] = {x, y, z};
  const double v[3] = {1.0, yp, zp};
  double d[3];
  for (int i = 0; i < 3; ++i) d[i] = m.b[i] + bm[3 * i] * x + bm[3 * i + 1] * y + bm[3 * i + 2] * z;
  const double f = x * d[0] + y * d[1] + z * d[2];
  const double radial = x + y * yp + z * zp;
  s.f = f;
  s.dtdx = radial / f;
  bool bad = !(f >= kSingular) || !(m.orientation * s.dtdx > 0.0);

  // u x q = (f v - s d) / s with u_k = 0 gives u = e_k x n / (q_k s).
  double n[3];
  for (int i = 0; i < 3; ++i) n[i] = f * v[i] - d[i] * radial;
  const int k = m.zeroed;
  const double den = q[k] * radial;
  const bool control_ok = std::abs(den) >= kSingular;
  if (control_ok) {
    const int k1 = (k + 1) % 3;
    const int k2 = (k + 2) % 3;
    s.u[k] = 0.0;
    s.u[k1] = -n[k2] / den;
    s.u[k2] = n[k1] / den;
  } else {
    s.u = {nan, nan, nan};
  }
  if (kind == LagrangianKind::time3d) {
    s.lagrangian = s.dtdx;
  } else {
    bad = bad || !control_ok;
    const double u2 = s.u[0] * s.u[0] + s.u[1] * s.u[1] + s.u[2] * s.u[2];
    s.lagrangian = u2 * s.dtdx;
  }
  s.bad = bad || !std::isfinite(s.lagrangian);
  return s;
}

namespace {

template <typename Visit>
void for_each_node(LagrangianKind kind, const ModelTerms& model, const NodeTable& t,
                   std::span<const double> cy, std::span<const double> cz, Visit&& visit) {
  const bool planar = is_planar(kind);
  const int n = t.count;
  for (int j = 0; j < n; ++j) {
    double y = t.y_line[j];
    double yp = t.y_slope;
    double z = 0.0;
    double zp = 0.0;
    for (int i = 0; i < t.order; ++i) {
      y += cy[i] * t.basis[i * n + j];
      yp += cy[i] * t.dbasis[i * n + j];
    }
    if (!planar) {
      z = t.z_line[j];
      zp = t.z_slope;
      for (int i = 0; i < t.order; ++i) {
        z += cz[i] * t.basis[i * n + j];
        zp += cz[i] * t.dbasis[i * n + j];
      }
    }
    visit(j, evaluate_node(kind, model, t.x[j], y, yp, z, zp));
  }
}

}  // namespace

KernelResult accumulate_scalar(LagrangianKind kind, const ModelTerms& model,
                               const NodeTable& table, std::span<const double> cy,
                               std::span<const double> cz) {
  KernelResult r;
  for_each_node(kind, model, table, cy, cz, [&](int j, const NodeSample& s) {
    if (s.bad) {
      ++r.bad;
    } else {
      r.sum += table.weight[j] * s.lagrangian;
    }
  });
  return r;
}

std::vector<NodeSample> sample_nodes(LagrangianKind kind, const ModelTerms& model,
                                     const NodeTable& table, std::span<const double> cy,
                                     std::span<const double> cz) {
  std::vector<NodeSample> out;
  out.reserve(static_cast<std::size_t>(table.count));
  for_each_node(kind, model, table, cy, cz,
                [&](int, const NodeSample& s) { out.push_back(s); });
  return out;
}

std::string_view to_string(SimdLevel level) {
  switch (level) {
    case SimdLevel::avx2:
      return "avx2";
    case SimdLevel::scalar:
      break;
  }
  return "scalar";
}

SimdLevel detected_simd_level() {
#if defined(PURITY_HAVE_AVX2_KERNEL) && (defined(__GNUC__) || defined(__clang__))
  static const bool avx2 = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  if (avx2) return SimdLevel::avx2;
#endif
  return SimdLevel::scalar;
}

SimdLevel active_simd_level() {
  static const SimdLevel level = [] {
    const char* env = std::getenv("PURITY_SIMD");
    if (env != nullptr && std::strcmp(env, "scalar") == 0) return SimdLevel::scalar;
    return detected_simd_level();
  }();
  return level;
}

KernelResult accumulate(LagrangianKind kind, const ModelTerms& model, const NodeTable& table,
                        std::span<const double> cy, std::span<const double> cz) {
#ifdef PURITY_HAVE_AVX2_KERNEL
  if (active_simd_level() == SimdLevel::avx2) {
    return accumulate_avx2(kind, model, table, cy, cz);
  }
#endif
  return accumulate_scalar(kind, model, table, cy, cz);
}

}  // namespace purity::kernels
