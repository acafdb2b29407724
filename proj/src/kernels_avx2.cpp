// AVX2/FMA variant of the node kernels; this translation unit is built with
// -mavx2 -mfma and only entered after a runtime CPU check.

#include "purity/kernels.hpp"

#include <immintrin.h>

#include <bit>

namespace purity::kernels {

namespace {

inline __m256d abs_pd(__m256d v) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v); }

inline __m256d is_finite_pd(__m256d v) {
  return _mm256_cmp_pd(abs_pd(v), _mm256_set1_pd(__builtin_inf()), _CMP_LT_OQ);
}

// Curve value and slope at four consecutive nodes.
inline void curve4(const NodeTable& t, const std::vector<double>& line, double slope,
                   std::span<const double> c, int j, __m256d& value, __m256d& deriv) {
  const int n = t.count;
  value = _mm256_loadu_pd(line.data() + j);
  deriv = _mm256_set1_pd(slope);
  for (int i = 0; i < t.order; ++i) {
    const __m256d ci = _mm256_set1_pd(c[i]);
    value = _mm256_fmadd_pd(ci, _mm256_loadu_pd(t.basis.data() + i * n + j), value);
    deriv = _mm256_fmadd_pd(ci, _mm256_loadu_pd(t.dbasis.data() + i * n + j), deriv);
  }
}

}  // namespace

KernelResult accumulate_avx2(LagrangianKind kind, const ModelTerms& m, const NodeTable& t,
                             std::span<const double> cy, std::span<const double> cz) {
  const bool planar = kind == LagrangianKind::time2d || kind == LagrangianKind::energy2d;
  const bool energy = kind == LagrangianKind::energy2d || kind == LagrangianKind::energy3d;
  const int n = t.count;
  const int vec_end = n - n % 4;

  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d tiny = _mm256_set1_pd(kSingular);
  const __m256d orient = _mm256_set1_pd(m.orientation);
  __m256d b[3];
  __m256d bm[9];
  for (int i = 0; i < 3; ++i) b[i] = _mm256_set1_pd(m.b[i]);
  for (int i = 0; i < 9; ++i) bm[i] = _mm256_set1_pd(m.bm[i]);

  __m256d acc = zero;
  int bad_count = 0;

  for (int j = 0; j < vec_end; j += 4) {
    const __m256d x = _mm256_loadu_pd(t.x.data() + j);
    __m256d y, yp;
    curve4(t, t.y_line, t.y_slope, cy, j, y, yp);

    __m256d f, radial, lag, bad;
    if (planar) {
      const __m256d d1 = _mm256_fmadd_pd(bm[1], y, _mm256_fmadd_pd(bm[0], x, b[0]));
      const __m256d d2 = _mm256_fmadd_pd(bm[4], y, _mm256_fmadd_pd(bm[3], x, b[1]));
      f = _mm256_fmadd_pd(y, d2, _mm256_mul_pd(x, d1));
      radial = _mm256_fmadd_pd(y, yp, x);
      const __m256d dtdx = _mm256_div_pd(radial, f);
      bad = _mm256_or_pd(_mm256_cmp_pd(f, tiny, _CMP_NGE_UQ),
                         _mm256_cmp_pd(_mm256_mul_pd(orient, dtdx), zero, _CMP_NGT_UQ));
      if (energy) {
        bad = _mm256_or_pd(bad, _mm256_cmp_pd(abs_pd(radial), tiny, _CMP_NGE_UQ));
        const __m256d u = _mm256_div_pd(_mm256_fmsub_pd(yp, d1, d2), radial);
        lag = _mm256_mul_pd(_mm256_mul_pd(u, u), dtdx);
      } else {
        lag = dtdx;
      }
    } else {
      __m256d z, zp;
      curve4(t, t.z_line, t.z_slope, cz, j, z, zp);
      const __m256d q[3] = {x, y, z};
      const __m256d v[3] = {one, yp, zp};
      __m256d d[3];
      for (int i = 0; i < 3; ++i) {
        d[i] = _mm256_fmadd_pd(bm[3 * i + 2], z,
                               _mm256_fmadd_pd(bm[3 * i + 1], y, _mm256_fmadd_pd(bm[3 * i], x, b[i])));
      }
      f = _mm256_fmadd_pd(z, d[2], _mm256_fmadd_pd(y, d[1], _mm256_mul_pd(x, d[0])));
      radial = _mm256_fmadd_pd(z, zp, _mm256_fmadd_pd(y, yp, x));
      const __m256d dtdx = _mm256_div_pd(radial, f);
      bad = _mm256_or_pd(_mm256_cmp_pd(f, tiny, _CMP_NGE_UQ),
                         _mm256_cmp_pd(_mm256_mul_pd(orient, dtdx), zero, _CMP_NGT_UQ));
      if (energy) {
        const int k = m.zeroed;
        const int k1 = (k + 1) % 3;
        const int k2 = (k + 2) % 3;
        const __m256d den = _mm256_mul_pd(q[k], radial);
        bad = _mm256_or_pd(bad, _mm256_cmp_pd(abs_pd(den), tiny, _CMP_NGE_UQ));
        const __m256d n1 = _mm256_fmsub_pd(f, v[k1], _mm256_mul_pd(d[k1], radial));
        const __m256d n2 = _mm256_fmsub_pd(f, v[k2], _mm256_mul_pd(d[k2], radial));
        const __m256d ua = _mm256_div_pd(n2, den);
        const __m256d ub = _mm256_div_pd(n1, den);
        const __m256d u2 = _mm256_fmadd_pd(ub, ub, _mm256_mul_pd(ua, ua));
        lag = _mm256_mul_pd(u2, dtdx);
      } else {
        lag = dtdx;
      }
    }
    bad = _mm256_or_pd(bad, _mm256_xor_pd(is_finite_pd(lag), _mm256_castsi256_pd(_mm256_set1_epi64x(-1))));
    bad_count += std::popcount(static_cast<unsigned>(_mm256_movemask_pd(bad)));
    const __m256d w = _mm256_loadu_pd(t.weight.data() + j);
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(bad, _mm256_mul_pd(w, lag)));
  }

  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  KernelResult r;
  r.sum = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  r.bad = bad_count;

  for (int j = vec_end; j < n; ++j) {
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
    const NodeSample s = evaluate_node(kind, m, t.x[j], y, yp, z, zp);
    if (s.bad) {
      ++r.bad;
    } else {
      r.sum += t.weight[j] * s.lagrangian;
    }
  }
  return r;
}

}  // namespace purity::kernels
