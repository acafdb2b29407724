#pragma once

// Node-batched Lagrangian kernels.
//
// The cost functional is a weighted sum of a pointwise Lagrangian over the
// 2N+1 quadrature nodes of the x-grid. The trial curve at every node is a
// fixed line plus a linear combination of tabulated basis values, so one
// functional evaluation is a short matrix-vector product followed by
// elementwise arithmetic. `accumulate` runs that loop with the best
// instruction set the CPU offers; `accumulate_scalar` is the reference that
// the vector variants are tested against.

#include <array>
#include <span>
#include <string_view>
#include <vector>

namespace purity::kernels {

enum class LagrangianKind { time2d, energy2d, time3d, energy3d };

/// Dissipation data flattened for the kernels. `zeroed` is the 0-based
/// index of the control fixed at zero in the 3D energy problem.
struct ModelTerms {
  std::array<double, 3> b{};
  std::array<double, 9> bm{};  // row-major B
  int zeroed = 0;
  /// +1 when x increases from start to end, -1 otherwise; feasible nodes
  /// need f >= kSingular (inside the chimney) and orientation * dt/dx > 0.
  double orientation = 1.0;
};

/// Basis values tabulated on the quadrature nodes.
struct NodeTable {
  int count = 0;
  int order = 0;
  std::vector<double> x;
  std::vector<double> weight;
  std::vector<double> y_line;
  std::vector<double> z_line;
  double y_slope = 0.0;
  double z_slope = 0.0;
  /// basis[i * count + j] = y^{i+1}(x_j); dbasis likewise for the derivative.
  std::vector<double> basis;
  std::vector<double> dbasis;
};

struct KernelResult {
  double sum = 0.0;
  int bad = 0;
};

/// Everything known about the curve and the Lagrangian at one node.
struct NodeSample {
  double x = 0.0, y = 0.0, z = 0.0;
  double yp = 0.0, zp = 0.0;
  std::array<double, 3> u{};
  double dtdx = 0.0;
  double f = 0.0;
  double lagrangian = 0.0;
  bool bad = false;
};

/// Singularity threshold for |f| and the control denominators.
inline constexpr double kSingular = 1e-12;

/// Reference evaluation of a single node from curve values.
NodeSample evaluate_node(LagrangianKind kind, const ModelTerms& model, double x, double y,
                         double yp, double z, double zp);

KernelResult accumulate_scalar(LagrangianKind kind, const ModelTerms& model,
                               const NodeTable& table, std::span<const double> cy,
                               std::span<const double> cz);

#if defined(__x86_64__) || defined(_M_X64)
#define PURITY_HAVE_AVX2_KERNEL 1
KernelResult accumulate_avx2(LagrangianKind kind, const ModelTerms& model,
                             const NodeTable& table, std::span<const double> cy,
                             std::span<const double> cz);
#endif

enum class SimdLevel { scalar, avx2 };

std::string_view to_string(SimdLevel level);

/// Best level supported by this CPU.
SimdLevel detected_simd_level();

/// Level used by `accumulate`: the detected level unless the PURITY_SIMD
/// environment variable requests `scalar`.
SimdLevel active_simd_level();

KernelResult accumulate(LagrangianKind kind, const ModelTerms& model, const NodeTable& table,
                        std::span<const double> cy, std::span<const double> cz);

/// Per-node samples, computed with the reference path.
std::vector<NodeSample> sample_nodes(LagrangianKind kind, const ModelTerms& model,
                                     const NodeTable& table, std::span<const double> cy,
                                     std::span<const double> cz);

}  // namespace purity::kernels
