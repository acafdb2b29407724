#pragma once

// Rayleigh-Ritz solver for the time- and energy-minimal steering problems.
//
// The trajectory is written as a graph over x: y(x) (and z(x) in 3D) equal
// the chord between the endpoints plus sum_i c_i (x - x0)(x - xf)^i. Along
// such a curve dt/dx = (q . q') / f(q) with q' = (1, y', z'), so both costs
// become x-integrals of a Lagrangian in (q, q'). The coefficients are found
// by driving nu(c) = |grad_c I| to zero from many random starts.

#include "purity/bloch_model.hpp"
#include "purity/chimney.hpp"
#include "purity/kernels.hpp"
#include "purity/numerics.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace purity {

enum class CostKind { time, energy };

std::string_view to_string(CostKind kind);

enum class WarmStart { never, fallback, always };

std::string_view to_string(WarmStart mode);

/// Value used by the functional for curves with singular or retrograde
/// nodes; the count of such nodes is added to it.
inline constexpr double kPenalty = 1e10;

struct ProblemSpec {
  ProblemSpec(DissipationModel m, const BoundaryConditions& bc) : model(std::move(m)), bounds(bc) {}

  DissipationModel model;
  int dimension = 2;
  CostKind objective = CostKind::time;
  /// 1-based index of the control held at zero (3D energy problem).
  int zeroed_control = 1;
  BoundaryConditions bounds;
  int order = 1;
  int panels = 1000;
  int multistart = 25;
  std::uint64_t seed = 0;
  double start_radius = 2.0;
  double residual_tolerance = 1e-4;
  double fd_step = 1e-6;
  /// Extra Nelder-Mead runs from the last point while nu stays above the
  /// tolerance and keeps improving.
  int max_restarts = 6;
  /// When to descend on the functional itself before the nu search: never,
  /// only for a second pass after every plain start failed, or always.
  WarmStart warm_start = WarmStart::fallback;
  OptimizerConfig optimizer;

  Grid grid() const { return Grid(bounds.q0.x(), bounds.qf.x(), panels); }
  int coefficient_count() const { return dimension == 3 ? 2 * order : order; }
};

/// Throws ValidationError naming the offending field.
void validate(const ProblemSpec& spec);

/// Builds the spec for one model: apogee, boundary conditions and defaults.
ProblemSpec make_problem(const DissipationModel& model, CostKind objective, int order,
                         double epsilon = 1e-3, double delta = 1e-3);

/// Value and x-derivative of basis function i at x. i = 0 is the chord
/// through (x0, y0) and (xf, yf); i >= 1 is (x - x0)(x - xf)^i.
std::pair<double, double> basis_eval(int i, double x, double x0, double xf, double y0, double yf);

struct CurvePoint {
  double y = 0.0, yp = 0.0, z = 0.0, zp = 0.0;
};

class BasisCurve {
 public:
  /// `coefficients` holds c_y, followed by c_z for 3D curves.
  BasisCurve(std::vector<double> coefficients, int dimension, const Vec3& start, const Vec3& end);

  CurvePoint eval(double x) const;
  int order() const { return order_; }
  int dimension() const { return dim_; }
  const std::vector<double>& coefficients() const { return c_; }

 private:
  std::vector<double> c_;
  int dim_;
  int order_;
  Vec3 start_;
  Vec3 end_;
};

// Pointwise Lagrangians. q' = (1, y', z') is the x-derivative of q. All
// throw SingularIntegrand at the singular sets noted.

/// dt/dx = (q . q') / f(q). Singular where |f| < 1e-12.
double lagrangian_time(const Vec3& q, const Vec3& qp, const DissipationModel& model);

/// Planar control that makes the flow slope equal y':
/// u = (y' d_1 - d_2) / (x + y y'), d = b + B q. Singular where x + y y' = 0.
double control_from_slope_2d(const Vec3& q, double yp, const DissipationModel& model);

/// (d_2 - y' d_1)^2 / ((x + y y') f(q)) = u^2 dt/dx.
double lagrangian_energy_2d(const Vec3& q, const Vec3& qp, const DissipationModel& model);

/// Controls in the u x q convention, with u_k = 0 for k = zeroed_control,
/// whose flow has slopes (y', z'). Singular where q_k (q . q') = 0.
Vec3 controls_from_slope_3d(const Vec3& q, double yp, double zp, const DissipationModel& model,
                            int zeroed_control = 1);

/// |u|^2 dt/dx with u from controls_from_slope_3d.
double lagrangian_energy_3d(const Vec3& q, const Vec3& qp, const DissipationModel& model,
                            int zeroed_control = 1);

/// Cached evaluator of the cost functional for one spec.
class Functional {
 public:
  explicit Functional(const ProblemSpec& spec);
  Functional(const ProblemSpec& spec, CostKind cost);

  /// Quadrature of the Lagrangian; kPenalty + (bad node count) when any
  /// node is singular or has dt/dx of the wrong sign.
  double operator()(std::span<const double> c) const;

  /// Same sum through the scalar reference kernel.
  double reference(std::span<const double> c) const;

  /// |grad_c I| by central differences. Returns the functional value itself
  /// when c is penalized.
  double residual(std::span<const double> c) const;

  std::vector<kernels::NodeSample> samples(std::span<const double> c) const;

  const kernels::NodeTable& table() const { return table_; }
  kernels::LagrangianKind kind() const { return kind_; }
  int coefficient_count() const { return count_; }

 private:
  std::span<const double> y_part(std::span<const double> c) const;
  std::span<const double> z_part(std::span<const double> c) const;

  kernels::LagrangianKind kind_;
  kernels::ModelTerms terms_;
  kernels::NodeTable table_;
  int count_;
  int order_;
  double fd_step_;
};

double functional(const ProblemSpec& spec, std::span<const double> c);
double residual_nu(const ProblemSpec& spec, std::span<const double> c);

struct Costs {
  double time = 0.0;
  double energy = 0.0;
};

/// t_f and E along the curve. Throws SingularIntegrand on infeasible curves.
Costs evaluate_costs(const ProblemSpec& spec, std::span<const double> c);

struct StartRecord {
  int index = 0;
  double residual = 0.0;
  double value = 0.0;
  bool accepted = false;
  int iterations = 0;
};

struct Solution {
  explicit Solution(ProblemSpec s) : spec(std::move(s)) {}

  ProblemSpec spec;
  std::vector<double> coefficients;
  double residual = 0.0;
  double objective_value = 0.0;
  double time = 0.0;
  double energy = 0.0;
  /// Samples on the 2N+1 quadrature nodes.
  std::vector<kernels::NodeSample> profile;
  bool feasible = false;
  int starts_used = 0;
  int starts_accepted = 0;
  int best_start = -1;
  /// True when the accepted candidate came from a descent-first pass.
  bool warm_started = false;
  std::vector<StartRecord> starts;

  Vec3 endpoint_control() const;
  /// -(B + u^)^{-1} b at the endpoint control.
  Vec3 endpoint_fixed_point() const;
};

/// Local Rayleigh-Ritz search from one start: optionally Nelder-Mead on the
/// functional, then Nelder-Mead on nu, restarted while nu stays above
/// tolerance and keeps improving.
MinimizeResult minimize_residual(const Functional& functional, const ProblemSpec& spec,
                                 std::span<const double> start, bool descend_first);

/// Multistart search. With WarmStart::fallback the starts are first run as
/// plain nu searches and rerun with descent only if none converged.
/// Throws NoConvergence when no start yields a feasible
/// curve with nu below tolerance.
Solution solve(const ProblemSpec& spec);

/// Assembles a Solution (costs, profile, diagnostics) for fixed coefficients.
Solution make_solution(const ProblemSpec& spec, std::vector<double> coefficients);

struct SimulationOptions {
  double step = 1e-5;
  /// Give up after this multiple of the predicted elapsed time.
  double time_limit_factor = 5.0;
  /// Keep every n-th step in the returned samples.
  int sample_stride = 10;
};

struct TimeSample {
  double t = 0.0;
  Vec3 q = Vec3::Zero();
  Vec3 u = Vec3::Zero();
  double purity = 0.5;
};

struct SimulationReport {
  std::vector<TimeSample> samples;
  bool reached = false;
  bool stayed_in_chimney = true;
  bool purity_monotone = true;
  double elapsed = 0.0;
  /// Integral of |u|^2 over the simulated time.
  double energy = 0.0;
  Vec3 terminal = Vec3::Zero();
  double terminal_error = 0.0;
  double time_mismatch = 0.0;
  std::string message;

  bool ok(double terminal_tol = 5e-3, double time_tol = 1e-2) const {
    return reached && stayed_in_chimney && terminal_error <= terminal_tol &&
           time_mismatch <= time_tol;
  }
};

/// Integrates the Bloch equation in time under the recovered control,
/// interpolated over x with monotone piecewise cubics and held at its end
/// values outside the curve's x-range, until x reaches xf.
SimulationReport forward_simulate(const ProblemSpec& spec, const Solution& solution,
                                  const SimulationOptions& options = {});

}  // namespace purity
