#pragma once

// Small, self-contained numerical kernels used by the solver: fixed-step
// RK4, RK4-based quadrature, Nelder-Mead, central differences and seeded
// sampling.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace purity {

/// Uniform partition of [x0, xf] into `panels` panels. xf < x0 is allowed.
class Grid {
 public:
  Grid(double x0, double xf, int panels);

  double x0() const { return x0_; }
  double xf() const { return xf_; }
  int panels() const { return panels_; }
  /// Signed panel width.
  double step() const { return (xf_ - x0_) / panels_; }
  double node(int i) const;

  /// The 2N+1 points an RK4 quadrature step visits: panel ends and midpoints.
  std::vector<double> quadrature_nodes() const;
  /// Weights w with sum_j w_j f(nodes_j) equal to quadrature(f, grid).
  std::vector<double> quadrature_weights() const;

 private:
  double x0_;
  double xf_;
  int panels_;
};

struct OptimizerConfig {
  double x_tolerance = 1e-8;
  double f_tolerance = 1e-10;
  /// 0 selects 200 * dimension.
  int max_iterations = 0;
  /// Relative perturbation of each coordinate in the initial simplex.
  double simplex_scale = 0.05;
  /// Absolute perturbation used for coordinates that are exactly zero.
  double zero_step = 0.00025;
};

/// Seeded 64-bit stream. Children derived with split() are independent of
/// each other and of the parent.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Child seed = splitmix64(seed ^ splitmix64(index + 1)).
  RandomSource split(std::uint64_t index) const;

  std::uint64_t next() { return engine_(); }
  /// Uniform on [lo, hi) built from the top 53 bits, identical on every
  /// standard library.
  double uniform(double lo, double hi);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

using State = Eigen::VectorXd;
using VectorField = std::function<State(double, const State&)>;

struct Trajectory {
  std::vector<double> t;
  std::vector<State> y;
};

/// One classic RK4 step of size h.
State rk4_step(const VectorField& rhs, double t, const State& y, double h);

/// Fixed-step RK4 from t0 to tf; the last step is shortened to land on tf.
/// Throws DivergenceError on a non-finite state.
Trajectory rk4_integrate(const VectorField& rhs, double t0, double tf, const State& y0,
                         double step);

/// Integral of f over the grid, computed as RK4 on I' = f(x). Throws
/// SingularIntegrand carrying the offending x when f is not finite.
double quadrature(const std::function<double(double)>& f, const Grid& grid);

using Objective = std::function<double(std::span<const double>)>;

struct MinimizeResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Nelder-Mead simplex search with the fminsearch coefficients and initial
/// simplex. Non-finite values met during the search count as +infinity;
/// a non-finite value at the start point throws ValidationError.
MinimizeResult nelder_mead(const Objective& objective, std::span<const double> start,
                           const OptimizerConfig& config = {});

/// Central differences, component i stepping by h * max(1, |c_i|).
std::vector<double> fd_gradient(const Objective& f, std::span<const double> c, double h);

/// Independent uniform components on [-radius, radius].
std::vector<double> sample_linf_ball(RandomSource& rng, int dim, double radius);

}  // namespace purity
