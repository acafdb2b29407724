#include "purity/numerics.hpp"

#include "purity/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace purity {

Grid::Grid(double x0, double xf, int panels) : x0_(x0), xf_(xf), panels_(panels) {
  if (!std::isfinite(x0) || !std::isfinite(xf)) throw ValidationError("grid ends must be finite");
  if (x0 == xf) throw ValidationError("grid needs x0 != xf");
  if (panels < 2) throw ValidationError("grid needs at least 2 panels");
}

double Grid::node(int i) const {
  if (i == panels_) return xf_;
  return x0_ + i * step();
}

std::vector<double> Grid::quadrature_nodes() const {
  std::vector<double> nodes(2 * static_cast<std::size_t>(panels_) + 1);
  const double h = step();
  for (int i = 0; i < panels_; ++i) {
    nodes[2 * i] = node(i);
    nodes[2 * i + 1] = node(i) + 0.5 * h;
  }
  nodes.back() = xf_;
  return nodes;
}

std::vector<double> Grid::quadrature_weights() const {
  // RK4 on I' = f(x): h/6 (f(x) + 2 f(x+h/2) + 2 f(x+h/2) + f(x+h)).
  const double h = step();
  std::vector<double> w(2 * static_cast<std::size_t>(panels_) + 1, 0.0);
  for (int i = 0; i < panels_; ++i) {
    w[2 * i] += h / 6.0;
    w[2 * i + 1] += 4.0 * h / 6.0;
    w[2 * i + 2] += h / 6.0;
  }
  return w;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RandomSource RandomSource::split(std::uint64_t index) const {
  return RandomSource(splitmix64(seed_ ^ splitmix64(index + 1)));
}

double RandomSource::uniform(double lo, double hi) {
  const double unit = static_cast<double>(next() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

State rk4_step(const VectorField& rhs, double t, const State& y, double h) {
  const State k1 = rhs(t, y);
  const State k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1);
  const State k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2);
  const State k4 = rhs(t + h, y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Trajectory rk4_integrate(const VectorField& rhs, double t0, double tf, const State& y0,
                         double step) {
  if (!(step > 0.0)) throw ValidationError("rk4 step must be positive");
  if (!(tf > t0)) throw ValidationError("rk4 requires tf > t0");
  Trajectory out;
  out.t.push_back(t0);
  out.y.push_back(y0);
  double t = t0;
  State y = y0;
  // Step count fixed up front so that accumulated rounding cannot add a
  // sliver step at the end.
  const auto full = static_cast<long long>(std::floor((tf - t0) / step * (1.0 + 1e-12)));
  for (long long i = 0; i <= full; ++i) {
    double h = step;
    if (i == full) {
      h = tf - t;
      if (h <= step * 1e-12) break;
    }
    y = rk4_step(rhs, t, y, h);
    t = (i == full) ? tf : t0 + static_cast<double>(i + 1) * step;
    if (!y.allFinite()) throw DivergenceError("rk4: non-finite state", t);
    out.t.push_back(t);
    out.y.push_back(y);
  }
  out.t.back() = tf;
  return out;
}

double quadrature(const std::function<double(double)>& f, const Grid& grid) {
  const double h = grid.step();
  auto eval = [&](double x) {
    const double v = f(x);
    if (!std::isfinite(v)) throw SingularIntegrand("non-finite integrand", x);
    return v;
  };
  double total = 0.0;
  double left = eval(grid.x0());
  for (int i = 0; i < grid.panels(); ++i) {
    const double x = grid.node(i);
    const double mid = eval(x + 0.5 * h);
    const double right = eval(grid.node(i + 1));
    total += (h / 6.0) * (left + 2.0 * mid + 2.0 * mid + right);
    left = right;
  }
  return total;
}

MinimizeResult nelder_mead(const Objective& objective, std::span<const double> start,
                           const OptimizerConfig& config) {
  const std::size_t n = start.size();
  if (n == 0) throw ValidationError("nelder_mead needs at least one variable");
  if (!(config.x_tolerance > 0.0) || !(config.f_tolerance > 0.0)) {
    throw ValidationError("optimizer tolerances must be positive");
  }
  const int max_iter =
      config.max_iterations > 0 ? config.max_iterations : 200 * static_cast<int>(n);

  MinimizeResult result;
  auto eval = [&](const std::vector<double>& x) {
    ++result.evaluations;
    const double v = objective(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<std::vector<double>> simplex(n + 1, std::vector<double>(start.begin(), start.end()));
  std::vector<double> values(n + 1);
  {
    ++result.evaluations;
    values[0] = objective(simplex[0]);
    if (!std::isfinite(values[0])) {
      throw ValidationError("objective is not finite at the start point");
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    double& c = simplex[j + 1][j];
    c = (c != 0.0) ? (1.0 + config.simplex_scale) * c : config.zero_step;
    values[j + 1] = eval(simplex[j + 1]);
  }

  std::vector<std::size_t> order(n + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<std::vector<double>> s2(n + 1);
    std::vector<double> v2(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
      s2[k] = std::move(simplex[order[k]]);
      v2[k] = values[order[k]];
    }
    simplex = std::move(s2);
    values = std::move(v2);
  };
  sort_simplex();

  std::vector<double> centroid(n), trial(n);
  auto affine = [&](double along, std::vector<double>& out) {
    // centroid + along * (centroid - worst)
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = centroid[i] + along * (centroid[i] - simplex[n][i]);
    }
  };

  int iter = 0;
  while (true) {
    double fspread = 0.0;
    double xspread = 0.0;
    for (std::size_t j = 1; j <= n; ++j) {
      fspread = std::max(fspread, std::abs(values[j] - values[0]));
      for (std::size_t i = 0; i < n; ++i) {
        xspread = std::max(xspread, std::abs(simplex[j][i] - simplex[0][i]));
      }
    }
    if (fspread <= config.f_tolerance && xspread <= config.x_tolerance) {
      result.converged = true;
      break;
    }
    if (iter >= max_iter) break;
    ++iter;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[j][i];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    std::vector<double> reflected(n);
    affine(1.0, reflected);
    const double fr = eval(reflected);
    bool shrink = false;
    if (fr < values[0]) {
      affine(2.0, trial);
      const double fe = eval(trial);
      if (fe < fr) {
        simplex[n] = trial;
        values[n] = fe;
      } else {
        simplex[n] = reflected;
        values[n] = fr;
      }
    } else if (fr < values[n - 1]) {
      simplex[n] = reflected;
      values[n] = fr;
    } else if (fr < values[n]) {
      affine(0.5, trial);
      const double fc = eval(trial);
      if (fc <= fr) {
        simplex[n] = trial;
        values[n] = fc;
      } else {
        shrink = true;
      }
    } else {
      affine(-0.5, trial);
      const double fcc = eval(trial);
      if (fcc < values[n]) {
        simplex[n] = trial;
        values[n] = fcc;
      } else {
        shrink = true;
      }
    }
    if (shrink) {
      for (std::size_t j = 1; j <= n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
          simplex[j][i] = simplex[0][i] + 0.5 * (simplex[j][i] - simplex[0][i]);
        }
        values[j] = eval(simplex[j]);
      }
    }
    sort_simplex();
  }

  result.x = simplex[0];
  result.value = values[0];
  result.iterations = iter;
  return result;
}

std::vector<double> fd_gradient(const Objective& f, std::span<const double> c, double h) {
  if (!(h > 0.0)) throw ValidationError("finite-difference step must be positive");
  std::vector<double> point(c.begin(), c.end());
  std::vector<double> grad(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double hi = h * std::max(1.0, std::abs(c[i]));
    point[i] = c[i] + hi;
    const double up = f(point);
    point[i] = c[i] - hi;
    const double down = f(point);
    point[i] = c[i];
    grad[i] = (up - down) / (2.0 * hi);
  }
  return grad;
}

std::vector<double> sample_linf_ball(RandomSource& rng, int dim, double radius) {
  if (!(radius > 0.0)) throw ValidationError("sampling radius must be positive");
  if (dim < 0) throw ValidationError("sampling dimension must be non-negative");
  std::vector<double> out(static_cast<std::size_t>(dim));
  for (double& v : out) v = rng.uniform(-radius, radius);
  return out;
}

}  // namespace purity
