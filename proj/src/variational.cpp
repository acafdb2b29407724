#include "purity/variational.hpp"

#include "purity/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace purity {

namespace {

using kernels::LagrangianKind;

kernels::LagrangianKind kind_for(int dimension, CostKind cost) {
  if (dimension == 2) {
    return cost == CostKind::time ? LagrangianKind::time2d : LagrangianKind::energy2d;
  }
  return cost == CostKind::time ? LagrangianKind::time3d : LagrangianKind::energy3d;
}

kernels::ModelTerms make_terms(const DissipationModel& model, int zeroed_control,
                               double orientation) {
  kernels::ModelTerms t;
  for (int i = 0; i < 3; ++i) {
    t.b[i] = model.b()(i);
    for (int j = 0; j < 3; ++j) t.bm[3 * i + j] = model.b_matrix()(i, j);
  }
  t.zeroed = zeroed_control - 1;
  t.orientation = orientation;
  return t;
}

kernels::NodeTable make_table(const ProblemSpec& spec) {
  const Grid grid = spec.grid();
  kernels::NodeTable t;
  t.x = grid.quadrature_nodes();
  t.weight = grid.quadrature_weights();
  t.count = static_cast<int>(t.x.size());
  t.order = spec.order;
  const Vec3& q0 = spec.bounds.q0;
  const Vec3& qf = spec.bounds.qf;
  const double x0 = q0.x();
  const double xf = qf.x();
  t.y_line.resize(t.x.size());
  t.z_line.resize(t.x.size());
  for (int j = 0; j < t.count; ++j) {
    t.y_line[j] = basis_eval(0, t.x[j], x0, xf, q0.y(), qf.y()).first;
    t.z_line[j] = basis_eval(0, t.x[j], x0, xf, q0.z(), qf.z()).first;
  }
  t.y_slope = basis_eval(0, x0, x0, xf, q0.y(), qf.y()).second;
  t.z_slope = basis_eval(0, x0, x0, xf, q0.z(), qf.z()).second;
  t.basis.resize(static_cast<std::size_t>(t.order) * t.count);
  t.dbasis.resize(t.basis.size());
  for (int i = 0; i < t.order; ++i) {
    for (int j = 0; j < t.count; ++j) {
      const auto [v, dv] = basis_eval(i + 1, t.x[j], x0, xf, 0.0, 0.0);
      t.basis[static_cast<std::size_t>(i) * t.count + j] = v;
      t.dbasis[static_cast<std::size_t>(i) * t.count + j] = dv;
    }
  }
  return t;
}

// Fritsch-Carlson monotone cubic interpolation on strictly increasing
// abscissae; constant extrapolation at both ends.
class MonotoneCubic {
 public:
  MonotoneCubic(std::vector<double> xs, std::vector<double> ys)
      : x_(std::move(xs)), y_(std::move(ys)), d_(x_.size(), 0.0) {
    const std::size_t n = x_.size();
    if (n < 2) return;
    std::vector<double> slope(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      slope[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
    }
    d_[0] = slope[0];
    d_[n - 1] = slope[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (slope[i - 1] * slope[i] <= 0.0) {
        d_[i] = 0.0;
      } else {
        const double h0 = x_[i] - x_[i - 1];
        const double h1 = x_[i + 1] - x_[i];
        const double w1 = 2.0 * h1 + h0;
        const double w2 = h1 + 2.0 * h0;
        d_[i] = (w1 + w2) / (w1 / slope[i - 1] + w2 / slope[i]);
      }
    }
  }

  double operator()(double x) const {
    if (x <= x_.front()) return y_.front();
    if (x >= x_.back()) return y_.back();
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * h * d_[i] +
           (-2 * t3 + 3 * t2) * y_[i + 1] + (t3 - t2) * h * d_[i + 1];
  }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> d_;
};

}  // namespace

std::string_view to_string(CostKind kind) { return kind == CostKind::time ? "time" : "energy"; }

std::string_view to_string(WarmStart mode) {
  switch (mode) {
    case WarmStart::never:
      return "never";
    case WarmStart::always:
      return "always";
    case WarmStart::fallback:
      break;
  }
  return "fallback";
}

void validate(const ProblemSpec& spec) {
  if (spec.dimension != 2 && spec.dimension != 3) {
    throw ValidationError("dimension: must be 2 or 3");
  }
  if (spec.model.dimension() != spec.dimension) {
    throw ValidationError("dimension: does not match the model (" +
                          std::to_string(spec.model.dimension()) + "D)");
  }
  spec.model.require_negative_definite();
  if (spec.zeroed_control < 1 || spec.zeroed_control > 3) {
    throw ValidationError("zeroed_control: must be 1, 2 or 3");
  }
  if (spec.order < 1) throw ValidationError("order: must be at least 1");
  if (spec.panels < 2) throw ValidationError("panels: must be at least 2");
  if (spec.multistart < 1) throw ValidationError("multistart: must be at least 1");
  if (!(spec.start_radius > 0.0)) throw ValidationError("start_radius: must be positive");
  if (!(spec.residual_tolerance > 0.0)) {
    throw ValidationError("residual_tolerance: must be positive");
  }
  if (!(spec.fd_step > 0.0)) throw ValidationError("fd_step: must be positive");
  if (spec.max_restarts < 0) throw ValidationError("max_restarts: must be non-negative");
  if (!(std::abs(spec.bounds.qf.x() - spec.bounds.q0.x()) >= 1e-6)) {
    throw ValidationError(
        "bounds: start and end share their x-coordinate (|xf - x0| < 1e-6), so x cannot "
        "parameterize the trajectory");
  }
}

ProblemSpec make_problem(const DissipationModel& model, CostKind objective, int order,
                         double epsilon, double delta) {
  const ChimneyGeometry geom = find_apogee(model);
  ProblemSpec spec(model, boundary_conditions(geom, epsilon, delta));
  spec.dimension = model.dimension();
  spec.objective = objective;
  spec.order = order;
  spec.multistart = model.dimension() == 2 ? 25 : 50;
  return spec;
}

std::pair<double, double> basis_eval(int i, double x, double x0, double xf, double y0,
                                     double yf) {
  if (i == 0) {
    const double t = (x - x0) / (xf - x0);
    return {std::lerp(y0, yf, t), (yf - y0) / (xf - x0)};
  }
  const double a = x - x0;
  const double b = x - xf;
  const double b_pow = std::pow(b, i - 1);
  return {a * b_pow * b, b_pow * b + i * a * b_pow};
}

BasisCurve::BasisCurve(std::vector<double> coefficients, int dimension, const Vec3& start,
                       const Vec3& end)
    : c_(std::move(coefficients)), dim_(dimension), start_(start), end_(end) {
  if (dim_ != 2 && dim_ != 3) throw ValidationError("curve dimension must be 2 or 3");
  const std::size_t per = dim_ == 3 ? 2 : 1;
  if (c_.size() % per != 0) throw ValidationError("3D curves need an even coefficient count");
  order_ = static_cast<int>(c_.size() / per);
}

CurvePoint BasisCurve::eval(double x) const {
  const double x0 = start_.x();
  const double xf = end_.x();
  CurvePoint p;
  std::tie(p.y, p.yp) = basis_eval(0, x, x0, xf, start_.y(), end_.y());
  if (dim_ == 3) std::tie(p.z, p.zp) = basis_eval(0, x, x0, xf, start_.z(), end_.z());
  for (int i = 0; i < order_; ++i) {
    const auto [v, dv] = basis_eval(i + 1, x, x0, xf, 0.0, 0.0);
    p.y += c_[i] * v;
    p.yp += c_[i] * dv;
    if (dim_ == 3) {
      p.z += c_[order_ + i] * v;
      p.zp += c_[order_ + i] * dv;
    }
  }
  return p;
}

double lagrangian_time(const Vec3& q, const Vec3& qp, const DissipationModel& model) {
  const double f = purity_derivative(q, model);
  if (!(std::abs(f) >= kernels::kSingular)) {
    throw SingularIntegrand("purity derivative vanishes", q.x());
  }
  return q.dot(qp) / f;
}

double control_from_slope_2d(const Vec3& q, double yp, const DissipationModel& model) {
  const Vec3 d = model.drift(q);
  const double radial = q.x() + q.y() * yp;
  if (!(std::abs(radial) >= kernels::kSingular)) {
    throw SingularIntegrand("x + y y' vanishes", q.x());
  }
  return (yp * d.x() - d.y()) / radial;
}

double lagrangian_energy_2d(const Vec3& q, const Vec3& qp, const DissipationModel& model) {
  const double u = control_from_slope_2d(q, qp.y(), model);
  return u * u * lagrangian_time(q, qp, model);
}

Vec3 controls_from_slope_3d(const Vec3& q, double yp, double zp, const DissipationModel& model,
                            int zeroed_control) {
  if (zeroed_control < 1 || zeroed_control > 3) {
    throw ValidationError("zeroed_control must be 1, 2 or 3");
  }
  const Vec3 v(1.0, yp, zp);
  const Vec3 d = model.drift(q);
  const double f = q.dot(d);
  const double radial = q.dot(v);
  const int k = zeroed_control - 1;
  const double den = q(k) * radial;
  if (!(std::abs(den) >= kernels::kSingular)) {
    throw SingularIntegrand("control denominator q_k (q . q') vanishes", q.x());
  }
  // u x q must equal w = (f / radial) v - d; with u_k = 0 that fixes
  // u = e_k x (radial w) / (q_k radial).
  const Vec3 n = f * v - radial * d;
  return Vec3::Unit(k).cross(n) / den;
}

double lagrangian_energy_3d(const Vec3& q, const Vec3& qp, const DissipationModel& model,
                            int zeroed_control) {
  const Vec3 u = controls_from_slope_3d(q, qp.y(), qp.z(), model, zeroed_control);
  return u.squaredNorm() * lagrangian_time(q, qp, model);
}

Functional::Functional(const ProblemSpec& spec) : Functional(spec, spec.objective) {}

Functional::Functional(const ProblemSpec& spec, CostKind cost)
    : kind_(kind_for(spec.dimension, cost)),
      terms_(make_terms(spec.model, spec.zeroed_control,
                        spec.bounds.qf.x() >= spec.bounds.q0.x() ? 1.0 : -1.0)),
      table_(make_table(spec)),
      count_(spec.coefficient_count()),
      order_(spec.order),
      fd_step_(spec.fd_step) {}

std::span<const double> Functional::y_part(std::span<const double> c) const {
  return c.subspan(0, static_cast<std::size_t>(order_));
}

std::span<const double> Functional::z_part(std::span<const double> c) const {
  if (count_ == order_) return {};
  return c.subspan(static_cast<std::size_t>(order_), static_cast<std::size_t>(order_));
}

double Functional::operator()(std::span<const double> c) const {
  const kernels::KernelResult r = kernels::accumulate(kind_, terms_, table_, y_part(c), z_part(c));
  return r.bad > 0 ? kPenalty + r.bad : r.sum;
}

double Functional::reference(std::span<const double> c) const {
  const kernels::KernelResult r =
      kernels::accumulate_scalar(kind_, terms_, table_, y_part(c), z_part(c));
  return r.bad > 0 ? kPenalty + r.bad : r.sum;
}

double Functional::residual(std::span<const double> c) const {
  const double value = (*this)(c);
  if (value >= kPenalty) return value;
  const std::vector<double> grad =
      fd_gradient([this](std::span<const double> p) { return (*this)(p); }, c, fd_step_);
  double sq = 0.0;
  for (double g : grad) sq += g * g;
  return std::sqrt(sq);
}

std::vector<kernels::NodeSample> Functional::samples(std::span<const double> c) const {
  return kernels::sample_nodes(kind_, terms_, table_, y_part(c), z_part(c));
}

double functional(const ProblemSpec& spec, std::span<const double> c) {
  return Functional(spec)(c);
}

double residual_nu(const ProblemSpec& spec, std::span<const double> c) {
  return Functional(spec).residual(c);
}

Costs evaluate_costs(const ProblemSpec& spec, std::span<const double> c) {
  Costs out;
  for (CostKind kind : {CostKind::time, CostKind::energy}) {
    const Functional f(spec, kind);
    const double value = f(c);
    if (value >= kPenalty) {
      for (const auto& s : f.samples(c)) {
        if (s.bad) throw SingularIntegrand("infeasible curve: singular or retrograde node", s.x);
      }
    }
    (kind == CostKind::time ? out.time : out.energy) = value;
  }
  return out;
}

Vec3 Solution::endpoint_control() const {
  if (profile.empty()) return Vec3::Zero();
  const auto& u = profile.back().u;
  return Vec3(u[0], u[1], u[2]);
}

Vec3 Solution::endpoint_fixed_point() const {
  return fixed_point(spec.model, endpoint_control());
}

namespace {
constexpr int kDescentRestarts = 20;
}  // namespace

MinimizeResult minimize_residual(const Functional& functional, const ProblemSpec& spec,
                                 std::span<const double> start, bool descend_first) {
  std::vector<double> origin(start.begin(), start.end());
  int spent_iterations = 0;
  int spent_evaluations = 0;
  if (descend_first) {
    // Any local minimum of I is a root of nu, and I is far better scaled for
    // the simplex than nu is when the high-order coefficients run large.
    const Objective value = [&functional](std::span<const double> c) { return functional(c); };
    MinimizeResult d = nelder_mead(value, origin, spec.optimizer);
    for (int r = 0; r < kDescentRestarts; ++r) {
      MinimizeResult next = nelder_mead(value, d.x, spec.optimizer);
      const bool improved = next.value < d.value - 1e-12 * std::abs(d.value);
      next.iterations += d.iterations;
      next.evaluations += d.evaluations;
      d = std::move(next);
      if (!improved) break;
    }
    spent_iterations = d.iterations;
    spent_evaluations = d.evaluations;
    origin = std::move(d.x);
  }
  const Objective nu = [&functional](std::span<const double> c) { return functional.residual(c); };
  MinimizeResult best = nelder_mead(nu, origin, spec.optimizer);
  best.iterations += spent_iterations;
  best.evaluations += spent_evaluations;
  for (int r = 0; r < spec.max_restarts && best.value >= spec.residual_tolerance; ++r) {
    MinimizeResult next = nelder_mead(nu, best.x, spec.optimizer);
    const bool improved = next.value < best.value * (1.0 - 1e-3);
    next.iterations += best.iterations;
    next.evaluations += best.evaluations;
    if (next.value <= best.value) best = std::move(next);
    if (!improved) break;
  }
  return best;
}

Solution make_solution(const ProblemSpec& spec, std::vector<double> coefficients) {
  const Functional objective(spec);
  Solution s(spec);
  s.objective_value = objective(coefficients);
  s.residual = objective.residual(coefficients);
  s.profile = objective.samples(coefficients);
  const bool feasible_nodes =
      std::none_of(s.profile.begin(), s.profile.end(), [](const auto& n) { return n.bad; });
  if (feasible_nodes) {
    const Costs costs = evaluate_costs(spec, coefficients);
    s.time = costs.time;
    s.energy = costs.energy;
  } else {
    s.time = s.energy = std::numeric_limits<double>::quiet_NaN();
  }
  s.feasible = feasible_nodes && s.residual < spec.residual_tolerance;
  s.coefficients = std::move(coefficients);
  return s;
}

Solution solve(const ProblemSpec& spec) {
  validate(spec);
  const Functional objective(spec);
  const int count = spec.coefficient_count();
  const RandomSource master(spec.seed);

  struct Outcome {
    MinimizeResult local;
    double value = 0.0;
  };
  std::vector<Outcome> outcomes(static_cast<std::size_t>(spec.multistart));

  auto run_pass = [&](bool descend_first) {
    auto run_start = [&](int k) {
      RandomSource rng = master.split(static_cast<std::uint64_t>(k));
      const std::vector<double> c0 = sample_linf_ball(rng, count, spec.start_radius);
      Outcome o;
      o.local = minimize_residual(objective, spec, c0, descend_first);
      o.value = objective(o.local.x);
      outcomes[static_cast<std::size_t>(k)] = std::move(o);
    };
    // Starts are independent; the reduction below runs in start order, so
    // the result does not depend on the thread count.
    const unsigned threads =
        std::max(1u, std::min(std::thread::hardware_concurrency(),
                              static_cast<unsigned>(spec.multistart)));
    if (threads == 1) {
      for (int k = 0; k < spec.multistart; ++k) run_start(k);
      return;
    }
    std::atomic<int> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (int k = next++; k < spec.multistart; k = next++) run_start(k);
      });
    }
  };

  std::vector<StartRecord> records;
  int best = -1;
  auto reduce = [&] {
    records.clear();
    best = -1;
    for (int k = 0; k < spec.multistart; ++k) {
      const Outcome& o = outcomes[static_cast<std::size_t>(k)];
      StartRecord rec{k, o.local.value, o.value,
                      o.value < kPenalty && o.local.value < spec.residual_tolerance,
                      o.local.iterations};
      records.push_back(rec);
      if (rec.accepted &&
          (best < 0 || o.value < outcomes[static_cast<std::size_t>(best)].value)) {
        best = k;
      }
    }
  };

  bool warm = spec.warm_start == WarmStart::always;
  run_pass(warm);
  reduce();
  if (best < 0 && spec.warm_start == WarmStart::fallback) {
    warm = true;
    run_pass(true);
    reduce();
  }

  if (best < 0) {
    double best_nu = std::numeric_limits<double>::infinity();
    double best_value = std::numeric_limits<double>::infinity();
    for (const auto& r : records) {
      if (r.residual < best_nu) {
        best_nu = r.residual;
        best_value = r.value;
      }
    }
    throw NoConvergence("no start reached a feasible curve with nu below tolerance", best_nu,
                        best_value);
  }

  Solution sol = make_solution(spec, outcomes[static_cast<std::size_t>(best)].local.x);
  sol.starts_used = spec.multistart;
  sol.starts_accepted = static_cast<int>(
      std::count_if(records.begin(), records.end(), [](const auto& r) { return r.accepted; }));
  sol.best_start = best;
  sol.warm_started = warm;
  sol.starts = std::move(records);
  return sol;
}

SimulationReport forward_simulate(const ProblemSpec& spec, const Solution& solution,
                                  const SimulationOptions& options) {
  SimulationReport report;
  const Vec3& q0 = spec.bounds.q0;
  const Vec3& qf = spec.bounds.qf;
  if ((qf - q0).norm() == 0.0) {
    report.reached = true;
    report.terminal = q0;
    report.message = "zero-length problem";
    return report;
  }
  if (solution.profile.empty()) {
    report.message = "solution has no control profile";
    return report;
  }
  if (!(options.step > 0.0)) throw ValidationError("simulation step must be positive");

  const double orientation = qf.x() >= q0.x() ? 1.0 : -1.0;
  std::vector<double> xs;
  std::array<std::vector<double>, 3> us;
  for (const auto& n : solution.profile) {
    xs.push_back(n.x);
    for (int i = 0; i < 3; ++i) us[i].push_back(n.u[i]);
  }
  if (orientation < 0) {
    std::reverse(xs.begin(), xs.end());
    for (auto& u : us) std::reverse(u.begin(), u.end());
  }
  for (const auto& u : us) {
    if (std::any_of(u.begin(), u.end(), [](double v) { return !std::isfinite(v); })) {
      report.message = "control profile contains non-finite values";
      return report;
    }
  }
  const std::array<MonotoneCubic, 3> control{MonotoneCubic(xs, us[0]), MonotoneCubic(xs, us[1]),
                                             MonotoneCubic(xs, us[2])};
  auto control_at = [&](double x) { return Vec3(control[0](x), control[1](x), control[2](x)); };

  // The fourth component accumulates |u|^2 so the energy is re-measured too.
  const VectorField rhs = [&](double, const State& y) -> State {
    const Vec3 q = y.head<3>();
    const Vec3 u = control_at(q.x());
    State d(4);
    d.head<3>() = bloch_rhs(q, u, spec.model);
    d(3) = u.squaredNorm();
    return d;
  };

  const double limit = options.time_limit_factor * std::max(solution.time, 0.0) + 1.0;
  State y(4);
  y << q0, 0.0;
  double t = 0.0;
  auto record = [&](double time, const Vec3& q) {
    report.samples.push_back({time, q, control_at(q.x()), 0.5 * (1.0 + q.squaredNorm())});
  };
  record(t, q0);
  long step_index = 0;
  while (t < limit) {
    const State next = rk4_step(rhs, t, y, options.step);
    if (!next.allFinite()) throw DivergenceError("simulation diverged", t);
    const Vec3 qn = next.head<3>();
    if (purity_derivative(qn, spec.model) < -1e-9) report.stayed_in_chimney = false;
    if (qn.norm() < y.head<3>().norm() - 1e-12) report.purity_monotone = false;
    if (orientation * (qn.x() - qf.x()) >= 0.0) {
      const double theta = (qf.x() - y(0)) / (qn.x() - y(0));
      const Vec3 q_cross = y.head<3>() + theta * (qn - y.head<3>());
      report.elapsed = t + theta * options.step;
      report.energy = y(3) + theta * (next(3) - y(3));
      report.terminal = q_cross;
      report.reached = true;
      record(report.elapsed, q_cross);
      break;
    }
    y = next;
    t += options.step;
    if (++step_index % std::max(1, options.sample_stride) == 0) record(t, qn);
  }

  if (!report.reached) {
    report.terminal = y.head<3>();
    report.elapsed = t;
    report.energy = y(3);
    report.message = "x never reached the end coordinate within the time limit";
  } else if (!report.stayed_in_chimney) {
    report.message = "trajectory left the escape chimney";
  }
  report.terminal_error = (report.terminal - qf).norm();
  report.time_mismatch = solution.time > 0.0
                             ? std::abs(report.elapsed - solution.time) / solution.time
                             : std::numeric_limits<double>::infinity();
  return report;
}

}  // namespace purity
