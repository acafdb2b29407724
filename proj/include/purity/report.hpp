#pragma once

// Documents and CSV files emitted by the command-line tool.
//
// CSV columns are fixed:
//   trajectory  x,y[,z],yp[,zp],u1,u2,u3,dtdx,f     one row per quadrature node
//   controls    x,u1,u2,u3                           same nodes
//   timeseries  t,x,y[,z],u1,u2,u3,purity            forward simulation samples
// Numbers are printed with 17 significant digits so that identical runs
// give byte-identical files.

#include "purity/chimney.hpp"
#include "purity/config.hpp"
#include "purity/variational.hpp"

#include <iosfwd>
#include <span>
#include <string>

namespace purity {

/// Shortest round-trip text for a double ("%.17g").
std::string format_real(double x);

Json vector_json(const Vec3& v, int dimension);

Json apogee_document(const RunConfig& config, const ChimneyGeometry& geom,
                     const BoundaryConditions& bounds);

/// Solution document with the resolved config, coefficients, nu, t_f, E,
/// endpoint controls and the fixed point -(B + u^)^{-1} b at those controls.
Json solution_document(const RunConfig& config, const Solution& solution);

Json simulation_document(const SimulationReport& report);

void write_trajectory_csv(std::ostream& out, const Solution& solution);
void write_controls_csv(std::ostream& out, const Solution& solution);
void write_timeseries_csv(std::ostream& out, const SimulationReport& report, int dimension);

/// Reads the coefficients and config back from a solution document and
/// rebuilds the Solution on the config's grid.
Solution solution_from_document(const Json& document, RunConfig* config = nullptr);

/// One row of the reference results table for a model: order M and the
/// (time, energy) pair reported for both objectives.
struct ReferenceRow {
  int table = 0;
  int order = 0;
  double time_objective_time = 0.0;
  double time_objective_energy = 0.0;
  double energy_objective_time = 0.0;
  double energy_objective_energy = 0.0;
};

/// Reference table 1 (2D model a = (-3, -4), b = (1, 2)) or 2 (3D model
/// B = diag(-7, -6, -5), b = (1, 2, 3)). Read-only.
std::span<const ReferenceRow> reference_rows(int table);

/// Model document for reference table 1 or 2.
Json reference_model(int table);

/// Reference apogees, 3D end controls and their fixed point.
inline constexpr double kReferenceApogee2d[2] = {0.4079, 0.4493};
inline constexpr double kReferenceApogee3d[3] = {0.1140, 0.2954, 0.6287};
inline constexpr double kReferenceEndControls3d[3] = {0.0, 1.265, 2.007};
inline constexpr double kReferenceFixedPoint3d[3] = {0.1364, 0.3789, 0.5655};

}  // namespace purity
