#pragma once

// Self-checks run by `purity_ctl validate` against a configured model:
// the Bloch/master-equation correspondence, purity identities, dissipation
// invariants, chimney geometry and the pointwise Lagrangian algebra.

#include "purity/config.hpp"

#include <string>
#include <vector>

namespace purity {

struct CheckResult {
  std::string name;
  bool passed = false;
  double max_error = 0.0;
  double tolerance = 0.0;
  std::string note;
};

/// `cases` random samples per check, drawn from RandomSource(seed).
std::vector<CheckResult> run_validation(const RunConfig& config, int cases, std::uint64_t seed);

/// Random traceless 2x2 complex matrix with entries in [-1, 1] + i[-1, 1].
LindbladOperator random_lindblad_operator(RandomSource& rng);

/// Uniform point of the closed unit ball (rejection sampling).
Vec3 random_ball_point(RandomSource& rng, double radius = 1.0);

}  // namespace purity
