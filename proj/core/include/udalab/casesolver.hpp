#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "udalab/bounds.hpp"

namespace udalab::casesolver {

/// One analytic case study: domain pair plus the objective weights.
struct CaseConfig {
  domains::MixtureDomainPair pair;
  double lambda;  ///< mismatch weight, > 0
  double eta;     ///< unit-norm penalty weight, > 0

  static CaseConfig case1();
  static CaseConfig case2();
  static CaseConfig case3();
  /// Preset by id in {1,2,3}; throws std::invalid_argument otherwise.
  static CaseConfig preset(int id);
};

struct SimplexConfig {
  int max_iters = 5000;
  double f_tol = 1e-10;
  double x_tol = 1e-8;
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;

  void validate() const;
};

struct SimplexResult {
  std::vector<double> x;
  double fx = 0.0;
  int iterations = 0;
  bool converged = false;  ///< stopped by f_tol/x_tol rather than max_iters
};

/// Derivative-free Nelder-Mead minimization. The initial simplex is x0 plus a
/// +0.05 perturbation of each coordinate. Deterministic given x0. Exhausting
/// max_iters is flagged via converged=false; the best vertex is still
/// returned.
SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          const std::vector<double>& x0, const SimplexConfig& cfg = {});

/// Case objective e_S(h) + lambda D(p~_S, p~_T) + eta (||u||^2 - 1)^2 with
/// squared-loss e_S and squared-L2 density mismatch.
double objective(const domains::LinearUdaModel& model, const CaseConfig& cfg,
                 const measures::QuadratureSpec& spec);

enum class Outcome { success, failure };

struct RestartOutcome {
  domains::Vec2 u;
  double e_T = 0.0;
  Outcome outcome = Outcome::failure;
  double objective = 0.0;
  bool converged = false;
};

struct CaseReport {
  domains::LinearUdaModel best_params;
  double objective = 0.0;
  bounds::BoundReport bound_report;  ///< absolute-loss measures at the optimum
  Outcome outcome = Outcome::failure;
  std::vector<RestartOutcome> restart_outcomes;
};

/// Success means e_T_abs below this threshold.
inline constexpr double kSuccessThreshold = 0.01;

/// Multi-restart minimization of the case objective over (u1, u2, a, b).
/// Restart r draws u0 uniformly on the unit circle, a0 in [-1,1] and b0 in
/// [-0.5,0.5] from the sub-stream (seed, r). Restarts may run in parallel;
/// the best restart is selected by (objective, then restart index). Throws
/// ConvergenceError when no restart converges.
CaseReport run_case(const CaseConfig& cfg, int restarts, std::uint64_t seed,
                    const measures::QuadratureSpec& spec = measures::QuadratureSpec::default_spec(),
                    const SimplexConfig& simplex = {}, int threads = 0);

}  // namespace udalab::casesolver
