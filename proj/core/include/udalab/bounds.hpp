#pragma once

#include "udalab/measures.hpp"

namespace udalab::bounds {

/// Tolerance absorbing quadrature error in all inequality checks.
inline constexpr double kBoundTol = 1e-4;

struct BoundReport {
  measures::MeasureSet measures;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  double pinsker_lower_bound = 0.0;
  bool sandwich_ok = false;
  bool lb_le_eT = false;
  bool eT_le_ub = false;
};

/// e_T(h) >= max{mismatch_S, mismatch_T} - e_S(h) - D_1. Not clamped; a
/// negative value means the bound is vacuous.
double lower_bound(const measures::MeasureSet& m);

/// e_T(h) <= min{mismatch_S, mismatch_T} + e_S(h) + D_1.
double upper_bound(const measures::MeasureSet& m);

/// Lower bound with D_1 replaced by its Pinsker majorant sqrt(2 KL)
/// (D_1 here is the unhalved integral, range [0,2]).
double pinsker_lower_bound(const measures::MeasureSet& m);

/// |e_T - mismatch_S| <= e_S + D_1 and |e_T - mismatch_T| <= e_S + D_1,
/// both within kBoundTol.
bool sandwich_check(const measures::MeasureSet& m);

/// Computes the measures and assembles the full report with verdicts.
BoundReport evaluate(const domains::MixtureDomainPair& pair, const domains::LinearUdaModel& model,
                     const measures::QuadratureSpec& spec);

}  // namespace udalab::bounds
