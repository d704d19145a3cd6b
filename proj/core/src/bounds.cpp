#include "udalab/bounds.hpp"

#include <algorithm>
#include <cmath>

namespace udalab::bounds {

double lower_bound(const measures::MeasureSet& m) {
  return std::max(m.mismatch_S, m.mismatch_T) - m.e_S_abs - m.tv;
}

double upper_bound(const measures::MeasureSet& m) {
  return std::min(m.mismatch_S, m.mismatch_T) + m.e_S_abs + m.tv;
}

// Pinsker in this project's unhalved convention: D_1 = int |p - p'| is twice
// the statistics total variation, so D_1 <= sqrt(2 KL).
double pinsker_lower_bound(const measures::MeasureSet& m) {
  return std::max(m.mismatch_S, m.mismatch_T) - m.e_S_abs -
         std::sqrt(2.0 * std::max(m.kl, 0.0));
}

bool sandwich_check(const measures::MeasureSet& m) {
  const double slack = m.e_S_abs + m.tv + kBoundTol;
  return std::abs(m.e_T_abs - m.mismatch_S) <= slack &&
         std::abs(m.e_T_abs - m.mismatch_T) <= slack;
}

BoundReport evaluate(const domains::MixtureDomainPair& pair, const domains::LinearUdaModel& model,
                     const measures::QuadratureSpec& spec) {
  BoundReport r;
  r.measures = measures::compute_measures(pair, model, spec);
  r.lower_bound = lower_bound(r.measures);
  r.upper_bound = upper_bound(r.measures);
  r.pinsker_lower_bound = pinsker_lower_bound(r.measures);
  r.sandwich_ok = sandwich_check(r.measures);
  r.lb_le_eT = r.lower_bound <= r.measures.e_T_abs + kBoundTol;
  r.eT_le_ub = r.measures.e_T_abs <= r.upper_bound + kBoundTol;
  return r;
}

}  // namespace udalab::bounds
