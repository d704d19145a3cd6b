#pragma once

#include <cmath>
#include <utility>

#include "udalab/domains.hpp"
#include "udalab/errors.hpp"

namespace udalab::measures {

enum class Rule { trapezoid, simpson };

struct QuadratureSpec {
  double lo;
  double hi;
  int nodes;
  Rule rule;

  /// [-12, 12], 4001 nodes, Simpson. Covers 6 sigma beyond the case-study
  /// means with headroom; adequacy is certified by the grid-refinement test.
  static QuadratureSpec default_spec() { return {-12.0, 12.0, 4001, Rule::simpson}; }

  void validate() const;
  double step() const { return (hi - lo) / (nodes - 1); }
};

/// All scalar quantities entering the bounds for one (domain pair, model,
/// projection) configuration. e_S_sq is the squared loss used by the case
/// objective; the bound evaluators consume the absolute-loss fields only.
struct MeasureSet {
  double e_S_sq = 0.0;      ///< squared source loss
  double e_S_abs = 0.0;     ///< absolute source loss, in [0,1]
  double e_T_abs = 0.0;     ///< absolute target loss, in [0,1]
  double mismatch_S = 0.0;  ///< e_S(f~_S, f~_T), source-weighted, in [0,1]
  double mismatch_T = 0.0;  ///< e_T(f~_S, f~_T), target-weighted, in [0,1]
  double tv = 0.0;          ///< D_1 = int |p~_S - p~_T|, in [0,2]
  double mismatch_sq = 0.0; ///< int (p~_S - p~_T)^2
  double kl = 0.0;          ///< D_KL(p~_S || p~_T), >= 0
};

/// Composite quadrature of f over the spec grid. Throws NumericFailure if f
/// produces NaN/Inf at any node.
template <typename F>
double integrate(F&& f, const QuadratureSpec& spec) {
  spec.validate();
  const double h = spec.step();
  double acc = 0.0;
  if (spec.rule == Rule::trapezoid) {
    for (int i = 0; i < spec.nodes; ++i) {
      const double fx = f(spec.lo + i * h);
      if (!std::isfinite(fx)) throw NumericFailure("integrate: non-finite integrand");
      acc += (i == 0 || i == spec.nodes - 1) ? 0.5 * fx : fx;
    }
    return acc * h;
  }
  for (int i = 0; i < spec.nodes; ++i) {
    const double fx = f(spec.lo + i * h);
    if (!std::isfinite(fx)) throw NumericFailure("integrate: non-finite integrand");
    const double w = (i == 0 || i == spec.nodes - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * fx;
  }
  return acc * h / 3.0;
}

enum class DomainSide { source, target };

/// Absolute loss int p~(z) |f~(z) - h(z)| dz over the induced domain.
double abs_error(const domains::LinearUdaModel& model, const domains::MixtureDomain& domain,
                 const domains::Vec2& u, const QuadratureSpec& spec);

/// Squared loss int p~(z) (Phi(a z + b) - f~(z))^2 dz used by the case
/// objective.
double sq_source_loss(const domains::LinearUdaModel& model, const domains::MixtureDomain& domain,
                      const domains::Vec2& u, const QuadratureSpec& spec);

/// Labeling-function mismatch int p~_w(z) |f~_S(z) - f~_T(z)| dz, where the
/// weighting density p~_w comes from the side selected by `weighting`.
double label_mismatch(DomainSide weighting, const domains::Vec2& u,
                      const domains::MixtureDomainPair& pair, const QuadratureSpec& spec);

/// D_1(pA, pB) = int |pA - pB|, in [0,2].
double total_variation(const domains::InducedMixture1D& pa, const domains::InducedMixture1D& pb,
                       const QuadratureSpec& spec);

/// int (pA - pB)^2.
double sq_density_mismatch(const domains::InducedMixture1D& pa,
                           const domains::InducedMixture1D& pb, const QuadratureSpec& spec);

/// D_KL(pA || pB) = int pA log(pA/pB); densities clamped at 1e-300.
double kl_divergence(const domains::InducedMixture1D& pa, const domains::InducedMixture1D& pb,
                     const QuadratureSpec& spec);

/// Full measure set for a configuration; kl is D_KL(p~_S || p~_T).
MeasureSet compute_measures(const domains::MixtureDomainPair& pair,
                            const domains::LinearUdaModel& model, const QuadratureSpec& spec);

}  // namespace udalab::measures
