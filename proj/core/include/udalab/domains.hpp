#pragma once

#include <Eigen/Core>

namespace udalab::domains {

using Vec2 = Eigen::Vector2d;

/// Two-component isotropic Gaussian mixture in the plane with a halfspace
/// labeling rule f(x) = I[label_normal . x > 0]. Mixture weights are 0.5/0.5.
struct MixtureDomain {
  Vec2 mu_pos;        ///< mean of the positive-class component
  Vec2 mu_neg;        ///< mean of the negative-class component
  double sigma;       ///< shared isotropic standard deviation, > 0
  Vec2 label_normal;  ///< unit normal of the labeling halfspace

  /// Validates sigma > 0 and ||label_normal|| = 1 within 1e-12.
  static MixtureDomain make(const Vec2& mu_pos, const Vec2& mu_neg, double sigma,
                            const Vec2& label_normal);
};

struct MixtureDomainPair {
  MixtureDomain source;
  MixtureDomain target;
};

/// Linear representation g(x) = u.x plus the calibrated hypothesis
/// h(z) = Phi(a z + b).
struct LinearUdaModel {
  Vec2 u;
  double a = 1.0;
  double b = 0.0;
};

/// 1-D pushforward of a MixtureDomain through g(x) = u.x. Component means are
/// u.mu; sigma is carried over unchanged, which is exact for unit-norm u and
/// isotropic covariance.
struct InducedMixture1D {
  double mean_pos;
  double mean_neg;
  double sigma;

  double density(double z) const;
};

/// Standard normal CDF, accurate in both tails.
double normal_cdf(double x);

/// The fixed perpendicular convention: +90 degree rotation (-u.y, u.x).
Vec2 perp(const Vec2& u);

/// True when |label_normal . perp(u)| < 1e-9, i.e. the labeling boundary is
/// parallel to the projection axis and the sign(z) branch applies.
bool degenerate_projection(const Vec2& u, const Vec2& v);

/// Pushforward of `domain` through z = u.x. Throws std::invalid_argument for
/// zero-norm u.
InducedMixture1D project_domain(const MixtureDomain& domain, const Vec2& u);

/// Coordinate along perp(u) of the point satisfying v.x = 0 and u.x = z.
/// With the perp convention above this is q = -z (u.v) / (v.perp(u)).
/// Throws std::domain_error when the denominator vanishes; callers must take
/// the sign(z) branch of induced_label_fn instead.
double intersection_coord(const Vec2& u, const Vec2& v, double z);

/// Induced labeling function f~(z) = E[f(x) | u.x = z], evaluated in closed
/// form. Non-degenerate branches mix the two components with their posterior
/// weights given z; degenerate branches reduce to 0.5 (1 +- sign(z)).
double induced_label_fn(const MixtureDomain& domain, const Vec2& u, double z);

/// h(z) = Phi(a z + b).
double hypothesis_eval(const LinearUdaModel& model, double z);

}  // namespace udalab::domains
