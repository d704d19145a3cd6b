#include "udalab/domains.hpp"

#include <cmath>
#include <stdexcept>

namespace udalab::domains {

namespace {
constexpr double kDegenerateTol = 1e-9;
constexpr double kUnitNormTol = 1e-12;
}  // namespace

MixtureDomain MixtureDomain::make(const Vec2& mu_pos, const Vec2& mu_neg, double sigma,
                                  const Vec2& label_normal) {
  if (!(sigma > 0.0)) throw std::invalid_argument("MixtureDomain: sigma must be > 0");
  if (std::abs(label_normal.norm() - 1.0) > kUnitNormTol)
    throw std::invalid_argument("MixtureDomain: label_normal must be unit length");
  return MixtureDomain{mu_pos, mu_neg, sigma, label_normal};
}

double InducedMixture1D::density(double z) const {
  const double inv = 1.0 / (sigma * std::sqrt(2.0 * M_PI));
  const double dp = (z - mean_pos) / sigma;
  const double dn = (z - mean_neg) / sigma;
  return 0.5 * inv * (std::exp(-0.5 * dp * dp) + std::exp(-0.5 * dn * dn));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

Vec2 perp(const Vec2& u) { return Vec2(-u.y(), u.x()); }

bool degenerate_projection(const Vec2& u, const Vec2& v) {
  return std::abs(v.dot(perp(u))) < kDegenerateTol;
}

InducedMixture1D project_domain(const MixtureDomain& domain, const Vec2& u) {
  if (u.norm() == 0.0) throw std::invalid_argument("project_domain: u must be nonzero");
  return InducedMixture1D{u.dot(domain.mu_pos), u.dot(domain.mu_neg), domain.sigma};
}

double intersection_coord(const Vec2& u, const Vec2& v, double z) {
  const double denom = v.dot(perp(u));  // = u1 v2 - u2 v1
  if (std::abs(denom) < kDegenerateTol)
    throw std::domain_error("intersection_coord: degenerate projection, take the sign(z) branch");
  return -z * u.dot(v) / denom;
}

// f~(z) = E[f(x) | u.x = z]. In the rotated frame (z along u, w along perp(u))
// each component factorizes, so conditioning on z leaves a 1-D mixture over w
// with posterior weights proportional to the component likelihoods at z. The
// labeling halfspace v.x > 0 becomes a one-sided constraint on w with
// threshold q = intersection_coord(u, v, z); which side counts as positive is
// decided by the sign of v.perp(u).
double induced_label_fn(const MixtureDomain& domain, const Vec2& u, double z) {
  const Vec2 w_axis = perp(u);
  const double vdw = domain.label_normal.dot(w_axis);
  if (std::abs(vdw) < kDegenerateTol) {
    const double vdu = domain.label_normal.dot(u);
    const double s = (z > 0.0) ? 1.0 : (z < 0.0 ? -1.0 : 0.0);
    return vdu > 0.0 ? 0.5 * (1.0 + s) : 0.5 * (1.0 - s);
  }

  const double q = -z * u.dot(domain.label_normal) / vdw;
  const double sigma = domain.sigma;

  // Posterior component weights given u.x = z, computed via the exponent
  // difference to stay stable when both likelihoods underflow.
  const double zp = u.dot(domain.mu_pos);
  const double zn = u.dot(domain.mu_neg);
  const double ep = -0.5 * (z - zp) * (z - zp) / (sigma * sigma);
  const double en = -0.5 * (z - zn) * (z - zn) / (sigma * sigma);
  const double w_pos = 1.0 / (1.0 + std::exp(en - ep));
  const double w_neg = 1.0 - w_pos;

  const double mp = w_axis.dot(domain.mu_pos);
  const double mn = w_axis.dot(domain.mu_neg);
  const double cp = normal_cdf((q - mp) / sigma);
  const double cn = normal_cdf((q - mn) / sigma);
  if (vdw > 0.0) return w_pos * (1.0 - cp) + w_neg * (1.0 - cn);
  return w_pos * cp + w_neg * cn;
}

double hypothesis_eval(const LinearUdaModel& model, double z) {
  return normal_cdf(model.a * z + model.b);
}

}  // namespace udalab::domains
