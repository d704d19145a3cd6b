#include "udalab/measures.hpp"

#include <algorithm>
#include <stdexcept>

namespace udalab::measures {

using domains::InducedMixture1D;
using domains::LinearUdaModel;
using domains::MixtureDomain;
using domains::MixtureDomainPair;
using domains::Vec2;

void QuadratureSpec::validate() const {
  if (!(lo < hi)) throw std::invalid_argument("QuadratureSpec: lo must be < hi");
  if (nodes < 2) throw std::invalid_argument("QuadratureSpec: nodes must be >= 2");
  if (rule == Rule::simpson && (nodes < 101 || nodes % 2 == 0))
    throw std::invalid_argument("QuadratureSpec: simpson needs odd nodes >= 101");
}

namespace {

void require_coverage(const InducedMixture1D& p, const QuadratureSpec& spec) {
  const double lo_need = std::min(p.mean_pos, p.mean_neg) - 6.0 * p.sigma;
  const double hi_need = std::max(p.mean_pos, p.mean_neg) + 6.0 * p.sigma;
  if (spec.lo > lo_need || spec.hi < hi_need)
    throw RangeCoverageError("quadrature range does not cover 6 sigma beyond the induced means");
}

}  // namespace

double abs_error(const LinearUdaModel& model, const MixtureDomain& domain, const Vec2& u,
                 const QuadratureSpec& spec) {
  const InducedMixture1D p = domains::project_domain(domain, u);
  require_coverage(p, spec);
  return integrate(
      [&](double z) {
        return p.density(z) *
               std::abs(domains::induced_label_fn(domain, u, z) - domains::hypothesis_eval(model, z));
      },
      spec);
}

double sq_source_loss(const LinearUdaModel& model, const MixtureDomain& domain, const Vec2& u,
                      const QuadratureSpec& spec) {
  const InducedMixture1D p = domains::project_domain(domain, u);
  require_coverage(p, spec);
  return integrate(
      [&](double z) {
        const double d = domains::hypothesis_eval(model, z) - domains::induced_label_fn(domain, u, z);
        return p.density(z) * d * d;
      },
      spec);
}

double label_mismatch(DomainSide weighting, const Vec2& u, const MixtureDomainPair& pair,
                      const QuadratureSpec& spec) {
  const MixtureDomain& wd = (weighting == DomainSide::source) ? pair.source : pair.target;
  const InducedMixture1D p = domains::project_domain(wd, u);
  require_coverage(p, spec);
  return integrate(
      [&](double z) {
        return p.density(z) * std::abs(domains::induced_label_fn(pair.source, u, z) -
                                       domains::induced_label_fn(pair.target, u, z));
      },
      spec);
}

double total_variation(const InducedMixture1D& pa, const InducedMixture1D& pb,
                       const QuadratureSpec& spec) {
  require_coverage(pa, spec);
  require_coverage(pb, spec);
  return integrate([&](double z) { return std::abs(pa.density(z) - pb.density(z)); }, spec);
}

double sq_density_mismatch(const InducedMixture1D& pa, const InducedMixture1D& pb,
                           const QuadratureSpec& spec) {
  require_coverage(pa, spec);
  require_coverage(pb, spec);
  return integrate(
      [&](double z) {
        const double d = pa.density(z) - pb.density(z);
        return d * d;
      },
      spec);
}

double kl_divergence(const InducedMixture1D& pa, const InducedMixture1D& pb,
                     const QuadratureSpec& spec) {
  require_coverage(pa, spec);
  require_coverage(pb, spec);
  constexpr double kFloor = 1e-300;
  return integrate(
      [&](double z) {
        const double a = pa.density(z);
        if (a < kFloor) return 0.0;
        const double b = std::max(pb.density(z), kFloor);
        return a * std::log(a / b);
      },
      spec);
}

MeasureSet compute_measures(const MixtureDomainPair& pair, const LinearUdaModel& model,
                            const QuadratureSpec& spec) {
  const InducedMixture1D ps = domains::project_domain(pair.source, model.u);
  const InducedMixture1D pt = domains::project_domain(pair.target, model.u);
  MeasureSet m;
  m.e_S_sq = sq_source_loss(model, pair.source, model.u, spec);
  m.e_S_abs = abs_error(model, pair.source, model.u, spec);
  m.e_T_abs = abs_error(model, pair.target, model.u, spec);
  m.mismatch_S = label_mismatch(DomainSide::source, model.u, pair, spec);
  m.mismatch_T = label_mismatch(DomainSide::target, model.u, pair, spec);
  m.tv = total_variation(ps, pt, spec);
  m.mismatch_sq = sq_density_mismatch(ps, pt, spec);
  m.kl = kl_divergence(ps, pt, spec);
  return m;
}

}  // namespace udalab::measures
