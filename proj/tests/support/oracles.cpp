#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/LU>

#include "udalab/rng.hpp"

namespace oracles {

using udalab::domains::InducedMixture1D;
using udalab::domains::MixtureDomain;
using udalab::domains::Vec2;
using udalab::rng::Xoshiro256pp;

namespace {

Eigen::Vector2d draw_mixture(const MixtureDomain& d, Xoshiro256pp& gen) {
  const Eigen::Vector2d& mu = gen.uniform() < 0.5 ? d.mu_pos : d.mu_neg;
  return {mu.x() + d.sigma * gen.normal(), mu.y() + d.sigma * gen.normal()};
}

McEstimate bernoulli_summary(double sum, double sum_sq, long n) {
  McEstimate e;
  e.count = n;
  if (n == 0) return e;
  e.mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - e.mean * e.mean);
  e.std_error = std::sqrt(var / n);
  return e;
}

}  // namespace

McEstimate slab_label_mc(const MixtureDomain& domain, const Vec2& u, double z, long draws,
                         double half_width, std::uint64_t seed) {
  Xoshiro256pp gen(seed);
  double sum = 0.0, sum_sq = 0.0;
  long kept = 0;
  for (long i = 0; i < draws; ++i) {
    const Eigen::Vector2d x = draw_mixture(domain, gen);
    if (std::abs(u.dot(x) - z) >= half_width) continue;
    const double f = domain.label_normal.dot(x) > 0.0 ? 1.0 : 0.0;
    sum += f;
    sum_sq += f * f;
    ++kept;
  }
  return bernoulli_summary(sum, sum_sq, kept);
}

McEstimate induced_expectation_mc(const MixtureDomain& domain, const Vec2& u,
                                  const std::function<double(double)>& g, long draws,
                                  std::uint64_t seed) {
  Xoshiro256pp gen(seed);
  double sum = 0.0, sum_sq = 0.0;
  for (long i = 0; i < draws; ++i) {
    const double v = g(u.dot(draw_mixture(domain, gen)));
    sum += v;
    sum_sq += v * v;
  }
  return bernoulli_summary(sum, sum_sq, draws);
}

McEstimate kl_mc(const InducedMixture1D& pa, const InducedMixture1D& pb, long draws,
                 std::uint64_t seed) {
  Xoshiro256pp gen(seed);
  double sum = 0.0, sum_sq = 0.0;
  for (long i = 0; i < draws; ++i) {
    const double mean = gen.uniform() < 0.5 ? pa.mean_pos : pa.mean_neg;
    const double z = mean + pa.sigma * gen.normal();
    const double v = std::log(std::max(pa.density(z), 1e-300) / std::max(pb.density(z), 1e-300));
    sum += v;
    sum_sq += v * v;
  }
  return bernoulli_summary(sum, sum_sq, draws);
}

double tv_equal_sigma_gaussians(double m1, double m2, double sigma) {
  const double d = std::abs(m1 - m2);
  return 2.0 * (2.0 * udalab::domains::normal_cdf(d / (2.0 * sigma)) - 1.0);
}

double trapezoid(const std::function<double(double)>& f, double lo, double hi, long nodes) {
  const double h = (hi - lo) / static_cast<double>(nodes - 1);
  double acc = 0.5 * (f(lo) + f(hi));
  for (long i = 1; i + 1 < nodes; ++i) acc += f(lo + i * h);
  return acc * h;
}

double intersection_linear_solve(const Vec2& u, const Vec2& v, double z) {
  Eigen::Matrix2d a;
  a.row(0) = v.transpose();
  a.row(1) = u.transpose();
  const Eigen::Vector2d rhs(0.0, z);
  const Eigen::Vector2d x = a.fullPivLu().solve(rhs);
  return udalab::domains::perp(u).dot(x);
}

namespace {

// Energy statistic for one labeling of the pooled distance matrix.
double energy_statistic(const std::vector<float>& dist, const std::vector<char>& is_y, int total,
                        int nx, int ny) {
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (int i = 0; i < total; ++i) {
    const char yi = is_y[i];
    const float* row = dist.data() + static_cast<std::size_t>(i) * total;
    for (int j = i + 1; j < total; ++j) {
      const float d = row[j];
      if (yi == is_y[j]) {
        if (yi)
          syy += d;
        else
          sxx += d;
      } else {
        sxy += d;
      }
    }
  }
  return 2.0 * sxy / (static_cast<double>(nx) * ny) - 2.0 * sxx / (static_cast<double>(nx) * nx) -
         2.0 * syy / (static_cast<double>(ny) * ny);
}

}  // namespace

double energy_permutation_pvalue(const std::vector<Eigen::Vector2d>& xs,
                                 const std::vector<Eigen::Vector2d>& ys, int permutations,
                                 std::uint64_t seed) {
  const int nx = static_cast<int>(xs.size());
  const int ny = static_cast<int>(ys.size());
  const int total = nx + ny;
  std::vector<Eigen::Vector2d> pooled;
  pooled.reserve(total);
  pooled.insert(pooled.end(), xs.begin(), xs.end());
  pooled.insert(pooled.end(), ys.begin(), ys.end());

  std::vector<float> dist(static_cast<std::size_t>(total) * total);
  for (int i = 0; i < total; ++i)
    for (int j = i + 1; j < total; ++j) {
      const float d = static_cast<float>((pooled[i] - pooled[j]).norm());
      dist[static_cast<std::size_t>(i) * total + j] = d;
      dist[static_cast<std::size_t>(j) * total + i] = d;
    }

  std::vector<char> labels(total, 0);
  std::fill(labels.begin() + nx, labels.end(), 1);
  const double observed = energy_statistic(dist, labels, total, nx, ny);

  Xoshiro256pp gen(seed);
  int at_least = 0;
  std::vector<char> perm = labels;
  for (int p = 0; p < permutations; ++p) {
    for (int i = total - 1; i > 0; --i)
      std::swap(perm[i], perm[gen.below(static_cast<std::uint64_t>(i) + 1)]);
    if (energy_statistic(dist, perm, total, nx, ny) >= observed) ++at_least;
  }
  return (1.0 + at_least) / (permutations + 1.0);
}

// --- finite differences -----------------------------------------------------

using udalab::nnkit::Mlp;
using udalab::nnkit::Phase;
using udalab::nnkit::UdaGrads;
using udalab::nnkit::UdaMethod;
using udalab::nnkit::UdaModel;

std::vector<Mlp*> phase_groups(UdaModel& model, Phase phase) {
  switch (phase) {
    case Phase::main:
      return {&model.feature, &model.classifier};
    case Phase::disc:
      return {&model.discriminator};
    case Phase::mcd_a:
      return {&model.feature, &model.classifier, &model.classifier2};
    case Phase::mcd_b:
      return {&model.classifier, &model.classifier2};
    case Phase::mcd_c:
      return {&model.feature};
  }
  throw std::logic_error("phase_groups: unreachable");
}

std::vector<double> flatten_params(const std::vector<Mlp*>& nets) {
  std::vector<double> out;
  for (const Mlp* net : nets)
    for (const auto& layer : net->layers) {
      out.insert(out.end(), layer.W.data(), layer.W.data() + layer.W.size());
      out.insert(out.end(), layer.b.data(), layer.b.data() + layer.b.size());
    }
  return out;
}

void unflatten_params(const std::vector<Mlp*>& nets, const std::vector<double>& v) {
  std::size_t pos = 0;
  for (Mlp* net : nets)
    for (auto& layer : net->layers) {
      std::copy(v.begin() + pos, v.begin() + pos + layer.W.size(), layer.W.data());
      pos += layer.W.size();
      std::copy(v.begin() + pos, v.begin() + pos + layer.b.size(), layer.b.data());
      pos += layer.b.size();
    }
  if (pos != v.size()) throw std::invalid_argument("unflatten_params: size mismatch");
}

namespace {
const udalab::nnkit::MlpGrads* grads_for(const UdaModel& model, const UdaGrads& g,
                                         const Mlp* net) {
  if (net == &model.feature) return &g.feature;
  if (net == &model.classifier) return &g.classifier;
  if (net == &model.discriminator) return &g.discriminator;
  if (net == &model.classifier2) return &g.classifier2;
  throw std::logic_error("grads_for: unknown group");
}
}  // namespace

std::vector<double> flatten_grads(const UdaModel& model, const UdaGrads& grads, Phase phase) {
  auto groups = phase_groups(const_cast<UdaModel&>(model), phase);
  std::vector<double> out;
  for (const Mlp* net : groups) {
    const auto* g = grads_for(model, grads, net);
    for (std::size_t l = 0; l < g->W.size(); ++l) {
      out.insert(out.end(), g->W[l].data(), g->W[l].data() + g->W[l].size());
      out.insert(out.end(), g->b[l].data(), g->b[l].data() + g->b[l].size());
    }
  }
  return out;
}

double fd_max_rel_error(UdaModel& model, Phase phase, const udalab::nnkit::StepBatch& batch,
                        double adv_weight, double h) {
  const UdaGrads analytic = udalab::nnkit::step_grads(model, phase, batch, adv_weight);
  const std::vector<double> g = flatten_grads(model, analytic, phase);

  auto groups = phase_groups(model, phase);
  std::vector<double> theta = flatten_params(groups);
  double worst = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double orig = theta[i];
    theta[i] = orig + h;
    unflatten_params(groups, theta);
    const double lp = udalab::nnkit::step_loss(model, phase, batch, adv_weight);
    theta[i] = orig - h;
    unflatten_params(groups, theta);
    const double lm = udalab::nnkit::step_loss(model, phase, batch, adv_weight);
    theta[i] = orig;
    const double fd = (lp - lm) / (2.0 * h);
    const double denom = std::max({std::abs(fd), std::abs(g[i]), 1e-6});
    worst = std::max(worst, std::abs(fd - g[i]) / denom);
  }
  unflatten_params(groups, theta);
  return worst;
}

}  // namespace oracles
