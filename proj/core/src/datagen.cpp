#include "udalab/datagen.hpp"

#include <cmath>
#include <stdexcept>

#include "udalab/rng.hpp"

namespace udalab::datagen {

void MoonsConfig::validate() const {
  if (n_per_domain < 2 || n_per_domain % 2 != 0)
    throw std::invalid_argument("MoonsConfig: n_per_domain must be even and >= 2");
  if (noise_sigma < 0.0) throw std::invalid_argument("MoonsConfig: noise_sigma must be >= 0");
}

namespace {

Dataset draw_moons(rng::Xoshiro256pp& gen, int n, double noise_sigma, DomainTag tag) {
  Dataset d;
  d.num_classes = 2;
  d.samples.reserve(n);
  const int per_class = n / 2;
  for (int cls = 0; cls < 2; ++cls) {
    for (int i = 0; i < per_class; ++i) {
      const double t = gen.uniform(0.0, M_PI);
      Eigen::Vector2d x = cls == 0 ? Eigen::Vector2d(std::cos(t), std::sin(t))
                                   : Eigen::Vector2d(1.0 - std::cos(t), 0.5 - std::sin(t));
      x.x() += noise_sigma * gen.normal();
      x.y() += noise_sigma * gen.normal();
      d.samples.push_back({x, cls, tag, false});
    }
  }
  return d;
}

}  // namespace

std::pair<Dataset, Dataset> gen_two_moons(const MoonsConfig& cfg) {
  cfg.validate();
  rng::Xoshiro256pp source_gen(rng::substream(cfg.seed, 0));
  rng::Xoshiro256pp target_gen(rng::substream(cfg.seed, 1));
  Dataset source = draw_moons(source_gen, cfg.n_per_domain, cfg.noise_sigma, DomainTag::source);
  Dataset target = draw_moons(target_gen, cfg.n_per_domain, cfg.noise_sigma, DomainTag::target);
  for (auto& s : target.samples) s.x.x() += cfg.shift;
  return {std::move(source), std::move(target)};
}

Dataset gen_mixture_samples(const domains::MixtureDomain& domain, int n, std::uint64_t seed,
                            DomainTag tag) {
  if (n < 1) throw std::invalid_argument("gen_mixture_samples: n must be >= 1");
  rng::Xoshiro256pp gen(seed);
  Dataset d;
  d.num_classes = 2;
  d.samples.reserve(n);
  for (int i = 0; i < n; ++i) {
    const bool pos = gen.uniform() < 0.5;
    const Eigen::Vector2d& mu = pos ? domain.mu_pos : domain.mu_neg;
    const Eigen::Vector2d x(mu.x() + domain.sigma * gen.normal(),
                            mu.y() + domain.sigma * gen.normal());
    const int y = domain.label_normal.dot(x) > 0.0 ? 1 : 0;
    d.samples.push_back({x, y, tag, false});
  }
  return d;
}

}  // namespace udalab::datagen
