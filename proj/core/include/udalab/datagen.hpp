#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "udalab/domains.hpp"

namespace udalab::datagen {

enum class DomainTag : std::uint8_t { source, target };

struct LabeledSample {
  Eigen::Vector2d x;
  int y = 0;
  DomainTag domain = DomainTag::source;
  bool is_poison = false;
};

struct Dataset {
  std::vector<LabeledSample> samples;
  int num_classes = 2;

  int size() const { return static_cast<int>(samples.size()); }
  bool empty() const { return samples.empty(); }
};

/// Two-moons generator configuration. Class 0 lives on (cos t, sin t) and
/// class 1 on (1 - cos t, 0.5 - sin t) for t ~ U[0, pi], radius 1, plus
/// isotropic N(0, noise_sigma^2) noise. The target set is an independent draw
/// of the same process translated by (+shift, 0) with labels carried over.
struct MoonsConfig {
  int n_per_domain = 500;
  double noise_sigma = 0.1;
  double shift = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Returns (source, target). Each dataset holds exactly n_per_domain samples,
/// half per class, class 0 first. Sub-streams: (seed,0) for the source draw,
/// (seed,1) for the target draw.
std::pair<Dataset, Dataset> gen_two_moons(const MoonsConfig& cfg);

/// n i.i.d. draws from the mixture; the component is chosen with probability
/// 0.5 and the label is I[v.x > 0] of the realized point, so boundary-side
/// label noise is genuine.
Dataset gen_mixture_samples(const domains::MixtureDomain& domain, int n, std::uint64_t seed,
                            DomainTag tag = DomainTag::source);

}  // namespace udalab::datagen
