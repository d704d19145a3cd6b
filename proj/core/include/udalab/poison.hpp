#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "udalab/datagen.hpp"
#include "udalab/nnkit.hpp"

namespace udalab::poison {

enum class SampleFrom { source, target };
enum class LabelScheme { next_class, nearest_incorrect_class };
enum class Norm { l_inf, l2 };

/// Mislabeled-data poisoning. `fraction` is measured against the size of the
/// target set regardless of where the poison points are sampled from.
struct WrongLabelSpec {
  SampleFrom sample_from = SampleFrom::target;
  double fraction = 0.10;
  LabelScheme scheme = LabelScheme::next_class;
};

/// Watermark poisoning: p = alpha t + (1 - alpha) s with s the nearest
/// same-class source sample to the selected target sample t.
struct WatermarkSpec {
  double alpha = 0.3;
  double fraction = 0.10;
  LabelScheme scheme = LabelScheme::next_class;
};

/// Clean-label alternating attack against one target test point.
struct CleanLabelSpec {
  double eps = 0.1;
  Norm norm = Norm::l_inf;
  int n_poison = 5;
  SampleFrom base_from = SampleFrom::target;
  int target_test_index = 0;
  int outer_iters = 100;
  double attacker_step = 0.05;
  std::vector<int> reinit_points;  ///< outer iterations with victim re-init

  /// {1/4, 1/2, 3/4} of outer_iters.
  static std::vector<int> default_reinit_points(int outer_iters);
};

/// (y + 1) mod k; throws for k < 2.
int next_class_label(int y, int k);

/// Label of the centroid (in a reference representation) nearest to g(x),
/// excluding the true class; ties break to the lowest class index. Centroids
/// are indexed by class; a non-finite centroid entry marks a missing class.
int nearest_incorrect_class_label(const Eigen::Vector2d& x, const nnkit::UdaModel& reference,
                                  const std::vector<Eigen::VectorXd>& class_centroids,
                                  int true_class);

/// Per-class mean of the reference representation over a dataset.
std::vector<Eigen::VectorXd> class_centroids(const nnkit::UdaModel& reference,
                                             const datagen::Dataset& data);

/// Poison-only dataset of round(fraction * |target|) relabeled samples drawn
/// without replacement from the selected pool. The reference model is needed
/// for the nearest_incorrect_class scheme only.
datagen::Dataset make_wrong_label_poison(const datagen::Dataset& source,
                                         const datagen::Dataset& target, const WrongLabelSpec& spec,
                                         std::uint64_t seed,
                                         const nnkit::UdaModel* reference = nullptr);

/// Watermark poisons; target samples without a same-class source base are
/// skipped and their indices reported through `skipped` when given.
datagen::Dataset make_watermark_poison(const datagen::Dataset& source,
                                       const datagen::Dataset& target, const WatermarkSpec& spec,
                                       std::uint64_t seed,
                                       const nnkit::UdaModel* reference = nullptr,
                                       std::vector<int>* skipped = nullptr);

/// Nearest point to `candidate` in the eps-ball around `base`: coordinate
/// clamp for l_inf, radial scaling for l2.
Eigen::Vector2d project_to_ball(const Eigen::Vector2d& candidate, const Eigen::Vector2d& base,
                                double eps, Norm norm);

struct CleanLabelTrace {
  std::vector<double> objective_before;  ///< attacker objective entering each step
  std::vector<double> objective_after;   ///< after the projected descent step
  bool failed = false;                    ///< victim training diverged
};

/// Alternating clean-label optimization: one victim epoch on source+poisons,
/// then one projected attacker step on sum_i ||g(x_test) - g(u_i)||^2. The
/// attacker step backtracks so it never increases its objective at fixed
/// victim parameters. Poisons keep their base labels.
std::pair<datagen::Dataset, CleanLabelTrace> clean_label_alternate(
    const CleanLabelSpec& spec, nnkit::UdaMethod victim, const datagen::Dataset& source,
    const datagen::Dataset& target, const nnkit::TrainConfig& cfg, std::uint64_t seed);

struct AttackEvalResult {
  double success_rate = 0.0;  ///< over all retrain seeds
  int successes = 0;
  int divergences = 0;  ///< diverged retrains, counted as non-success
};

/// Retrains the victim from scratch per seed on source+poisons and reports
/// the fraction of seeds for which the test point is misclassified.
AttackEvalResult attack_eval(const datagen::Dataset& poisons, nnkit::UdaMethod victim,
                             const datagen::Dataset& source, const datagen::Dataset& target,
                             int test_index, const std::vector<std::uint64_t>& retrain_seeds,
                             const nnkit::TrainConfig& cfg);

}  // namespace udalab::poison
