#include "udalab/poison.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "udalab/rng.hpp"

namespace udalab::poison {

using datagen::Dataset;
using datagen::DomainTag;
using datagen::LabeledSample;

std::vector<int> CleanLabelSpec::default_reinit_points(int outer_iters) {
  return {outer_iters / 4, outer_iters / 2, (3 * outer_iters) / 4};
}

int next_class_label(int y, int k) {
  if (k < 2) throw std::invalid_argument("next_class_label: need at least 2 classes");
  if (y < 0 || y >= k) throw std::invalid_argument("next_class_label: label out of range");
  return (y + 1) % k;
}

std::vector<Eigen::VectorXd> class_centroids(const nnkit::UdaModel& reference,
                                             const Dataset& data) {
  const nnkit::Matrix feats = nnkit::mlp_forward(reference.feature, nnkit::to_matrix(data));
  std::vector<Eigen::VectorXd> centroids(
      data.num_classes, Eigen::VectorXd::Constant(feats.cols(), std::numeric_limits<double>::quiet_NaN()));
  std::vector<int> counts(data.num_classes, 0);
  for (int i = 0; i < data.size(); ++i) {
    const int y = data.samples[i].y;
    if (counts[y] == 0) centroids[y] = Eigen::VectorXd::Zero(feats.cols());
    centroids[y] += feats.row(i).transpose();
    ++counts[y];
  }
  for (int c = 0; c < data.num_classes; ++c)
    if (counts[c] > 0) centroids[c] /= counts[c];
  return centroids;
}

int nearest_incorrect_class_label(const Eigen::Vector2d& x, const nnkit::UdaModel& reference,
                                  const std::vector<Eigen::VectorXd>& centroids, int true_class) {
  if (centroids.size() < 2)
    throw std::invalid_argument("nearest_incorrect_class_label: need at least 2 classes");
  nnkit::Matrix xm(1, 2);
  xm.row(0) = x.transpose();
  const Eigen::VectorXd f = nnkit::mlp_forward(reference.feature, xm).row(0).transpose();

  int best = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int c = 0; c < static_cast<int>(centroids.size()); ++c) {
    if (c == true_class) continue;
    if (!centroids[c].allFinite())
      throw std::invalid_argument("nearest_incorrect_class_label: missing centroid");
    const double d = (f - centroids[c]).norm();
    if (d < best_dist) {  // strict: ties keep the lowest class index
      best_dist = d;
      best = c;
    }
  }
  return best;
}

namespace {

// First n entries of a seeded partial Fisher-Yates over 0..pool-1.
std::vector<int> sample_without_replacement(int pool, int n, std::uint64_t seed) {
  std::vector<int> idx(pool);
  std::iota(idx.begin(), idx.end(), 0);
  rng::Xoshiro256pp gen(seed);
  for (int i = 0; i < n; ++i) {
    const int j = i + static_cast<int>(gen.below(pool - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  return idx;
}

int relabel(const LabeledSample& s, LabelScheme scheme, int num_classes,
            const nnkit::UdaModel* reference,
            const std::vector<Eigen::VectorXd>* centroids) {
  if (scheme == LabelScheme::next_class) return next_class_label(s.y, num_classes);
  if (!reference || !centroids)
    throw std::invalid_argument("nearest_incorrect_class scheme needs a reference representation");
  return nearest_incorrect_class_label(s.x, *reference, *centroids, s.y);
}

}  // namespace

Dataset make_wrong_label_poison(const Dataset& source, const Dataset& target,
                                const WrongLabelSpec& spec, std::uint64_t seed,
                                const nnkit::UdaModel* reference) {
  if (source.empty() || target.empty())
    throw std::invalid_argument("make_wrong_label_poison: datasets must be non-empty");
  if (spec.fraction < 0.0 || spec.fraction > 1.0)
    throw std::invalid_argument("make_wrong_label_poison: fraction out of [0,1]");

  const Dataset& pool = spec.sample_from == SampleFrom::source ? source : target;
  const int n_poison = static_cast<int>(std::llround(spec.fraction * target.size()));
  if (n_poison > pool.size())
    throw std::invalid_argument("make_wrong_label_poison: poison count exceeds pool size");

  std::vector<Eigen::VectorXd> centroids;
  if (spec.scheme == LabelScheme::nearest_incorrect_class) {
    if (!reference)
      throw std::invalid_argument("nearest_incorrect_class scheme needs a reference representation");
    centroids = class_centroids(*reference, source);
  }

  Dataset poisons;
  poisons.num_classes = pool.num_classes;
  poisons.samples.reserve(n_poison);
  for (int i : sample_without_replacement(pool.size(), n_poison, seed)) {
    const LabeledSample& s = pool.samples[i];
    const int y = relabel(s, spec.scheme, pool.num_classes, reference, &centroids);
    poisons.samples.push_back({s.x, y, DomainTag::source, true});
  }
  return poisons;
}

Dataset make_watermark_poison(const Dataset& source, const Dataset& target,
                              const WatermarkSpec& spec, std::uint64_t seed,
                              const nnkit::UdaModel* reference, std::vector<int>* skipped) {
  if (source.empty() || target.empty())
    throw std::invalid_argument("make_watermark_poison: datasets must be non-empty");
  if (spec.alpha < 0.0 || spec.alpha > 1.0)
    throw std::invalid_argument("make_watermark_poison: alpha out of [0,1]");
  if (spec.fraction < 0.0 || spec.fraction > 1.0)
    throw std::invalid_argument("make_watermark_poison: fraction out of [0,1]");

  const int n_poison = static_cast<int>(std::llround(spec.fraction * target.size()));
  if (n_poison > target.size())
    throw std::invalid_argument("make_watermark_poison: poison count exceeds target size");

  std::vector<Eigen::VectorXd> centroids;
  if (spec.scheme == LabelScheme::nearest_incorrect_class) {
    if (!reference)
      throw std::invalid_argument("nearest_incorrect_class scheme needs a reference representation");
    centroids = class_centroids(*reference, source);
  }

  Dataset poisons;
  poisons.num_classes = target.num_classes;
  poisons.samples.reserve(n_poison);
  for (int ti : sample_without_replacement(target.size(), n_poison, seed)) {
    const LabeledSample& t = target.samples[ti];
    int base = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int si = 0; si < source.size(); ++si) {
      if (source.samples[si].y != t.y) continue;
      const double d = (source.samples[si].x - t.x).squaredNorm();
      if (d < best_dist) {
        best_dist = d;
        base = si;
      }
    }
    if (base < 0) {
      if (skipped) skipped->push_back(ti);
      continue;
    }
    const Eigen::Vector2d p =
        spec.alpha * t.x + (1.0 - spec.alpha) * source.samples[base].x;
    const LabeledSample labeled{t.x, t.y, t.domain, t.is_poison};
    const int y = relabel(labeled, spec.scheme, target.num_classes, reference, &centroids);
    poisons.samples.push_back({p, y, DomainTag::source, true});
  }
  return poisons;
}

Eigen::Vector2d project_to_ball(const Eigen::Vector2d& candidate, const Eigen::Vector2d& base,
                                double eps, Norm norm) {
  if (eps < 0.0) throw std::invalid_argument("project_to_ball: eps must be >= 0");
  const Eigen::Vector2d delta = candidate - base;
  if (norm == Norm::l_inf) {
    return base + delta.cwiseMax(-eps).cwiseMin(eps);
  }
  const double d = delta.norm();
  if (d <= eps) return candidate;
  return base + delta * (eps / d);
}

namespace {

double attacker_objective(const nnkit::UdaModel& model, const Eigen::VectorXd& f_test,
                          const nnkit::Matrix& poison_x) {
  const nnkit::Matrix f = nnkit::mlp_forward(model.feature, poison_x);
  double acc = 0.0;
  for (int i = 0; i < f.rows(); ++i) acc += (f.row(i).transpose() - f_test).squaredNorm();
  return acc;
}

}  // namespace

std::pair<Dataset, CleanLabelTrace> clean_label_alternate(const CleanLabelSpec& spec,
                                                          nnkit::UdaMethod victim,
                                                          const Dataset& source,
                                                          const Dataset& target,
                                                          const nnkit::TrainConfig& cfg,
                                                          std::uint64_t seed) {
  if (spec.n_poison < 1) throw std::invalid_argument("clean_label_alternate: n_poison >= 1");
  if (spec.eps < 0.0) throw std::invalid_argument("clean_label_alternate: eps >= 0");
  if (spec.outer_iters < 1) throw std::invalid_argument("clean_label_alternate: outer_iters >= 1");
  if (spec.target_test_index < 0 || spec.target_test_index >= target.size())
    throw std::invalid_argument("clean_label_alternate: target_test_index out of range");

  const LabeledSample& test = target.samples[spec.target_test_index];
  const int opposite = next_class_label(test.y, target.num_classes);

  // Bases: the n_poison pool samples of the opposite class nearest to the
  // test point in input space.
  const Dataset& pool = spec.base_from == SampleFrom::source ? source : target;
  std::vector<int> candidates;
  for (int i = 0; i < pool.size(); ++i)
    if (pool.samples[i].y == opposite) candidates.push_back(i);
  if (static_cast<int>(candidates.size()) < spec.n_poison)
    throw std::invalid_argument("clean_label_alternate: not enough opposite-class base points");
  std::stable_sort(candidates.begin(), candidates.end(), [&](int a, int b) {
    return (pool.samples[a].x - test.x).squaredNorm() < (pool.samples[b].x - test.x).squaredNorm();
  });
  candidates.resize(spec.n_poison);

  std::vector<Eigen::Vector2d> bases;
  Dataset poisons;
  poisons.num_classes = target.num_classes;
  for (int i : candidates) {
    bases.push_back(pool.samples[i].x);
    poisons.samples.push_back({pool.samples[i].x, pool.samples[i].y, DomainTag::source, true});
  }

  Dataset poisoned = source;
  for (const auto& s : poisons.samples) poisoned.samples.push_back(s);

  nnkit::TrainConfig victim_cfg = cfg;
  victim_cfg.epochs = spec.outer_iters;
  victim_cfg.seed = rng::substream(seed, 0);
  nnkit::Trainer trainer(victim, poisoned, target, victim_cfg);

  nnkit::Matrix test_x(1, 2);
  test_x.row(0) = test.x.transpose();

  CleanLabelTrace trace;
  int reinit_count = 0;

  for (int it = 0; it < spec.outer_iters; ++it) {
    if (std::find(spec.reinit_points.begin(), spec.reinit_points.end(), it) !=
        spec.reinit_points.end()) {
      trainer.reinitialize(rng::substream(seed, 1000 + static_cast<std::uint64_t>(++reinit_count)));
    }

    trainer.set_source(poisoned);
    if (trainer.run_epoch().diverged) {
      trace.failed = true;
      break;
    }

    // Attacker: projected gradient step with backtracking, so the logged
    // objective never increases at fixed victim parameters.
    const Eigen::VectorXd f_test =
        nnkit::mlp_forward(trainer.model().feature, test_x).row(0).transpose();

    nnkit::Matrix px(spec.n_poison, 2);
    for (int i = 0; i < spec.n_poison; ++i) px.row(i) = poisons.samples[i].x.transpose();

    const double obj_before = attacker_objective(trainer.model(), f_test, px);
    trace.objective_before.push_back(obj_before);

    nnkit::MlpTrace ft_trace;
    const nnkit::Matrix f = nnkit::mlp_forward(trainer.model().feature, px, &ft_trace);
    nnkit::Matrix dout(f.rows(), f.cols());
    for (int i = 0; i < f.rows(); ++i) dout.row(i) = 2.0 * (f.row(i) - f_test.transpose());
    nnkit::Matrix dinput;
    nnkit::mlp_backward(trainer.model().feature, ft_trace, dout, &dinput);

    double step = spec.attacker_step;
    double obj_after = obj_before;
    nnkit::Matrix accepted = px;
    for (int bt = 0; bt < 30; ++bt) {
      nnkit::Matrix cand(spec.n_poison, 2);
      for (int i = 0; i < spec.n_poison; ++i) {
        const Eigen::Vector2d moved = px.row(i).transpose() - step * dinput.row(i).transpose();
        cand.row(i) = project_to_ball(moved, bases[i], spec.eps, spec.norm).transpose();
      }
      const double obj_cand = attacker_objective(trainer.model(), f_test, cand);
      if (obj_cand <= obj_before) {
        accepted = cand;
        obj_after = obj_cand;
        break;
      }
      step *= 0.5;
    }
    trace.objective_after.push_back(obj_after);

    for (int i = 0; i < spec.n_poison; ++i) {
      poisons.samples[i].x = accepted.row(i).transpose();
      poisoned.samples[source.size() + i].x = poisons.samples[i].x;
    }
  }

  return {std::move(poisons), std::move(trace)};
}

AttackEvalResult attack_eval(const Dataset& poisons, nnkit::UdaMethod victim,
                             const Dataset& source, const Dataset& target, int test_index,
                             const std::vector<std::uint64_t>& retrain_seeds,
                             const nnkit::TrainConfig& cfg) {
  if (test_index < 0 || test_index >= target.size())
    throw std::invalid_argument("attack_eval: test_index out of range");
  if (retrain_seeds.empty()) throw std::invalid_argument("attack_eval: need retrain seeds");

  Dataset poisoned = source;
  for (const auto& s : poisons.samples) poisoned.samples.push_back(s);

  const LabeledSample& test = target.samples[test_index];
  nnkit::Matrix test_x(1, 2);
  test_x.row(0) = test.x.transpose();

  AttackEvalResult result;
  for (std::uint64_t s : retrain_seeds) {
    nnkit::TrainConfig run_cfg = cfg;
    run_cfg.seed = s;
    try {
      const nnkit::TrainReport report = nnkit::train_uda(victim, poisoned, target, run_cfg);
      const Eigen::VectorXi pred = nnkit::predict(report.model, test_x);
      if (pred[0] != test.y) ++result.successes;
    } catch (const nnkit::TrainingDiverged&) {
      ++result.divergences;
    }
  }
  result.success_rate = static_cast<double>(result.successes) / retrain_seeds.size();
  return result;
}

}  // namespace udalab::poison
