// Test-only oracles: independent reference computations the unit and
// acceptance suites check the library against. Everything here is seeded and
// never used by production code paths.
#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <vector>

#include "udalab/datagen.hpp"
#include "udalab/domains.hpp"
#include "udalab/nnkit.hpp"

namespace oracles {

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long count = 0;
};

/// Ground truth for the induced labeling function: draw x from the mixture,
/// keep the slab |u.x - z| < half_width, average f(x) = I[v.x > 0].
McEstimate slab_label_mc(const udalab::domains::MixtureDomain& domain,
                         const udalab::domains::Vec2& u, double z, long draws, double half_width,
                         std::uint64_t seed);

/// Sampling estimate of E_{z~p~}[g(z)] with z = u.x, x ~ domain mixture.
McEstimate induced_expectation_mc(const udalab::domains::MixtureDomain& domain,
                                  const udalab::domains::Vec2& u,
                                  const std::function<double(double)>& g, long draws,
                                  std::uint64_t seed);

/// Sampling estimate of D_KL(pa||pb) = E_{z~pa} log(pa/pb).
McEstimate kl_mc(const udalab::domains::InducedMixture1D& pa,
                 const udalab::domains::InducedMixture1D& pb, long draws, std::uint64_t seed);

/// Closed-form D_1 between N(m1, s^2) and N(m2, s^2): 2(2 Phi(|m1-m2|/2s) - 1).
double tv_equal_sigma_gaussians(double m1, double m2, double sigma);

/// Independent fine-grid trapezoid rule.
double trapezoid(const std::function<double(double)>& f, double lo, double hi, long nodes);

/// q via direct linear solve of {v.x = 0, u.x = z}, projected on perp(u).
double intersection_linear_solve(const udalab::domains::Vec2& u, const udalab::domains::Vec2& v,
                                 double z);

/// Two-sample energy-statistic permutation test; returns the p-value
/// (B = permutations). Small p rejects "same distribution".
double energy_permutation_pvalue(const std::vector<Eigen::Vector2d>& xs,
                                 const std::vector<Eigen::Vector2d>& ys, int permutations,
                                 std::uint64_t seed);

// --- finite-difference gradient checking -----------------------------------

/// Parameter groups a training phase updates.
std::vector<udalab::nnkit::Mlp*> phase_groups(udalab::nnkit::UdaModel& model,
                                              udalab::nnkit::Phase phase);

std::vector<double> flatten_params(const std::vector<udalab::nnkit::Mlp*>& nets);
void unflatten_params(const std::vector<udalab::nnkit::Mlp*>& nets, const std::vector<double>& v);
std::vector<double> flatten_grads(const udalab::nnkit::UdaModel& model,
                                  const udalab::nnkit::UdaGrads& grads,
                                  udalab::nnkit::Phase phase);

/// Max relative error between the analytic phase gradient and central
/// differences of step_loss (denominator max(|a|,|b|,1e-6)).
double fd_max_rel_error(udalab::nnkit::UdaModel& model, udalab::nnkit::Phase phase,
                        const udalab::nnkit::StepBatch& batch, double adv_weight, double h = 1e-5);

}  // namespace oracles
