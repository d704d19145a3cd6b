#include "udalab/casesolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "udalab/parallel.hpp"
#include "udalab/rng.hpp"

namespace udalab::casesolver {

using domains::LinearUdaModel;
using domains::MixtureDomain;
using domains::MixtureDomainPair;
using domains::Vec2;

namespace {
MixtureDomainPair pair_of(const Vec2& sp, const Vec2& sn, const Vec2& tp, const Vec2& tn,
                          const Vec2& vs, const Vec2& vt) {
  return MixtureDomainPair{MixtureDomain::make(sp, sn, 1.0, vs),
                           MixtureDomain::make(tp, tn, 1.0, vt)};
}
}  // namespace

CaseConfig CaseConfig::case1() {
  return CaseConfig{pair_of({-1, 1}, {-1, -1}, {1, 1}, {1, -1}, {0, 1}, {0, 1}), 1e-1, 10.0};
}

CaseConfig CaseConfig::case2() {
  return CaseConfig{pair_of({-1, 1}, {-1, -1}, {1, -1}, {1, 1}, {0, 1}, {0, -1}), 1e-1, 10.0};
}

CaseConfig CaseConfig::case3() {
  return CaseConfig{pair_of({0, 1}, {0, -1}, {-1, 0}, {1, 0}, {0, 1}, {-1, 0}), 1e-2, 10.0};
}

CaseConfig CaseConfig::preset(int id) {
  switch (id) {
    case 1: return case1();
    case 2: return case2();
    case 3: return case3();
    default: throw std::invalid_argument("CaseConfig::preset: id must be 1, 2 or 3");
  }
}

void SimplexConfig::validate() const {
  if (!(reflection > 0.0) || !(expansion > 1.0) || !(contraction > 0.0) ||
      !(contraction < 1.0) || !(shrink > 0.0) || !(shrink < 1.0))
    throw std::invalid_argument("SimplexConfig: coefficient out of range");
  if (max_iters < 1) throw std::invalid_argument("SimplexConfig: max_iters must be >= 1");
}

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          const std::vector<double>& x0, const SimplexConfig& cfg) {
  cfg.validate();
  const std::size_t n = x0.size();
  if (n == 0) throw std::invalid_argument("nelder_mead: empty x0");

  std::vector<std::vector<double>> xs(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) xs[i + 1][i] += 0.05;
  std::vector<double> fs(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fs[i] = f(xs[i]);

  std::vector<std::size_t> order(n + 1);
  SimplexResult result;

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[n - 1];

    double diameter = 0.0;
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        diameter = std::max(diameter, std::abs(xs[i][j] - xs[best][j]));
    const double spread = fs[worst] - fs[best];
    if (diameter < cfg.x_tol || spread < cfg.f_tol) {
      result.converged = true;
      result.iterations = iter;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < n; ++j) centroid[j] += xs[i][j];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    auto along = [&](double t) {
      std::vector<double> p(n);
      for (std::size_t j = 0; j < n; ++j) p[j] = centroid[j] + t * (centroid[j] - xs[worst][j]);
      return p;
    };

    const std::vector<double> xr = along(cfg.reflection);
    const double fr = f(xr);

    if (fr < fs[best]) {
      const std::vector<double> xe = along(cfg.reflection * cfg.expansion);
      const double fe = f(xe);
      if (fe < fr) {
        xs[worst] = xe;
        fs[worst] = fe;
      } else {
        xs[worst] = xr;
        fs[worst] = fr;
      }
    } else if (fr < fs[second_worst]) {
      xs[worst] = xr;
      fs[worst] = fr;
    } else {
      bool shrink_step = true;
      if (fr < fs[worst]) {
        const std::vector<double> xc = along(cfg.reflection * cfg.contraction);
        const double fc = f(xc);
        if (fc <= fr) {
          xs[worst] = xc;
          fs[worst] = fc;
          shrink_step = false;
        }
      } else {
        const std::vector<double> xc = along(-cfg.contraction);
        const double fc = f(xc);
        if (fc < fs[worst]) {
          xs[worst] = xc;
          fs[worst] = fc;
          shrink_step = false;
        }
      }
      if (shrink_step) {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t j = 0; j < n; ++j)
            xs[i][j] = xs[best][j] + cfg.shrink * (xs[i][j] - xs[best][j]);
          fs[i] = f(xs[i]);
        }
      }
    }
    result.iterations = iter + 1;
  }

  const std::size_t arg_best =
      std::min_element(fs.begin(), fs.end()) - fs.begin();
  result.x = xs[arg_best];
  result.fx = fs[arg_best];
  return result;
}

double objective(const LinearUdaModel& model, const CaseConfig& cfg,
                 const measures::QuadratureSpec& spec) {
  const double es = measures::sq_source_loss(model, cfg.pair.source, model.u, spec);
  const auto ps = domains::project_domain(cfg.pair.source, model.u);
  const auto pt = domains::project_domain(cfg.pair.target, model.u);
  const double d = measures::sq_density_mismatch(ps, pt, spec);
  const double excess = model.u.squaredNorm() - 1.0;
  return es + cfg.lambda * d + cfg.eta * excess * excess;
}

CaseReport run_case(const CaseConfig& cfg, int restarts, std::uint64_t seed,
                    const measures::QuadratureSpec& spec, const SimplexConfig& simplex,
                    int threads) {
  if (restarts < 1) throw std::invalid_argument("run_case: restarts must be >= 1");
  if (!(cfg.lambda > 0.0) || !(cfg.eta > 0.0))
    throw std::invalid_argument("run_case: lambda and eta must be > 0");

  // Out-of-range or non-finite evaluations act as an infinite barrier so the
  // simplex backs off instead of aborting the restart.
  auto guarded = [&](const std::vector<double>& x) {
    const LinearUdaModel m{Vec2(x[0], x[1]), x[2], x[3]};
    try {
      return objective(m, cfg, spec);
    } catch (const RangeCoverageError&) {
      return std::numeric_limits<double>::infinity();
    } catch (const NumericFailure&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  struct Slot {
    SimplexResult sim;
    RestartOutcome out;
  };
  std::vector<Slot> slots(restarts);

  parallel::parallel_for(
      restarts,
      [&](int r) {
        rng::Xoshiro256pp gen(rng::substream(seed, static_cast<std::uint64_t>(r)));
        const double theta = gen.uniform(0.0, 2.0 * M_PI);
        const std::vector<double> x0 = {std::cos(theta), std::sin(theta),
                                        gen.uniform(-1.0, 1.0), gen.uniform(-0.5, 0.5)};
        Slot& slot = slots[r];
        slot.sim = nelder_mead(guarded, x0, simplex);
        const LinearUdaModel m{Vec2(slot.sim.x[0], slot.sim.x[1]), slot.sim.x[2], slot.sim.x[3]};
        const double e_t = measures::abs_error(m, cfg.pair.target, m.u, spec);
        slot.out = RestartOutcome{m.u, e_t,
                                  e_t < kSuccessThreshold ? Outcome::success : Outcome::failure,
                                  slot.sim.fx, slot.sim.converged};
      },
      threads);

  int best = -1;
  bool any_converged = false;
  for (int r = 0; r < restarts; ++r) {
    any_converged = any_converged || slots[r].sim.converged;
    if (best < 0 || slots[r].sim.fx < slots[best].sim.fx) best = r;
  }
  if (!any_converged)
    throw ConvergenceError("run_case: no restart reached the simplex stopping tolerances");

  CaseReport report;
  report.best_params =
      LinearUdaModel{Vec2(slots[best].sim.x[0], slots[best].sim.x[1]), slots[best].sim.x[2],
                     slots[best].sim.x[3]};
  report.objective = slots[best].sim.fx;
  report.bound_report = bounds::evaluate(cfg.pair, report.best_params, spec);
  report.outcome = report.bound_report.measures.e_T_abs < kSuccessThreshold ? Outcome::success
                                                                            : Outcome::failure;
  report.restart_outcomes.reserve(restarts);
  for (const Slot& s : slots) report.restart_outcomes.push_back(s.out);
  return report;
}

}  // namespace udalab::casesolver
