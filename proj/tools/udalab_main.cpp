// udalab command-line tool: analytic case studies, bound evaluation, dataset
// and poison generation, and multi-trial two-moons sweeps. Every command
// writes a RunManifest beside its primary output; re-running the stored argv
// reproduces the outputs byte for byte.
//
// Exit codes: 0 success, 2 usage/config error, 3 convergence failure,
// 4 internal-invariant violation.

#include <cmath>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "udalab/casesolver.hpp"
#include "udalab/manifest.hpp"
#include "udalab/parallel.hpp"
#include "udalab/poison.hpp"
#include "udalab/serialize.hpp"
#include "udalab/version.hpp"

namespace {

using nlohmann::json;
using namespace udalab;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitInvariant = 4;

void emit_manifest(const std::string& command, const std::vector<std::string>& argv,
                   const json& config, std::uint64_t seed,
                   const std::vector<std::string>& outputs) {
  const auto m = manifest::make_manifest(command, argv, config.dump(), seed, outputs);
  manifest::write_manifest(m, outputs.front() + ".manifest.json");
}

nnkit::UdaMethod parse_method(const std::string& name) {
  if (name == "source") return nnkit::UdaMethod::SourceOnly;
  if (name == "dann") return nnkit::UdaMethod::Dann;
  if (name == "cdan") return nnkit::UdaMethod::Cdan;
  if (name == "mcd") return nnkit::UdaMethod::Mcd;
  throw std::invalid_argument("unknown method: " + name +
                              " (expected source|dann|cdan|mcd)");
}

// ---------------------------------------------------------------------------
// case
// ---------------------------------------------------------------------------

struct CaseArgs {
  int id = 0;
  int restarts = 5;
  std::uint64_t seed = 1;
  double lambda = -1.0;  // <0 keeps the preset value
  int threads = 0;
  std::string out;
};

int run_case_cmd(const CaseArgs& args, const std::vector<std::string>& argv) {
  casesolver::CaseConfig cfg = casesolver::CaseConfig::preset(args.id);
  if (args.lambda > 0.0) cfg.lambda = args.lambda;

  const json config{{"id", args.id},        {"restarts", args.restarts}, {"seed", args.seed},
                    {"lambda", cfg.lambda}, {"eta", cfg.eta},            {"out", args.out}};

  casesolver::CaseReport report;
  try {
    report = casesolver::run_case(cfg, args.restarts, args.seed,
                                  measures::QuadratureSpec::default_spec(), {}, args.threads);
  } catch (const ConvergenceError& e) {
    std::cerr << "case: " << e.what() << "\n";
    return kExitNoConvergence;
  }

  serialize::write_file(args.out, serialize::case_report_to_json(report));
  emit_manifest("case", argv, config, args.seed, {args.out});
  return kExitOk;
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

struct BoundsArgs {
  std::string config_path;
  std::string out;
};

int run_bounds_cmd(const BoundsArgs& args, const std::vector<std::string>& argv) {
  const auto cfg = serialize::bounds_config_from_json(serialize::read_file(args.config_path));
  const auto report =
      bounds::evaluate(cfg.pair, cfg.model, measures::QuadratureSpec::default_spec());
  serialize::write_file(args.out, serialize::bound_report_to_json(report));

  const json config{{"config", json::parse(serialize::bounds_config_to_json(cfg))},
                    {"out", args.out}};
  emit_manifest("bounds", argv, config, 0, {args.out});

  if (!report.lb_le_eT || !report.eT_le_ub || !report.sandwich_ok) {
    std::cerr << "bounds: inequality check failed; this signals a bug\n";
    return kExitInvariant;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// gen-moons / gen-mixture
// ---------------------------------------------------------------------------

struct GenMoonsArgs {
  int n = 500;
  double noise = 0.1;
  double shift = 0.5;
  std::uint64_t seed = 0;
  std::string out_source;
  std::string out_target;
};

int run_gen_moons(const GenMoonsArgs& args, const std::vector<std::string>& argv) {
  datagen::MoonsConfig cfg{args.n, args.noise, args.shift, args.seed};
  const auto [source, target] = datagen::gen_two_moons(cfg);
  serialize::write_file(args.out_source, serialize::dataset_to_csv(source));
  serialize::write_file(args.out_target, serialize::dataset_to_csv(target));

  const json config{{"n_per_domain", args.n},       {"noise_sigma", args.noise},
                    {"shift", args.shift},          {"seed", args.seed},
                    {"out_source", args.out_source}, {"out_target", args.out_target}};
  emit_manifest("gen-moons", argv, config, args.seed, {args.out_source, args.out_target});
  return kExitOk;
}

struct GenMixtureArgs {
  std::vector<double> mu_pos{-1.0, 1.0};
  std::vector<double> mu_neg{-1.0, -1.0};
  double sigma = 1.0;
  std::vector<double> label_normal{0.0, 1.0};
  int n = 500;
  std::uint64_t seed = 0;
  std::string tag = "source";
  std::string out;
};

int run_gen_mixture(const GenMixtureArgs& args, const std::vector<std::string>& argv) {
  const auto domain = domains::MixtureDomain::make(
      {args.mu_pos[0], args.mu_pos[1]}, {args.mu_neg[0], args.mu_neg[1]}, args.sigma,
      {args.label_normal[0], args.label_normal[1]});
  const auto tag = args.tag == "target" ? datagen::DomainTag::target : datagen::DomainTag::source;
  const auto data = datagen::gen_mixture_samples(domain, args.n, args.seed, tag);
  serialize::write_file(args.out, serialize::dataset_to_csv(data));

  const json config{{"mu_pos", args.mu_pos}, {"mu_neg", args.mu_neg},
                    {"sigma", args.sigma},   {"label_normal", args.label_normal},
                    {"n", args.n},           {"seed", args.seed},
                    {"tag", args.tag},       {"out", args.out}};
  emit_manifest("gen-mixture", argv, config, args.seed, {args.out});
  return kExitOk;
}

// ---------------------------------------------------------------------------
// poison
// ---------------------------------------------------------------------------

struct PoisonCommonArgs {
  std::string source_path;
  std::string target_path;
  std::uint64_t seed = 0;
  std::string out;
  std::string scheme = "next";
  int ref_epochs = 50;  // reference model for the nearest scheme
};

poison::LabelScheme parse_scheme(const std::string& s) {
  if (s == "next") return poison::LabelScheme::next_class;
  if (s == "nearest") return poison::LabelScheme::nearest_incorrect_class;
  throw std::invalid_argument("unknown scheme: " + s + " (expected next|nearest)");
}

// Clean-source-trained representation for the nearest-incorrect-class scheme.
nnkit::UdaModel train_reference(const datagen::Dataset& source, const datagen::Dataset& target,
                                int epochs, std::uint64_t seed) {
  nnkit::TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.seed = rng::substream(seed, 77);
  return nnkit::train_uda(nnkit::UdaMethod::SourceOnly, source, target, cfg).model;
}

struct WrongLabelArgs {
  PoisonCommonArgs common;
  std::string from = "target";
  double fraction = 0.10;
};

int run_poison_wrong_label(const WrongLabelArgs& args, const std::vector<std::string>& argv) {
  const auto source = serialize::dataset_from_csv(serialize::read_file(args.common.source_path));
  const auto target = serialize::dataset_from_csv(serialize::read_file(args.common.target_path));

  poison::WrongLabelSpec spec;
  spec.sample_from =
      args.from == "source" ? poison::SampleFrom::source : poison::SampleFrom::target;
  spec.fraction = args.fraction;
  spec.scheme = parse_scheme(args.common.scheme);

  nnkit::UdaModel reference;
  const nnkit::UdaModel* ref_ptr = nullptr;
  if (spec.scheme == poison::LabelScheme::nearest_incorrect_class) {
    reference = train_reference(source, target, args.common.ref_epochs, args.common.seed);
    ref_ptr = &reference;
  }

  const auto poisons =
      poison::make_wrong_label_poison(source, target, spec, args.common.seed, ref_ptr);
  serialize::write_file(args.common.out, serialize::dataset_to_csv(poisons));

  const json config{{"attack", "wrong-label"},     {"from", args.from},
                    {"fraction", args.fraction},   {"scheme", args.common.scheme},
                    {"source", args.common.source_path}, {"target", args.common.target_path},
                    {"seed", args.common.seed},    {"out", args.common.out}};
  emit_manifest("poison", argv, config, args.common.seed, {args.common.out});
  return kExitOk;
}

struct WatermarkArgs {
  PoisonCommonArgs common;
  double alpha = 0.3;
  double fraction = 0.10;
};

int run_poison_watermark(const WatermarkArgs& args, const std::vector<std::string>& argv) {
  const auto source = serialize::dataset_from_csv(serialize::read_file(args.common.source_path));
  const auto target = serialize::dataset_from_csv(serialize::read_file(args.common.target_path));

  poison::WatermarkSpec spec;
  spec.alpha = args.alpha;
  spec.fraction = args.fraction;
  spec.scheme = parse_scheme(args.common.scheme);

  nnkit::UdaModel reference;
  const nnkit::UdaModel* ref_ptr = nullptr;
  if (spec.scheme == poison::LabelScheme::nearest_incorrect_class) {
    reference = train_reference(source, target, args.common.ref_epochs, args.common.seed);
    ref_ptr = &reference;
  }

  std::vector<int> skipped;
  const auto poisons =
      poison::make_watermark_poison(source, target, spec, args.common.seed, ref_ptr, &skipped);
  if (!skipped.empty())
    std::cerr << "poison watermark: skipped " << skipped.size()
              << " target samples without a same-class base\n";
  serialize::write_file(args.common.out, serialize::dataset_to_csv(poisons));

  const json config{{"attack", "watermark"},     {"alpha", args.alpha},
                    {"fraction", args.fraction}, {"scheme", args.common.scheme},
                    {"source", args.common.source_path}, {"target", args.common.target_path},
                    {"seed", args.common.seed},  {"out", args.common.out}};
  emit_manifest("poison", argv, config, args.common.seed, {args.common.out});
  return kExitOk;
}

struct CleanLabelArgs {
  PoisonCommonArgs common;
  double eps = 0.1;
  std::string norm = "linf";
  int n_poison = 0;  // 0 derives the count from budget_fraction
  double budget_fraction = 0.01;
  std::string base_from = "target";
  int test_index = 0;
  int outer_iters = 100;
  double attacker_step = 0.05;
  std::vector<int> reinit_points;
  std::string victim = "dann";
  int epochs = 100;
  std::string trace_path;
};

int run_poison_clean_label(const CleanLabelArgs& args, const std::vector<std::string>& argv) {
  const auto source = serialize::dataset_from_csv(serialize::read_file(args.common.source_path));
  const auto target = serialize::dataset_from_csv(serialize::read_file(args.common.target_path));

  poison::CleanLabelSpec spec;
  spec.eps = args.eps;
  spec.norm = args.norm == "l2" ? poison::Norm::l2 : poison::Norm::l_inf;
  spec.n_poison = args.n_poison > 0
                      ? args.n_poison
                      : std::max(1, static_cast<int>(std::llround(args.budget_fraction *
                                                                  target.size())));
  spec.base_from =
      args.base_from == "source" ? poison::SampleFrom::source : poison::SampleFrom::target;
  spec.target_test_index = args.test_index;
  spec.outer_iters = args.outer_iters;
  spec.attacker_step = args.attacker_step;
  spec.reinit_points = args.reinit_points.empty()
                           ? poison::CleanLabelSpec::default_reinit_points(args.outer_iters)
                           : args.reinit_points;

  nnkit::TrainConfig cfg;
  cfg.epochs = args.epochs;
  const auto [poisons, trace] = poison::clean_label_alternate(
      spec, parse_method(args.victim), source, target, cfg, args.common.seed);

  serialize::write_file(args.common.out, serialize::dataset_to_csv(poisons));
  std::vector<std::string> outputs{args.common.out};
  if (!args.trace_path.empty()) {
    serialize::write_file(args.trace_path, serialize::clean_label_trace_to_json(trace));
    outputs.push_back(args.trace_path);
  }

  const json config{{"attack", "clean-label"},
                    {"eps", args.eps},
                    {"norm", args.norm},
                    {"n_poison", spec.n_poison},
                    {"base_from", args.base_from},
                    {"test_index", args.test_index},
                    {"outer_iters", args.outer_iters},
                    {"attacker_step", args.attacker_step},
                    {"reinit_points", spec.reinit_points},
                    {"victim", args.victim},
                    {"epochs", args.epochs},
                    {"source", args.common.source_path},
                    {"target", args.common.target_path},
                    {"seed", args.common.seed},
                    {"out", args.common.out}};
  emit_manifest("poison", argv, config, args.common.seed, outputs);
  if (trace.failed) std::cerr << "poison clean-label: victim training diverged; partial trace\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// moons-sweep
// ---------------------------------------------------------------------------

struct SweepArgs {
  std::vector<std::string> methods{"source", "dann", "cdan", "mcd"};
  std::vector<double> shifts{0.25, 0.5, 0.75};
  std::string attack = "wrong-label-target";
  std::vector<double> fractions{0.0, 0.05, 0.10};
  int trials = 5;
  std::uint64_t seed = 0;
  int n_per_domain = 500;
  double noise = 0.1;
  double alpha = 0.3;  // watermark only
  int epochs = 200;
  int batch_size = 64;
  double learning_rate = 0.05;
  int threads = 0;
  std::string out;
};

struct SweepRow {
  std::string method;
  double shift = 0.0;
  double fraction = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  double source_accuracy = 0.0;
  double target_accuracy = 0.0;
  bool diverged = false;
};

int run_moons_sweep(const SweepArgs& args, const std::vector<std::string>& argv) {
  if (args.trials < 1) throw std::invalid_argument("moons-sweep: trials must be >= 1");
  if (args.attack != "wrong-label-target" && args.attack != "wrong-label-source" &&
      args.attack != "watermark")
    throw std::invalid_argument("moons-sweep: unknown attack " + args.attack);
  for (const auto& m : args.methods) parse_method(m);

  const int n_methods = static_cast<int>(args.methods.size());
  const int n_shifts = static_cast<int>(args.shifts.size());
  const int n_fracs = static_cast<int>(args.fractions.size());
  const int total = n_methods * n_shifts * n_fracs * args.trials;

  std::vector<SweepRow> rows(total);

  parallel::parallel_for(
      total,
      [&](int idx) {
        int rest = idx;
        const int trial = rest % args.trials;
        rest /= args.trials;
        const int fi = rest % n_fracs;
        rest /= n_fracs;
        const int si = rest % n_shifts;
        rest /= n_shifts;
        const int mi = rest;

        const std::string& method = args.methods[mi];
        const double shift = args.shifts[si];
        const double fraction = args.fractions[fi];

        SweepRow& row = rows[idx];
        row.method = method;
        row.shift = shift;
        row.fraction = fraction;
        row.trial = trial;
        row.seed = manifest::derive_run_seed(args.seed, method, shift, fraction, trial);

        // Datasets are shared across methods and fractions within a trial so
        // clean-vs-poisoned comparisons are paired.
        datagen::MoonsConfig mc{args.n_per_domain, args.noise, shift,
                                manifest::derive_stream_seed(args.seed, "data", shift, 0.0, trial)};
        const auto [source, target] = datagen::gen_two_moons(mc);

        datagen::Dataset train_source = source;
        if (fraction > 0.0) {
          const std::uint64_t pseed =
              manifest::derive_stream_seed(args.seed, "poison", shift, fraction, trial);
          datagen::Dataset poisons;
          if (args.attack == "watermark") {
            poison::WatermarkSpec spec;
            spec.alpha = args.alpha;
            spec.fraction = fraction;
            poisons = poison::make_watermark_poison(source, target, spec, pseed);
          } else {
            poison::WrongLabelSpec spec;
            spec.sample_from = args.attack == "wrong-label-source" ? poison::SampleFrom::source
                                                                   : poison::SampleFrom::target;
            spec.fraction = fraction;
            poisons = poison::make_wrong_label_poison(source, target, spec, pseed);
          }
          for (const auto& s : poisons.samples) train_source.samples.push_back(s);
        }

        nnkit::TrainConfig cfg;
        cfg.epochs = args.epochs;
        cfg.batch_size = args.batch_size;
        cfg.learning_rate = args.learning_rate;
        cfg.seed = row.seed;

        try {
          const auto report =
              nnkit::train_uda(parse_method(method), train_source, target, cfg);
          row.source_accuracy = nnkit::evaluate(report.model, source);
          row.target_accuracy = nnkit::evaluate(report.model, target);
        } catch (const nnkit::TrainingDiverged&) {
          row.diverged = true;
          row.source_accuracy = std::nan("");
          row.target_accuracy = std::nan("");
        }
      },
      args.threads);

  std::string csv = "method,shift,attack,fraction,trial,seed,source_accuracy,target_accuracy,diverged\n";
  for (const auto& r : rows) {
    csv += r.method;
    csv += ',';
    csv += serialize::format_double(r.shift);
    csv += ',';
    csv += args.attack;
    csv += ',';
    csv += serialize::format_double(r.fraction);
    csv += ',';
    csv += std::to_string(r.trial);
    csv += ',';
    csv += std::to_string(r.seed);
    csv += ',';
    csv += serialize::format_double(r.source_accuracy);
    csv += ',';
    csv += serialize::format_double(r.target_accuracy);
    csv += ',';
    csv += r.diverged ? '1' : '0';
    csv += '\n';
  }

  // Aggregate block: mean and sample sd per cell, diverged runs excluded.
  csv += "\nstat,method,shift,attack,fraction,source_accuracy,target_accuracy\n";
  int warnings = 0;
  for (int mi = 0; mi < n_methods; ++mi)
    for (int si = 0; si < n_shifts; ++si)
      for (int fi = 0; fi < n_fracs; ++fi) {
        double s_sum = 0, t_sum = 0, s_sq = 0, t_sq = 0;
        int n = 0;
        for (int trial = 0; trial < args.trials; ++trial) {
          const int idx = ((mi * n_shifts + si) * n_fracs + fi) * args.trials + trial;
          if (rows[idx].diverged) {
            ++warnings;
            continue;
          }
          s_sum += rows[idx].source_accuracy;
          t_sum += rows[idx].target_accuracy;
          s_sq += rows[idx].source_accuracy * rows[idx].source_accuracy;
          t_sq += rows[idx].target_accuracy * rows[idx].target_accuracy;
          ++n;
        }
        const double s_mean = n > 0 ? s_sum / n : std::nan("");
        const double t_mean = n > 0 ? t_sum / n : std::nan("");
        const double s_sd = n > 1 ? std::sqrt((s_sq - n * s_mean * s_mean) / (n - 1)) : 0.0;
        const double t_sd = n > 1 ? std::sqrt((t_sq - n * t_mean * t_mean) / (n - 1)) : 0.0;
        for (const char* stat : {"mean", "sd"}) {
          csv += stat;
          csv += ',';
          csv += args.methods[mi];
          csv += ',';
          csv += serialize::format_double(args.shifts[si]);
          csv += ',';
          csv += args.attack;
          csv += ',';
          csv += serialize::format_double(args.fractions[fi]);
          csv += ',';
          csv += serialize::format_double(std::string(stat) == "mean" ? s_mean : s_sd);
          csv += ',';
          csv += serialize::format_double(std::string(stat) == "mean" ? t_mean : t_sd);
          csv += '\n';
        }
      }

  serialize::write_file(args.out, csv);

  const json config{{"methods", args.methods},   {"shifts", args.shifts},
                    {"attack", args.attack},     {"fractions", args.fractions},
                    {"trials", args.trials},     {"seed", args.seed},
                    {"n_per_domain", args.n_per_domain}, {"noise", args.noise},
                    {"alpha", args.alpha},       {"epochs", args.epochs},
                    {"batch_size", args.batch_size},     {"learning_rate", args.learning_rate},
                    {"out", args.out}};
  emit_manifest("moons-sweep", argv, config, args.seed, {args.out});
  if (warnings > 0)
    std::cerr << "moons-sweep: " << warnings << " run(s) diverged; rows flagged\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"udalab: lower-bound diagnostics and poisoning attacks for UDA"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  const std::vector<std::string> full_argv(argv, argv + argc);

  CaseArgs case_args;
  auto* case_cmd = app.add_subcommand("case", "Run an analytic case study (1, 2 or 3)");
  case_cmd->add_option("--id", case_args.id, "Case id")->required()->check(CLI::Range(1, 3));
  case_cmd->add_option("--restarts", case_args.restarts)->check(CLI::PositiveNumber);
  case_cmd->add_option("--seed", case_args.seed);
  case_cmd->add_option("--lambda", case_args.lambda, "Override the preset mismatch weight");
  case_cmd->add_option("--threads", case_args.threads);
  case_cmd->add_option("--out", case_args.out, "Report JSON path")->required();

  BoundsArgs bounds_args;
  auto* bounds_cmd = app.add_subcommand("bounds", "Evaluate the bounds for a configuration");
  bounds_cmd->add_option("--config", bounds_args.config_path)->required();
  bounds_cmd->add_option("--out", bounds_args.out)->required();

  GenMoonsArgs moons_args;
  auto* moons_cmd = app.add_subcommand("gen-moons", "Generate a two-moons source/target pair");
  moons_cmd->add_option("--n", moons_args.n, "Samples per domain");
  moons_cmd->add_option("--noise", moons_args.noise);
  moons_cmd->add_option("--shift", moons_args.shift);
  moons_cmd->add_option("--seed", moons_args.seed);
  moons_cmd->add_option("--out-source", moons_args.out_source)->required();
  moons_cmd->add_option("--out-target", moons_args.out_target)->required();

  GenMixtureArgs mix_args;
  auto* mix_cmd = app.add_subcommand("gen-mixture", "Sample a Gaussian-mixture domain");
  mix_cmd->add_option("--mu-pos", mix_args.mu_pos)->expected(2);
  mix_cmd->add_option("--mu-neg", mix_args.mu_neg)->expected(2);
  mix_cmd->add_option("--sigma", mix_args.sigma);
  mix_cmd->add_option("--label-normal", mix_args.label_normal)->expected(2);
  mix_cmd->add_option("--n", mix_args.n);
  mix_cmd->add_option("--seed", mix_args.seed);
  mix_cmd->add_option("--tag", mix_args.tag)->check(CLI::IsMember({"source", "target"}));
  mix_cmd->add_option("--out", mix_args.out)->required();

  auto* poison_cmd = app.add_subcommand("poison", "Generate a poisoned dataset");
  poison_cmd->require_subcommand(1);

  auto add_common = [](CLI::App* cmd, PoisonCommonArgs& c) {
    cmd->add_option("--source", c.source_path, "Source dataset CSV")->required();
    cmd->add_option("--target", c.target_path, "Target dataset CSV")->required();
    cmd->add_option("--seed", c.seed);
    cmd->add_option("--out", c.out, "Poison CSV path")->required();
    cmd->add_option("--scheme", c.scheme)->check(CLI::IsMember({"next", "nearest"}));
    cmd->add_option("--ref-epochs", c.ref_epochs);
  };

  WrongLabelArgs wl_args;
  auto* wl_cmd = poison_cmd->add_subcommand("wrong-label", "Mislabeled-sample poisoning");
  add_common(wl_cmd, wl_args.common);
  wl_cmd->add_option("--from", wl_args.from)->check(CLI::IsMember({"source", "target"}));
  wl_cmd->add_option("--fraction", wl_args.fraction)->check(CLI::Range(0.0, 1.0));

  WatermarkArgs wm_args;
  auto* wm_cmd = poison_cmd->add_subcommand("watermark", "Convex-combination poisoning");
  add_common(wm_cmd, wm_args.common);
  wm_cmd->add_option("--alpha", wm_args.alpha)->check(CLI::Range(0.0, 1.0));
  wm_cmd->add_option("--fraction", wm_args.fraction)->check(CLI::Range(0.0, 1.0));

  CleanLabelArgs cl_args;
  auto* cl_cmd = poison_cmd->add_subcommand("clean-label", "Alternating clean-label poisoning");
  add_common(cl_cmd, cl_args.common);
  cl_cmd->add_option("--eps", cl_args.eps);
  cl_cmd->add_option("--norm", cl_args.norm)->check(CLI::IsMember({"linf", "l2"}));
  cl_cmd->add_option("--n-poison", cl_args.n_poison);
  cl_cmd->add_option("--budget-fraction", cl_args.budget_fraction);
  cl_cmd->add_option("--base-from", cl_args.base_from)
      ->check(CLI::IsMember({"source", "target"}));
  cl_cmd->add_option("--test-index", cl_args.test_index)->required();
  cl_cmd->add_option("--outer-iters", cl_args.outer_iters);
  cl_cmd->add_option("--attacker-step", cl_args.attacker_step);
  cl_cmd->add_option("--reinit", cl_args.reinit_points, "Victim re-init iterations");
  cl_cmd->add_option("--victim", cl_args.victim)
      ->check(CLI::IsMember({"source", "dann", "cdan", "mcd"}));
  cl_cmd->add_option("--epochs", cl_args.epochs, "Victim epochs for retraining ramp");
  cl_cmd->add_option("--trace", cl_args.trace_path, "Attack trace JSON path");

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("moons-sweep", "Two-moons method/shift/fraction sweep");
  sweep_cmd->add_option("--methods", sweep_args.methods)->delimiter(',');
  sweep_cmd->add_option("--shifts", sweep_args.shifts)->delimiter(',');
  sweep_cmd->add_option("--attack", sweep_args.attack)
      ->check(CLI::IsMember({"wrong-label-target", "wrong-label-source", "watermark"}));
  sweep_cmd->add_option("--fractions", sweep_args.fractions)->delimiter(',');
  sweep_cmd->add_option("--trials", sweep_args.trials)->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--seed", sweep_args.seed);
  sweep_cmd->add_option("--n-per-domain", sweep_args.n_per_domain);
  sweep_cmd->add_option("--noise", sweep_args.noise);
  sweep_cmd->add_option("--alpha", sweep_args.alpha, "Watermark blend weight");
  sweep_cmd->add_option("--epochs", sweep_args.epochs);
  sweep_cmd->add_option("--batch-size", sweep_args.batch_size);
  sweep_cmd->add_option("--lr", sweep_args.learning_rate);
  sweep_cmd->add_option("--threads", sweep_args.threads);
  sweep_cmd->add_option("--out", sweep_args.out, "Rows CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*case_cmd) return run_case_cmd(case_args, full_argv);
    if (*bounds_cmd) return run_bounds_cmd(bounds_args, full_argv);
    if (*moons_cmd) return run_gen_moons(moons_args, full_argv);
    if (*mix_cmd) return run_gen_mixture(mix_args, full_argv);
    if (*wl_cmd) return run_poison_wrong_label(wl_args, full_argv);
    if (*wm_cmd) return run_poison_watermark(wm_args, full_argv);
    if (*cl_cmd) return run_poison_clean_label(cl_args, full_argv);
    if (*sweep_cmd) return run_moons_sweep(sweep_args, full_argv);
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNoConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
