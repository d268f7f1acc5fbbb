// Copyright 2026 The attndrop Authors
// SPDX-License-Identifier: Apache-2.0

// attndrop: kernel precomputation, training runs, grid ablations and the
// generalization-bound calculator.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "attndrop/ablation.hpp"
#include "attndrop/errors.hpp"
#include "attndrop/kernel_table.hpp"
#include "attndrop/run_io.hpp"
#include "attndrop/theory.hpp"

namespace {

using namespace attndrop;
using nlohmann::ordered_json;

enum ExitCode { kOk = 0, kConfigFailure = 1, kDomainFailure = 2, kIoFailure = 3 };

RunConfig load_or_default(const std::string& path) {
  if (path.empty()) {
    RunConfig c;
    c.validate();
    return c;
  }
  return load_run_config(path);
}

void apply_seed(RunConfig& cfg, const std::optional<std::uint64_t>& seed) {
  if (!seed) return;
  cfg.model.seed = *seed;
  cfg.drop.seed = *seed;
}

struct KernelArgs {
  std::size_t w = 5;
  double sigma_max = 0.5;
  std::size_t steps = 50;
  std::string out = "kernels.json";
};

int cmd_precompute(const KernelArgs& a) {
  const auto table = GaussianKernelTable::build(a.w, a.sigma_max, a.steps);
  table.save(a.out);
  std::cout << "wrote " << a.out << " (" << table.steps() << " kernels, w=" << table.width() << ")\n";
  return kOk;
}

struct TrainArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

int cmd_train(const TrainArgs& a) {
  auto cfg = load_or_default(a.config);
  apply_seed(cfg, a.seed);
  if (!a.out.empty()) cfg.output.dir = a.out;
  cfg.validate();
  Trainer trainer(cfg);
  const auto record = trainer.run([&](const EpochRow& r) {
    if (a.quiet) return;
    std::cerr << "epoch " << r.epoch << "  task_loss " << format_double(r.task_loss) << "  val_acc "
              << format_double(r.val_acc) << "  ece " << format_double(r.ece) << "\n";
  });
  write_run_record(record, cfg.output.dir, cfg.output.name);
  std::cout << (std::filesystem::path(cfg.output.dir) / (cfg.output.name + ".csv")).string() << "\n";
  return kOk;
}

struct AblateArgs {
  std::string config;
  std::string out = "ablation";
  std::size_t jobs = 1;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> families;
  std::vector<double> p, sigma_max, lambda;
  std::vector<std::size_t> k;
  std::optional<std::size_t> w;
};

int cmd_ablate(const AblateArgs& a) {
  auto base = load_or_default(a.config);
  if (a.seed) base.drop.seed = *a.seed;
  AblationGrid grid;
  if (!a.p.empty()) grid.p = a.p;
  if (!a.k.empty()) grid.k = a.k;
  if (!a.sigma_max.empty()) grid.sigma_max = a.sigma_max;
  if (!a.lambda.empty()) grid.lambda = a.lambda;
  if (a.w) grid.w = *a.w;
  if (!a.families.empty()) {
    grid.families.clear();
    for (const auto& f : a.families) grid.families.push_back(ablation_family_from_string(f));
  }
  const auto results = run_ablation(base, grid, a.out, a.jobs);
  std::size_t failed = 0;
  for (const auto& r : results) {
    if (!r.ok) {
      ++failed;
      std::cerr << r.cell.name << ": " << r.error << "\n";
    }
  }
  std::cout << results.size() << " cells, " << failed << " failed; summary in "
            << (std::filesystem::path(a.out) / "summary.csv").string() << "\n";
  return kOk;
}

int cmd_theory(const TheoryInputs& in) {
  ordered_json inputs = {{"H", in.heads},           {"n", in.seq_len},
                         {"sigma", in.sigma},       {"N", in.samples},
                         {"delta", in.delta},       {"emp_risk", in.empirical_risk}};
  try {
    in.validate();
    const double kl = kl_gaussian_attention(in.heads, in.seq_len, in.sigma);
    const double radicand = pac_bayes_radicand(in, kl);
    const double bound = pac_bayes_bound(in, kl);
    ordered_json j = {{"inputs", inputs}, {"kl", kl}, {"radicand", radicand}, {"bound", bound}};
    std::cout << j.dump(2) << "\n";
    return kOk;
  } catch (const DomainError& e) {
    ordered_json j = {{"inputs", inputs},
                      {"error", {{"kind", "domain"}, {"message", e.what()}, {"value", e.value()}}}};
    std::cout << j.dump(2) << "\n";
    return kDomainFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"attndrop: attention-logit regularization experiments"};
  app.require_subcommand(1);

  KernelArgs kargs;
  auto* pre = app.add_subcommand("precompute-kernels", "Write the Gaussian kernel table as JSON");
  pre->add_option("--w", kargs.w, "Kernel width (odd)")->capture_default_str();
  pre->add_option("--sigma-max", kargs.sigma_max, "Largest sigma in the table")->capture_default_str();
  pre->add_option("--steps", kargs.steps, "Number of sigma grid points")->capture_default_str();
  pre->add_option("--out", kargs.out, "Output path")->capture_default_str();

  TrainArgs targs;
  auto* train = app.add_subcommand("train", "Run one training job and write <name>.csv / <name>.json");
  train->add_option("--config", targs.config, "Run config JSON (defaults when omitted)");
  train->add_option("--out", targs.out, "Output directory (overrides output.dir)");
  train->add_option("--seed", targs.seed, "Overrides model.seed and drop.seed");
  train->add_flag("--quiet", targs.quiet, "No per-epoch progress on stderr");

  AblateArgs aargs;
  auto* ablate = app.add_subcommand("ablate", "Run the hyperparameter grid");
  ablate->add_option("--config", aargs.config, "Base run config JSON");
  ablate->add_option("--out", aargs.out, "Output directory")->capture_default_str();
  ablate->add_option("--jobs", aargs.jobs, "Cells run concurrently")->capture_default_str()->check(CLI::PositiveNumber);
  ablate->add_option("--seed", aargs.seed, "Base drop seed; cell i uses seed + i");
  ablate->add_option("--family", aargs.families, "Subset of hardmask, blur, consistency")->delimiter(',');
  ablate->add_option("--grid-p", aargs.p, "Hard-mask drop probabilities")->delimiter(',');
  ablate->add_option("--grid-k", aargs.k, "Hard-mask top-k sizes")->delimiter(',');
  ablate->add_option("--grid-sigma-max", aargs.sigma_max, "Blur sigma_max values")->delimiter(',');
  ablate->add_option("--grid-w", aargs.w, "Blur kernel width");
  ablate->add_option("--grid-lambda", aargs.lambda, "Consistency weights")->delimiter(',');

  TheoryInputs tin;
  auto* theory = app.add_subcommand("theory", "Evaluate the KL term and the generalization bound");
  theory->add_option("--H", tin.heads, "Attention heads")->required();
  theory->add_option("--n", tin.seq_len, "Sequence length")->required();
  theory->add_option("--sigma", tin.sigma, "Logit noise stddev")->required();
  theory->add_option("--N", tin.samples, "Training-set size")->required();
  theory->add_option("--delta", tin.delta, "Confidence parameter")->capture_default_str();
  theory->add_option("--emp-risk", tin.empirical_risk, "Empirical risk in [0,1]")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigFailure;
  }

  try {
    if (*pre) return cmd_precompute(kargs);
    if (*train) return cmd_train(targs);
    if (*ablate) return cmd_ablate(aargs);
    if (*theory) return cmd_theory(tin);
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDomainFailure;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigFailure;
  }
  return kOk;
}
