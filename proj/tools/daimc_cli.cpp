// daimc: command-line front end for runs, sweeps and synthetic data.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "daimc/error.hpp"
#include "daimc/harness.hpp"

namespace fs = std::filesystem;
using daimc::harness::ExperimentConfig;
using daimc::harness::Method;

namespace {

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw daimc::IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw daimc::FormatError(path.string() + ": " + e.what());
  }
}

struct RunArgs {
  std::string manifest;
  std::string synth;
  double rate = 0.0;
  double alpha = 1e1;
  double beta = 1e0;
  long k = 0;
  std::uint64_t seed = 0;
  std::string method = "daimc";
  long views = 0;
  int outer_max = 200;
  int inner_max = 50;
  double outer_tol = 1e-6;
  double inner_tol = 1e-5;
  int restarts = 20;
  std::string out;
};

int cmd_run(const RunArgs& a) {
  ExperimentConfig cfg;
  std::optional<std::string> stage_error;
  try {
    if (!a.manifest.empty()) {
      cfg.data.manifest = a.manifest;
    } else {
      try {
        cfg.data.synth = daimc::harness::synth_spec_from_json(read_json(a.synth));
      } catch (const std::exception& e) {
        stage_error = e.what();
      }
    }
    cfg.rates = {a.rate};
    cfg.alphas = {a.alpha};
    cfg.betas = {a.beta};
    cfg.seeds = {a.seed};
    cfg.methods = {daimc::harness::method_from_string(a.method)};
    if (a.k > 0) cfg.k = a.k;
    if (a.views > 0) cfg.view_counts = {a.views};
    cfg.fit.outer_max = a.outer_max;
    cfg.fit.inner_max = a.inner_max;
    cfg.fit.outer_tol = a.outer_tol;
    cfg.fit.inner_tol = a.inner_tol;
    cfg.kmeans_restarts = a.restarts;
  } catch (const std::exception& e) {
    stage_error = e.what();
  }
  if (stage_error) {
    daimc::harness::RunReport report;
    report.failed_stage = a.manifest.empty() ? "synth" : "config";
    report.error = *stage_error;
    daimc::harness::write_report(report, cfg, a.out);
    std::cerr << "daimc run: " << report.failed_stage.value() << ": " << *stage_error << "\n";
    return 1;
  }
  const auto report = daimc::harness::run_single(cfg, a.out);
  if (report.failed_stage) {
    std::cerr << "daimc run: " << *report.failed_stage << ": " << report.error.value_or("") << "\n";
    return 1;
  }
  const auto& r = report.records.front();
  std::cout << "method=" << daimc::harness::to_string(r.method) << " nmi="
            << daimc::harness::format_double(r.nmi) << " ac=" << daimc::harness::format_double(r.ac)
            << " objective=" << daimc::harness::format_double(r.objective)
            << " iterations=" << r.iterations << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out, int workers) {
  ExperimentConfig cfg;
  try {
    cfg = daimc::harness::config_from_json(read_json(config_path), fs::path(config_path).parent_path());
  } catch (const std::exception& e) {
    std::cerr << "daimc sweep: config: " << e.what() << "\n";
    return 2;
  }
  if (workers > 0) cfg.workers = workers;
  const auto report = daimc::harness::sweep(cfg);
  daimc::harness::write_report(report, cfg, out);
  if (report.failed_stage) {
    std::cerr << "daimc sweep: " << *report.failed_stage << ": " << report.error.value_or("") << "\n";
    return 1;
  }
  std::size_t ok = 0;
  for (const auto& r : report.records) ok += r.ok;
  std::cout << ok << "/" << report.records.size() << " cells succeeded, "
            << report.aggregates.size() << " aggregate rows\n";
  return ok == 0 ? 1 : 0;
}

int cmd_synth(const std::string& spec_path, const std::string& out) {
  const auto spec = daimc::harness::synth_spec_from_json(read_json(spec_path));
  const fs::path manifest = daimc::harness::synth_to_disk(spec, out);
  std::cout << manifest.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Incomplete multi-view clustering with doubly aligned semi-NMF"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run one configuration");
  auto* manifest_opt = run_cmd->add_option("--manifest", run.manifest, "Dataset manifest JSON");
  auto* synth_opt = run_cmd->add_option("--synth", run.synth, "Synthetic data spec JSON");
  manifest_opt->excludes(synth_opt);
  run_cmd->add_option("--rate", run.rate, "Incomplete rate in [0, 0.5]");
  run_cmd->add_option("--alpha", run.alpha, "Alignment weight");
  run_cmd->add_option("--beta", run.beta, "L2,1 weight");
  run_cmd->add_option("--k", run.k, "Subspace dimension (default: number of labels)");
  run_cmd->add_option("--seed", run.seed, "Seed for mask, initialization and k-means");
  run_cmd->add_option("--method", run.method, "daimc | seminmf_fill | seminmf_concat");
  run_cmd->add_option("--views", run.views, "Use only the first N views");
  run_cmd->add_option("--outer-max", run.outer_max);
  run_cmd->add_option("--inner-max", run.inner_max);
  run_cmd->add_option("--outer-tol", run.outer_tol);
  run_cmd->add_option("--inner-tol", run.inner_tol);
  run_cmd->add_option("--restarts", run.restarts, "k-means restarts");
  run_cmd->add_option("--out", run.out, "Output directory")->required();

  std::string sweep_config, sweep_out;
  int workers = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a grid of configurations");
  sweep_cmd->add_option("--config", sweep_config, "Experiment config JSON")->required();
  sweep_cmd->add_option("--out", sweep_out, "Output directory")->required();
  sweep_cmd->add_option("--workers", workers, "Parallel cells");

  std::string spec_path, synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Write a planted-cluster dataset");
  synth_cmd->add_option("--spec", spec_path, "Synthetic data spec JSON")->required();
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      if (run.manifest.empty() && run.synth.empty()) {
        std::cerr << "daimc run: one of --manifest or --synth is required\n";
        return 2;
      }
      return cmd_run(run);
    }
    if (*sweep_cmd) return cmd_sweep(sweep_config, sweep_out, workers);
    if (*synth_cmd) return cmd_synth(spec_path, synth_out);
  } catch (const daimc::Error& e) {
    std::cerr << "daimc: " << daimc::to_string(e.kind()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "daimc: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
