#pragma once

// Experiment driver: data loading or synthesis, incomplete masks, method
// runs, metrics and report files.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "daimc/dataset.hpp"
#include "daimc/factorization.hpp"

namespace daimc::harness {

enum class Method { daimc, seminmf_concat, seminmf_fill };

const char* to_string(Method m);
Method method_from_string(const std::string& name);

struct DataSource {
  std::optional<std::filesystem::path> manifest;
  std::optional<data::SynthSpec> synth;
};

struct ExperimentConfig {
  DataSource data;
  std::vector<double> rates{0.0};
  std::vector<double> alphas{1e1};
  std::vector<double> betas{1e0};
  std::vector<std::uint64_t> seeds{0};
  std::vector<Method> methods{Method::daimc};
  /// Subspace dimension; defaults to the number of distinct labels.
  std::optional<Eigen::Index> k;
  /// View-number study: run on the first n views for every n listed. Empty
  /// means all views.
  std::vector<Eigen::Index> view_counts;
  /// Tolerances and budgets; alpha, beta, k and seed are set per cell.
  model::Hyperparams fit;
  int kmeans_restarts = 20;
  int workers = 1;
};

/// Throws InvalidInput on empty lists, rates outside [0, 0.5] or a missing
/// data source.
void validate(const ExperimentConfig& cfg);

/// `base` resolves relative manifest paths.
ExperimentConfig config_from_json(const nlohmann::json& j,
                                  const std::filesystem::path& base = {});
nlohmann::json to_json(const ExperimentConfig& cfg);

data::SynthSpec synth_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const data::SynthSpec& spec);

struct CellRecord {
  Method method = Method::daimc;
  Eigen::Index n_views = 0;
  double rate = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;

  bool ok = false;
  std::string stage;  // failing stage when !ok
  std::string error;

  double nmi = 0.0;
  double ac = 0.0;
  bool has_metrics = false;
  double objective = 0.0;
  int iterations = 0;
  double wall_seconds = 0.0;
  Eigen::Index n_evaluated = 0;  // instances that were clustered
  std::vector<double> trace;
};

struct Aggregate {
  Method method = Method::daimc;
  Eigen::Index n_views = 0;
  double rate = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  int count = 0;  // successful cells
  double nmi_mean = 0.0;
  double nmi_std = 0.0;
  double ac_mean = 0.0;
  double ac_std = 0.0;
};

struct RunReport {
  std::vector<CellRecord> records;
  std::vector<Aggregate> aggregates;
  /// Set when the whole run failed before any cell could start.
  std::optional<std::string> failed_stage;
  std::optional<std::string> error;
};

/// Stage-tagged failure raised by the pipeline.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& msg)
      : std::runtime_error(msg), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Loads the manifest or synthesizes the data. Throws StageError tagged
/// "load_manifest" or "synth".
data::MultiViewDataset load_source(const DataSource& src);

/// Stacks all views after replacing each missing column by the per-feature
/// mean of that view's present columns.
Matrix fill_and_concatenate(const data::MultiViewDataset& ds);

/// Stacks all views over the instances present in every view. Returns the
/// matrix and the kept instance indices.
std::pair<Matrix, std::vector<Eigen::Index>> concatenate_complete(const data::MultiViewDataset& ds);

struct CellOutput {
  CellRecord record;
  std::optional<model::FactorizationState> daimc_state;
  std::optional<Matrix> latent;  // baselines
  std::optional<Matrix> basis;   // baselines
  std::vector<int> assignments;
};

/// Runs one method on an already masked dataset. Never throws for pipeline
/// failures; they are recorded in the returned record.
CellOutput run_cell(const data::MultiViewDataset& masked, Method method, double alpha,
                    double beta, std::uint64_t seed, const ExperimentConfig& cfg);

/// Full Cartesian sweep. Each (rate, seed) mask is shared by every method and
/// hyper-parameter pair. Records are sorted by configuration tuple.
RunReport sweep(const ExperimentConfig& cfg);

std::vector<Aggregate> aggregate(const std::vector<CellRecord>& records);

/// report.csv: one measurement per row. Wall-clock time is left out so the
/// file is reproducible byte for byte.
std::string report_csv(const RunReport& report);
nlohmann::json report_json(const RunReport& report, const ExperimentConfig& cfg);
void write_report(const RunReport& report, const ExperimentConfig& cfg,
                  const std::filesystem::path& dir);

/// factors/ directory: per-matrix CSV files plus factors.json (shapes,
/// hyperparameters, objective traces).
void write_factors(const model::FactorizationState& st, const model::Hyperparams& hp,
                   const std::filesystem::path& dir);

/// Single configuration run (every list must hold exactly one element).
/// Writes report.csv, report.json and factors/ under `out`.
RunReport run_single(const ExperimentConfig& cfg, const std::filesystem::path& out);

/// Writes synth_planted(spec) as a manifest directory; returns the manifest
/// path.
std::filesystem::path synth_to_disk(const data::SynthSpec& spec, const std::filesystem::path& out);

/// Shortest round-trip decimal form of x.
std::string format_double(double x);

}  // namespace daimc::harness
