#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "daimc/numerics.hpp"

namespace daimc::data {

using Labels = std::vector<int>;

/// n_views x N presence mask. Entry (v, j) is 1 iff instance j is observed in
/// view v.
class IndicatorMatrix {
 public:
  using Storage = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

  IndicatorMatrix() = default;
  /// All-ones mask.
  IndicatorMatrix(Eigen::Index n_views, Eigen::Index n_instances);
  /// Throws InvalidInput if an entry is not 0/1 or an instance is absent from
  /// every view.
  explicit IndicatorMatrix(Storage entries);

  Eigen::Index n_views() const { return m_.rows(); }
  Eigen::Index n_instances() const { return m_.cols(); }
  bool present(Eigen::Index view, Eigen::Index instance) const {
    return m_(view, instance) != 0;
  }
  const Storage& entries() const { return m_; }

  /// Diagonal of W for `view` as a 0/1 vector of length N.
  Vector weights(Eigen::Index view) const;
  Eigen::Index present_count(Eigen::Index view) const;
  std::vector<Eigen::Index> present_instances(Eigen::Index view) const;
  bool complete() const;

  /// Checks every view keeps at least k+1 instances.
  void require_rank_capacity(Eigen::Index k) const;

  friend bool operator==(const IndicatorMatrix& a, const IndicatorMatrix& b) {
    return a.m_ == b.m_;
  }

 private:
  Storage m_;
};

/// Views share the instance (column) axis. View v is d_v x N. Columns of
/// missing instances are stored as zeros.
class MultiViewDataset {
 public:
  MultiViewDataset(std::vector<Matrix> views, IndicatorMatrix indicator,
                   std::optional<Labels> labels = std::nullopt,
                   std::vector<std::string> names = {});
  /// Complete dataset (all-ones indicator).
  MultiViewDataset(std::vector<Matrix> views, std::optional<Labels> labels = std::nullopt,
                   std::vector<std::string> names = {});

  Eigen::Index n_views() const { return static_cast<Eigen::Index>(views_.size()); }
  Eigen::Index n_instances() const { return indicator_.n_instances(); }
  const Matrix& view(Eigen::Index v) const { return views_.at(static_cast<std::size_t>(v)); }
  const std::vector<Matrix>& views() const { return views_; }
  const IndicatorMatrix& indicator() const { return indicator_; }
  const std::optional<Labels>& labels() const { return labels_; }
  const std::vector<std::string>& names() const { return names_; }

  /// Replaces the stored value of a view without touching the mask. Used to
  /// check that masked columns are never read.
  MultiViewDataset with_view(Eigen::Index v, Matrix x) const;

  /// Keeps the listed views and drops instances no longer present in any of
  /// them. Labels follow the kept instances.
  MultiViewDataset subset_views(const std::vector<Eigen::Index>& keep) const;

  /// Restricts to the given instances, in the given order.
  MultiViewDataset subset_instances(const std::vector<Eigen::Index>& keep) const;

  friend bool operator==(const MultiViewDataset& a, const MultiViewDataset& b);

 private:
  std::vector<Matrix> views_;
  IndicatorMatrix indicator_;
  std::optional<Labels> labels_;
  std::vector<std::string> names_;
};

/// N x N diagonal weight matrix with W_jj = M(view, j).
Matrix build_weight_matrix(const IndicatorMatrix& indicator, Eigen::Index view);

/// round(rate * n) with halves rounded up.
Eigen::Index removal_count(double rate, Eigen::Index n);

/// Marks round(rate*N) instances missing in every view of a complete dataset
/// and zeroes their columns. Every instance stays present in at least one
/// view. Deterministic in `seed`.
MultiViewDataset apply_incomplete_rate(const MultiViewDataset& ds, double rate,
                                       std::uint64_t seed);

struct SynthSpec {
  Eigen::Index n_per_cluster = 100;
  Eigen::Index k_clusters = 3;
  Eigen::Index n_views = 3;
  std::vector<Eigen::Index> dims{10, 10, 10};
  double separation = 1.0;
  double noise_sd = 1.0;
  std::uint64_t seed = 0;
};

/// Gaussian blobs around per-view cluster centers drawn uniformly from
/// [0, separation]^d. Instance i has label i / n_per_cluster.
MultiViewDataset synth_planted(const SynthSpec& spec);

MultiViewDataset load_manifest(const std::filesystem::path& path);

/// Writes `manifest.json`, one CSV per view and `labels.csv` (when labels are
/// present) into `dir`. Missing columns are written as nan. Returns the
/// manifest path.
std::filesystem::path save_manifest(const MultiViewDataset& ds, const std::filesystem::path& dir);

/// CSV helpers (comma separated, no header, "nan" for NaN). Doubles are
/// written in shortest round-trip form.
Matrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const Matrix& m, const std::filesystem::path& path);
Labels read_labels_csv(const std::filesystem::path& path);
void write_labels_csv(const Labels& labels, const std::filesystem::path& path);

}  // namespace daimc::data
