#include "daimc/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

#include "daimc/error.hpp"

namespace daimc::data {

namespace fs = std::filesystem;
using Index = Eigen::Index;

// ---------------------------------------------------------------------------
// IndicatorMatrix

IndicatorMatrix::IndicatorMatrix(Index n_views, Index n_instances)
    : m_(Storage::Ones(n_views, n_instances)) {
  if (n_views < 1 || n_instances < 1) throw InvalidInput("indicator: empty shape");
}

IndicatorMatrix::IndicatorMatrix(Storage entries) : m_(std::move(entries)) {
  if (m_.rows() < 1 || m_.cols() < 1) throw InvalidInput("indicator: empty shape");
  for (Index j = 0; j < m_.cols(); ++j) {
    bool covered = false;
    for (Index v = 0; v < m_.rows(); ++v) {
      if (m_(v, j) > 1) {
        std::ostringstream os;
        os << "indicator: entry (" << v << ", " << j << ") is " << int(m_(v, j))
           << ", expected 0 or 1";
        throw InvalidInput(os.str());
      }
      covered = covered || m_(v, j) == 1;
    }
    if (!covered) {
      std::ostringstream os;
      os << "indicator: instance " << j << " is missing from every view";
      throw InvalidInput(os.str());
    }
  }
}

Vector IndicatorMatrix::weights(Index view) const {
  if (view < 0 || view >= n_views()) {
    std::ostringstream os;
    os << "view index " << view << " out of range [0, " << n_views() << ")";
    throw InvalidInput(os.str());
  }
  return m_.row(view).cast<double>().transpose();
}

Index IndicatorMatrix::present_count(Index view) const {
  return m_.row(view).cast<Index>().sum();
}

std::vector<Index> IndicatorMatrix::present_instances(Index view) const {
  std::vector<Index> out;
  for (Index j = 0; j < n_instances(); ++j)
    if (present(view, j)) out.push_back(j);
  return out;
}

bool IndicatorMatrix::complete() const { return (m_.array() == 1).all(); }

void IndicatorMatrix::require_rank_capacity(Index k) const {
  for (Index v = 0; v < n_views(); ++v) {
    if (present_count(v) < k + 1) {
      std::ostringstream os;
      os << "view " << v << " keeps " << present_count(v) << " instances, need at least "
         << k + 1 << " for K = " << k;
      throw ConstraintViolation(os.str());
    }
  }
}

// ---------------------------------------------------------------------------
// MultiViewDataset

MultiViewDataset::MultiViewDataset(std::vector<Matrix> views, IndicatorMatrix indicator,
                                   std::optional<Labels> labels, std::vector<std::string> names)
    : views_(std::move(views)),
      indicator_(std::move(indicator)),
      labels_(std::move(labels)),
      names_(std::move(names)) {
  if (views_.empty()) throw InvalidInput("dataset: at least one view is required");
  const Index n = indicator_.n_instances();
  if (indicator_.n_views() != n_views()) {
    std::ostringstream os;
    os << "dataset: indicator has " << indicator_.n_views() << " rows for " << n_views()
       << " views";
    throw InvalidInput(os.str());
  }
  if (n < 2) throw InvalidInput("dataset: at least two instances are required");
  for (Index v = 0; v < n_views(); ++v) {
    const Matrix& x = views_[static_cast<std::size_t>(v)];
    if (x.cols() != n || x.rows() < 1) {
      std::ostringstream os;
      os << "dataset: view " << v << " is " << x.rows() << "x" << x.cols() << ", expected d x "
         << n;
      throw InvalidInput(os.str());
    }
    numerics::require_finite(x, "dataset view " + std::to_string(v));
  }
  if (labels_ && static_cast<Index>(labels_->size()) != n) {
    std::ostringstream os;
    os << "dataset: " << labels_->size() << " labels for " << n << " instances";
    throw InvalidInput(os.str());
  }
  if (names_.empty()) {
    for (Index v = 0; v < n_views(); ++v) names_.push_back("view" + std::to_string(v));
  } else if (static_cast<Index>(names_.size()) != n_views()) {
    throw InvalidInput("dataset: names must match the number of views");
  }
}

namespace {

IndicatorMatrix full_indicator(const std::vector<Matrix>& views) {
  if (views.empty()) throw InvalidInput("dataset: at least one view is required");
  return IndicatorMatrix(static_cast<Index>(views.size()), views.front().cols());
}

}  // namespace

MultiViewDataset::MultiViewDataset(std::vector<Matrix> views, std::optional<Labels> labels,
                                   std::vector<std::string> names)
    : MultiViewDataset(views, full_indicator(views), std::move(labels), std::move(names)) {}

MultiViewDataset MultiViewDataset::with_view(Index v, Matrix x) const {
  std::vector<Matrix> views = views_;
  views.at(static_cast<std::size_t>(v)) = std::move(x);
  return MultiViewDataset(std::move(views), indicator_, labels_, names_);
}

MultiViewDataset MultiViewDataset::subset_views(const std::vector<Index>& keep) const {
  if (keep.empty()) throw InvalidInput("subset_views: no views selected");
  for (Index v : keep)
    if (v < 0 || v >= n_views()) throw InvalidInput("subset_views: view index out of range");
  std::vector<Index> covered;
  for (Index j = 0; j < n_instances(); ++j) {
    const bool any = std::any_of(keep.begin(), keep.end(),
                                 [&](Index v) { return indicator_.present(v, j); });
    if (any) covered.push_back(j);
  }
  std::vector<Matrix> views;
  std::vector<std::string> names;
  IndicatorMatrix::Storage m(static_cast<Index>(keep.size()), static_cast<Index>(covered.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const Matrix& x = view(keep[r]);
    Matrix sub(x.rows(), static_cast<Index>(covered.size()));
    for (std::size_t c = 0; c < covered.size(); ++c) {
      sub.col(static_cast<Index>(c)) = x.col(covered[c]);
      m(static_cast<Index>(r), static_cast<Index>(c)) = indicator_.entries()(keep[r], covered[c]);
    }
    views.push_back(std::move(sub));
    names.push_back(names_[static_cast<std::size_t>(keep[r])]);
  }
  std::optional<Labels> labels;
  if (labels_) {
    labels.emplace();
    for (Index j : covered) labels->push_back((*labels_)[static_cast<std::size_t>(j)]);
  }
  return MultiViewDataset(std::move(views), IndicatorMatrix(std::move(m)), std::move(labels),
                          std::move(names));
}

MultiViewDataset MultiViewDataset::subset_instances(const std::vector<Index>& keep) const {
  const Index n = static_cast<Index>(keep.size());
  std::vector<Matrix> views;
  IndicatorMatrix::Storage m(n_views(), n);
  for (Index v = 0; v < n_views(); ++v) {
    Matrix sub(view(v).rows(), n);
    for (Index c = 0; c < n; ++c) {
      const Index j = keep[static_cast<std::size_t>(c)];
      if (j < 0 || j >= n_instances())
        throw InvalidInput("subset_instances: instance index out of range");
      sub.col(c) = view(v).col(j);
      m(v, c) = indicator_.entries()(v, j);
    }
    views.push_back(std::move(sub));
  }
  std::optional<Labels> labels;
  if (labels_) {
    labels.emplace();
    for (Index j : keep) labels->push_back((*labels_)[static_cast<std::size_t>(j)]);
  }
  return MultiViewDataset(std::move(views), IndicatorMatrix(std::move(m)), std::move(labels),
                          names_);
}

bool operator==(const MultiViewDataset& a, const MultiViewDataset& b) {
  if (a.views_.size() != b.views_.size() || !(a.indicator_ == b.indicator_) ||
      a.labels_ != b.labels_)
    return false;
  for (std::size_t v = 0; v < a.views_.size(); ++v) {
    if (a.views_[v].rows() != b.views_[v].rows() || a.views_[v] != b.views_[v]) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Weights and masks

Matrix build_weight_matrix(const IndicatorMatrix& indicator, Index view) {
  return indicator.weights(view).asDiagonal();
}

Index removal_count(double rate, Index n) {
  return static_cast<Index>(std::floor(rate * static_cast<double>(n) + 0.5));
}

namespace {

constexpr int kMaskAttempts = 1000;

// Draws `count` distinct elements of `pool` uniformly (partial Fisher-Yates).
std::vector<Index> draw_without_replacement(std::vector<Index> pool, Index count,
                                            std::mt19937_64& rng) {
  const auto n = static_cast<Index>(pool.size());
  for (Index i = 0; i < count; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  pool.resize(static_cast<std::size_t>(count));
  return pool;
}

}  // namespace

MultiViewDataset apply_incomplete_rate(const MultiViewDataset& ds, double rate,
                                       std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 0.5)) {
    std::ostringstream os;
    os << "apply_incomplete_rate: rate " << rate << " outside [0, 0.5]";
    throw InvalidInput(os.str());
  }
  if (!ds.indicator().complete())
    throw InvalidInput("apply_incomplete_rate: dataset already has missing instances");

  const Index n = ds.n_instances();
  const Index n_views = ds.n_views();
  const Index removed = removal_count(rate, n);
  if (removed == 0) return ds;

  std::mt19937_64 rng(seed);
  std::vector<Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Index{0});

  // Views are visited in random order. All but the last draw freely; the last
  // one may only remove instances still present elsewhere.
  for (int attempt = 0; attempt < kMaskAttempts; ++attempt) {
    std::vector<Index> order(static_cast<std::size_t>(n_views));
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);

    IndicatorMatrix::Storage m = IndicatorMatrix::Storage::Ones(n_views, n);
    std::vector<int> missing_in(static_cast<std::size_t>(n), 0);
    bool feasible = true;
    for (Index step = 0; step < n_views; ++step) {
      const Index v = order[static_cast<std::size_t>(step)];
      std::vector<Index> pool;
      if (step + 1 < n_views) {
        pool = all;
      } else {
        for (Index j = 0; j < n; ++j)
          if (missing_in[static_cast<std::size_t>(j)] < n_views - 1) pool.push_back(j);
      }
      if (static_cast<Index>(pool.size()) < removed) {
        feasible = false;
        break;
      }
      for (Index j : draw_without_replacement(std::move(pool), removed, rng)) {
        m(v, j) = 0;
        ++missing_in[static_cast<std::size_t>(j)];
      }
    }
    if (!feasible) continue;

    std::vector<Matrix> views = ds.views();
    for (Index v = 0; v < n_views; ++v)
      for (Index j = 0; j < n; ++j)
        if (m(v, j) == 0) views[static_cast<std::size_t>(v)].col(j).setZero();
    return MultiViewDataset(std::move(views), IndicatorMatrix(std::move(m)), ds.labels(),
                            ds.names());
  }
  std::ostringstream os;
  os << "apply_incomplete_rate: cannot remove " << removed << " of " << n
     << " instances from each of " << n_views
     << " views while keeping every instance in some view (" << kMaskAttempts << " attempts)";
  throw ConstraintViolation(os.str());
}

// ---------------------------------------------------------------------------
// Synthetic data

MultiViewDataset synth_planted(const SynthSpec& spec) {
  if (spec.k_clusters < 2) throw InvalidInput("synth_planted: k_clusters must be >= 2");
  if (spec.n_per_cluster < 1) throw InvalidInput("synth_planted: n_per_cluster must be >= 1");
  if (spec.n_views < 1 || static_cast<Index>(spec.dims.size()) != spec.n_views)
    throw InvalidInput("synth_planted: dims must list one dimension per view");
  for (Index d : spec.dims)
    if (d < 1) throw InvalidInput("synth_planted: every view dimension must be >= 1");
  if (!(spec.separation > 0.0)) throw InvalidInput("synth_planted: separation must be > 0");
  if (!(spec.noise_sd >= 0.0)) throw InvalidInput("synth_planted: noise_sd must be >= 0");

  const Index n = spec.n_per_cluster * spec.k_clusters;
  Labels labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = int(i / spec.n_per_cluster);

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Matrix> views;
  for (Index v = 0; v < spec.n_views; ++v) {
    const Index d = spec.dims[static_cast<std::size_t>(v)];
    Matrix centers(d, spec.k_clusters);
    for (Index c = 0; c < spec.k_clusters; ++c)
      for (Index r = 0; r < d; ++r) centers(r, c) = spec.separation * unit(rng);
    Matrix x(d, n);
    for (Index i = 0; i < n; ++i) {
      const Index c = labels[static_cast<std::size_t>(i)];
      for (Index r = 0; r < d; ++r) x(r, i) = centers(r, c) + spec.noise_sd * gauss(rng);
    }
    views.push_back(std::move(x));
  }
  return MultiViewDataset(std::move(views), std::move(labels));
}

// ---------------------------------------------------------------------------
// CSV and manifest I/O

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

void append_double(std::string& out, double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw IoError("cannot format value");
  if (std::isnan(x)) {
    out += "nan";
  } else {
    out.append(buf, end);
  }
}

}  // namespace

Matrix read_matrix_csv(const fs::path& path) {
  std::ifstream in = open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  Index line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest = trim(line);
    if (rest.empty()) continue;
    std::vector<double> row;
    while (true) {
      const auto comma = rest.find(',');
      const std::string_view field = trim(rest.substr(0, comma));
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
      if (ec != std::errc{} || ptr != field.data() + field.size()) {
        std::ostringstream os;
        os << path.string() << ":" << line_no << ": cannot parse '" << field << "'";
        throw FormatError(os.str());
      }
      row.push_back(value);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      std::ostringstream os;
      os << path.string() << ":" << line_no << ": " << row.size() << " fields, expected "
         << rows.front().size();
      throw FormatError(os.str());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError(path.string() + ": empty matrix");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

void write_matrix_csv(const Matrix& m, const fs::path& path) {
  std::string out;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      append_double(out, m(i, j));
    }
    out += '\n';
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << out;
  if (!f) throw IoError("write failed for " + path.string());
}

Labels read_labels_csv(const fs::path& path) {
  std::ifstream in = open_input(path);
  Labels labels;
  std::string line;
  Index line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view field = trim(line);
    if (field.empty()) continue;
    int value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
      std::ostringstream os;
      os << path.string() << ":" << line_no << ": cannot parse label '" << field << "'";
      throw FormatError(os.str());
    }
    labels.push_back(value);
  }
  return labels;
}

void write_labels_csv(const Labels& labels, const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  for (int l : labels) f << l << '\n';
  if (!f) throw IoError("write failed for " + path.string());
}

MultiViewDataset load_manifest(const fs::path& path) {
  std::ifstream in = open_input(path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  if (!doc.contains("views") || !doc["views"].is_array() || doc["views"].empty())
    throw FormatError(path.string() + ": 'views' must be a nonempty array");

  const fs::path base = path.parent_path();
  std::vector<Matrix> views;
  std::vector<std::string> names;
  for (const auto& entry : doc["views"]) {
    if (!entry.contains("path") || !entry["path"].is_string())
      throw FormatError(path.string() + ": every view needs a string 'path'");
    views.push_back(read_matrix_csv(base / entry["path"].get<std::string>()));
    names.push_back(entry.value("name", "view" + std::to_string(names.size())));
  }

  const Index n = views.front().cols();
  for (std::size_t v = 1; v < views.size(); ++v) {
    if (views[v].cols() != n) {
      std::ostringstream os;
      os << path.string() << ": view '" << names[v] << "' has " << views[v].cols()
         << " instances but view '" << names[0] << "' has " << n;
      throw FormatError(os.str());
    }
  }

  IndicatorMatrix::Storage m = IndicatorMatrix::Storage::Ones(static_cast<Index>(views.size()), n);
  for (std::size_t v = 0; v < views.size(); ++v) {
    Matrix& x = views[v];
    for (Index j = 0; j < n; ++j) {
      const Index nan_count = x.col(j).array().isNaN().count();
      if (nan_count == x.rows()) {
        m(static_cast<Index>(v), j) = 0;
        x.col(j).setZero();
        continue;
      }
      for (Index i = 0; i < x.rows(); ++i) {
        if (!std::isfinite(x(i, j))) {
          std::ostringstream os;
          os << path.string() << ": view '" << names[v] << "' has a non-finite value at row " << i
             << ", column " << j << " of a present instance";
          throw FormatError(os.str());
        }
      }
    }
  }

  std::optional<Labels> labels;
  if (doc.contains("labels") && !doc["labels"].is_null()) {
    labels = read_labels_csv(base / doc["labels"].get<std::string>());
    if (static_cast<Index>(labels->size()) != n) {
      std::ostringstream os;
      os << path.string() << ": labels file has " << labels->size() << " entries, expected " << n;
      throw FormatError(os.str());
    }
  }
  try {
    return MultiViewDataset(std::move(views), IndicatorMatrix(std::move(m)), std::move(labels),
                            std::move(names));
  } catch (const InvalidInput& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

fs::path save_manifest(const MultiViewDataset& ds, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  nlohmann::json doc;
  doc["views"] = nlohmann::json::array();
  for (Index v = 0; v < ds.n_views(); ++v) {
    Matrix x = ds.view(v);
    for (Index j = 0; j < ds.n_instances(); ++j)
      if (!ds.indicator().present(v, j)) x.col(j).setConstant(std::numeric_limits<double>::quiet_NaN());
    const std::string file = "view_" + std::to_string(v) + ".csv";
    write_matrix_csv(x, dir / file);
    doc["views"].push_back({{"path", file}, {"name", ds.names()[static_cast<std::size_t>(v)]}});
  }
  if (ds.labels()) {
    write_labels_csv(*ds.labels(), dir / "labels.csv");
    doc["labels"] = "labels.csv";
  }
  const fs::path manifest = dir / "manifest.json";
  std::ofstream f(manifest);
  if (!f) throw IoError("cannot write " + manifest.string());
  f << doc.dump(2) << '\n';
  return manifest;
}

}  // namespace daimc::data
