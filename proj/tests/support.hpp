#pragma once
// Random problem generators shared by the unit and acceptance tests.
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "daimc/dataset.hpp"
#include "daimc/numerics.hpp"

using Index = Eigen::Index;

namespace testing {

using daimc::Matrix;
using daimc::Vector;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::mt19937_64& rng() { return rng_; }

  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>()(rng_); }

  Matrix gaussian(Index r, Index c) {
    Matrix m(r, c);
    for (Index j = 0; j < c; ++j)
      for (Index i = 0; i < r; ++i) m(i, j) = normal();
    return m;
  }
  Matrix nonneg(Index r, Index c) { return gaussian(r, c).cwiseAbs(); }

  // G G^T / n + shift I, well conditioned when shift > 0.
  Matrix spd(Index n, double shift = 0.1) {
    Matrix g = gaussian(n, n + 2);
    Matrix a = g * g.transpose() / static_cast<double>(n) + shift * Matrix::Identity(n, n);
    return 0.5 * (a + a.transpose());
  }
  // Positive semidefinite with rank r (may be zero).
  Matrix psd(Index n, Index r) {
    if (r == 0) return Matrix::Zero(n, n);
    Matrix g = gaussian(n, r);
    Matrix a = g * g.transpose();
    return 0.5 * (a + a.transpose());
  }

  std::vector<int> labels(Index n, int k) {
    std::vector<int> out(static_cast<std::size_t>(n));
    for (auto& l : out) l = integer(0, k - 1);
    return out;
  }

 private:
  std::mt19937_64 rng_;
};

// Random multi-view problem with a valid mask (each instance present somewhere,
// each view keeps more than k instances).
inline daimc::data::MultiViewDataset random_problem(Gen& g, Index n, Index n_views,
                                                    Index max_dim, Index k,
                                                    double rate) {
  std::vector<Matrix> views;
  for (Index v = 0; v < n_views; ++v) {
    Index d = g.integer(static_cast<int>(k), static_cast<int>(max_dim));
    // Offset keeps the data roughly in the semi-NMF friendly regime.
    views.push_back(g.gaussian(d, n).array() + 1.0);
  }
  daimc::data::MultiViewDataset ds(std::move(views));
  if (n_views > 1 && rate > 0) ds = daimc::data::apply_incomplete_rate(ds, rate, g.rng()());
  return ds;
}

inline double rel_diff(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

inline std::filesystem::path scratch_dir(const std::string& name) {
#ifdef DAIMC_TEST_TMP
  std::filesystem::path root = DAIMC_TEST_TMP;
#else
  std::filesystem::path root = std::filesystem::temp_directory_path() / "daimc-tests";
#endif
  auto p = root / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testing
