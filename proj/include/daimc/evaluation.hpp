#pragma once

#include <cstdint>
#include <vector>

#include "daimc/numerics.hpp"

namespace daimc::eval {

using Labels = std::vector<int>;

struct KMeansOptions {
  int restarts = 20;
  int max_iter = 300;
  double tol = 1e-9;  // relative inertia change
};

struct ClusterResult {
  std::vector<int> assignments;  // length N, ids in [0, k)
  Matrix centroids;              // k x dim
  double inertia = 0.0;
  std::vector<bool> empty;  // clusters that ended with no members
  /// Inertia after every assignment step of the winning restart.
  std::vector<double> inertia_history;
  int restart = 0;
};

/// Lloyd's algorithm on the rows of `points` with k-means++ seeding, keeping
/// the lowest-inertia restart (ties go to the earlier restart). Clusters that
/// empty out are re-seeded with the point farthest from its centroid.
ClusterResult kmeans(const Matrix& points, int k, std::uint64_t seed,
                     const KMeansOptions& opts = {});

/// Sum of squared distances from each row to the centroid of its cluster.
double partition_inertia(const Matrix& points, const std::vector<int>& assignments, int k);

/// Normalized mutual information, MI / sqrt(H(truth) H(pred)), natural log.
/// Both entropies zero gives 1; exactly one zero gives 0.
double nmi(const Labels& truth, const Labels& pred);

/// Largest agreement fraction over injective maps from predicted clusters to
/// true classes, solved with the Hungarian method.
double accuracy(const Labels& truth, const Labels& pred);

/// Maximum number of distinct clusters (or classes) accepted by accuracy().
inline constexpr int kMaxAccuracyClasses = 64;

/// Minimum-cost perfect matching of a square cost matrix. Returns for each
/// row the column it is assigned to.
std::vector<int> hungarian(const std::vector<std::vector<long long>>& cost);

}  // namespace daimc::eval
