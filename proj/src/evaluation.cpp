#include "daimc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "daimc/error.hpp"

namespace daimc::eval {

using Index = Eigen::Index;

namespace {

struct Lloyd {
  std::vector<int> assignments;
  Matrix centroids;
  double inertia = 0.0;
  std::vector<double> history;
};

Matrix seed_plus_plus(const Matrix& points, int k, std::mt19937_64& rng) {
  const Index n = points.rows();
  Matrix centers(k, points.cols());
  std::uniform_int_distribution<Index> first(0, n - 1);
  centers.row(0) = points.row(first(rng));
  Vector d2 = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Index pick = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      pick = n - 1;
      for (Index j = 0; j < n; ++j) {
        target -= d2(j);
        if (target < 0.0 && d2(j) > 0.0) {
          pick = j;
          break;
        }
      }
      if (d2(pick) == 0.0) d2.maxCoeff(&pick);
    } else {
      pick = first(rng);
    }
    centers.row(c) = points.row(pick);
    d2 = d2.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  return centers;
}

// Nearest centroid for each point; returns the inertia.
double assign(const Matrix& points, const Matrix& centers, std::vector<int>& out,
              Vector& dist) {
  const Index n = points.rows();
  double total = 0.0;
  for (Index j = 0; j < n; ++j) {
    Index best = 0;
    const double d = (centers.rowwise() - points.row(j)).rowwise().squaredNorm().minCoeff(&best);
    out[static_cast<std::size_t>(j)] = static_cast<int>(best);
    dist(j) = d;
    total += d;
  }
  return total;
}

Lloyd run_lloyd(const Matrix& points, int k, std::mt19937_64& rng, const KMeansOptions& opts) {
  const Index n = points.rows();
  Lloyd r;
  r.centroids = seed_plus_plus(points, k, rng);
  r.assignments.assign(static_cast<std::size_t>(n), -1);
  std::vector<int> next(static_cast<std::size_t>(n), 0);
  Vector dist(n);
  for (int it = 0; it < opts.max_iter; ++it) {
    const double inertia = assign(points, r.centroids, next, dist);
    r.history.push_back(inertia);
    const bool stable = next == r.assignments;
    const bool flat = it > 0 && r.inertia - inertia <= opts.tol * r.inertia;
    r.assignments = next;
    r.inertia = inertia;
    if (stable || flat) break;

    Matrix sums = Matrix::Zero(k, points.cols());
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (Index j = 0; j < n; ++j) {
      const int c = r.assignments[static_cast<std::size_t>(j)];
      sums.row(c) += points.row(j);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        r.centroids.row(c) = sums.row(c) / double(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      // Empty: move the centroid onto the worst-served point.
      Index far = 0;
      dist.maxCoeff(&far);
      r.centroids.row(c) = points.row(far);
      dist(far) = 0.0;
    }
  }
  return r;
}

std::vector<int> compact(const Labels& labels, int& count) {
  std::map<int, int> ids;
  for (int l : labels) ids.emplace(l, 0);
  int next = 0;
  for (auto& [label, id] : ids) id = next++;
  count = next;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) out.push_back(ids[l]);
  return out;
}

void require_same_length(const Labels& a, const Labels& b, const char* what) {
  if (a.size() != b.size() || a.empty()) {
    std::ostringstream os;
    os << what << ": label vectors have lengths " << a.size() << " and " << b.size();
    throw InvalidInput(os.str());
  }
}

}  // namespace

double partition_inertia(const Matrix& points, const std::vector<int>& assignments, int k) {
  Matrix sums = Matrix::Zero(k, points.cols());
  std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
  for (Index j = 0; j < points.rows(); ++j) {
    sums.row(assignments[static_cast<std::size_t>(j)]) += points.row(j);
    counts[static_cast<std::size_t>(assignments[static_cast<std::size_t>(j)])] += 1.0;
  }
  double total = 0.0;
  for (Index j = 0; j < points.rows(); ++j) {
    const int c = assignments[static_cast<std::size_t>(j)];
    total += (points.row(j) - sums.row(c) / counts[static_cast<std::size_t>(c)]).squaredNorm();
  }
  return total;
}

ClusterResult kmeans(const Matrix& points, int k, std::uint64_t seed, const KMeansOptions& opts) {
  if (k < 1 || k > points.rows()) {
    std::ostringstream os;
    os << "kmeans: k = " << k << " must lie in [1, N = " << points.rows() << "]";
    throw InvalidInput(os.str());
  }
  if (opts.restarts < 1) throw InvalidInput("kmeans: restarts must be >= 1");
  numerics::require_finite(points, "kmeans");

  ClusterResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < opts.restarts; ++r) {
    std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(r));
    Lloyd run = run_lloyd(points, k, rng, opts);
    if (run.inertia < best.inertia) {
      best.assignments = std::move(run.assignments);
      best.centroids = std::move(run.centroids);
      best.inertia = run.inertia;
      best.inertia_history = std::move(run.history);
      best.restart = r;
    }
  }
  best.empty.assign(static_cast<std::size_t>(k), true);
  for (int a : best.assignments) best.empty[static_cast<std::size_t>(a)] = false;
  return best;
}

double nmi(const Labels& truth, const Labels& pred) {
  require_same_length(truth, pred, "nmi");
  int ct = 0;
  int cp = 0;
  const std::vector<int> t = compact(truth, ct);
  const std::vector<int> p = compact(pred, cp);
  const double n = static_cast<double>(t.size());
  std::vector<double> table(static_cast<std::size_t>(ct * cp), 0.0);
  std::vector<double> rows(static_cast<std::size_t>(ct), 0.0);
  std::vector<double> cols(static_cast<std::size_t>(cp), 0.0);
  for (std::size_t j = 0; j < t.size(); ++j) {
    table[static_cast<std::size_t>(t[j] * cp + p[j])] += 1.0;
    rows[static_cast<std::size_t>(t[j])] += 1.0;
    cols[static_cast<std::size_t>(p[j])] += 1.0;
  }
  // order-independent summation
  auto sorted_sum = [](std::vector<double> terms) {
    std::sort(terms.begin(), terms.end());
    double s = 0.0;
    for (double x : terms) s += x;
    return s;
  };
  auto entropy = [n, &sorted_sum](const std::vector<double>& counts) {
    std::vector<double> terms;
    for (double c : counts)
      if (c > 0.0) terms.push_back(-(c / n) * std::log(c / n));
    return sorted_sum(std::move(terms));
  };
  const double ht = entropy(rows);
  const double hp = entropy(cols);
  if (ht == 0.0 && hp == 0.0) return 1.0;
  if (ht == 0.0 || hp == 0.0) return 0.0;

  // A one-to-one contingency table means the partitions coincide.
  if (ct == cp) {
    int nonzero = 0;
    for (double c : table) nonzero += c > 0.0;
    if (nonzero == ct) return 1.0;
  }
  std::vector<double> terms;
  for (int a = 0; a < ct; ++a) {
    for (int b = 0; b < cp; ++b) {
      const double c = table[static_cast<std::size_t>(a * cp + b)];
      if (c > 0.0)
        terms.push_back((c / n) * std::log(c * n / (rows[static_cast<std::size_t>(a)] *
                                                    cols[static_cast<std::size_t>(b)])));
    }
  }
  const double mi = sorted_sum(std::move(terms));
  return std::clamp(mi / std::sqrt(std::min(ht, hp) * std::max(ht, hp)), 0.0, 1.0);
}

std::vector<int> hungarian(const std::vector<std::vector<long long>>& cost) {
  // Shortest augmenting paths with potentials; 1-based internally.
  const int n = static_cast<int>(cost.size());
  for (const auto& row : cost)
    if (static_cast<int>(row.size()) != n) throw InvalidInput("hungarian: cost must be square");
  constexpr long long kInf = std::numeric_limits<long long>::max() / 4;
  std::vector<long long> u(n + 1, 0), v(n + 1, 0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<long long> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = match[j0];
      long long delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const long long cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (match[j] > 0) row_to_col[match[j] - 1] = j - 1;
  return row_to_col;
}

double accuracy(const Labels& truth, const Labels& pred) {
  require_same_length(truth, pred, "accuracy");
  int ct = 0;
  int cp = 0;
  const std::vector<int> t = compact(truth, ct);
  const std::vector<int> p = compact(pred, cp);
  if (ct > kMaxAccuracyClasses || cp > kMaxAccuracyClasses) {
    std::ostringstream os;
    os << "accuracy: " << cp << " clusters / " << ct << " classes exceed the cap of "
       << kMaxAccuracyClasses;
    throw InvalidInput(os.str());
  }
  const int n = std::max(ct, cp);
  std::vector<std::vector<long long>> cost(n, std::vector<long long>(n, 0));
  for (std::size_t j = 0; j < t.size(); ++j) --cost[p[j]][t[j]];
  const std::vector<int> assignment = hungarian(cost);
  long long matched = 0;
  for (int r = 0; r < n; ++r) matched -= cost[r][assignment[r]];
  return static_cast<double>(matched) / static_cast<double>(t.size());
}

}  // namespace daimc::eval
