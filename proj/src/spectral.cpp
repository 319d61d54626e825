#include "formeclust/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "formeclust/csv.hpp"
#include "formeclust/error.hpp"
#include "formeclust/rng.hpp"

namespace formeclust {

std::size_t AffinityGraph::degree(std::size_t i) const {
  std::size_t deg = 0;
  for (std::size_t j = 0; j < n; ++j) deg += at(i, j);
  return deg;
}

AffinityGraph knn_graph(const DistanceMatrix& distances, std::size_t k_neighbors) {
  const std::size_t n = distances.size();
  if (k_neighbors < 1 || k_neighbors >= n) {
    throw ConfigError("k_neighbors must be in [1, n), got " + std::to_string(k_neighbors) + " with n = " +
                      std::to_string(n));
  }
  AffinityGraph g;
  g.n = n;
  g.a.assign(n * n, 0);
  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    order.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) order.push_back(j);
    }
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k_neighbors), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double da = distances.at(i, a);
                        const double db = distances.at(i, b);
                        return da < db || (da == db && a < b);
                      });
    for (std::size_t r = 0; r < k_neighbors; ++r) {
      const std::size_t j = order[r];
      g.a[i * n + j] = 1;
      g.a[j * n + i] = 1;
    }
  }
  return g;
}

Eigen::MatrixXd normalized_laplacian(const AffinityGraph& graph) {
  const auto n = static_cast<Eigen::Index>(graph.n);
  Eigen::VectorXd inv_sqrt_deg(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto deg = graph.degree(static_cast<std::size_t>(i));
    inv_sqrt_deg(i) = deg > 0 ? 1.0 / std::sqrt(static_cast<double>(deg)) : 0.0;
  }
  Eigen::MatrixXd lap = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (graph.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j))) {
        lap(i, j) -= inv_sqrt_deg(i) * inv_sqrt_deg(j);
      }
    }
  }
  return lap;
}

Embedding spectral_embedding(const Eigen::MatrixXd& laplacian, std::size_t d) {
  const auto n = static_cast<std::size_t>(laplacian.rows());
  if (laplacian.rows() != laplacian.cols()) throw ConfigError("laplacian must be square");
  if (d < 1 || d > n) {
    throw ConfigError("embedding dimension must be in [1, n], got " + std::to_string(d) + " with n = " +
                      std::to_string(n));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian);
  if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");

  const auto dim = static_cast<Eigen::Index>(d);
  Embedding e;
  e.eigenvalues = solver.eigenvalues().head(dim);
  e.coords = solver.eigenvectors().leftCols(dim);
  if (!e.coords.allFinite()) throw NumericalError("eigenvectors contain non-finite values");
  for (Eigen::Index i = 0; i < e.coords.rows(); ++i) {
    const double norm = e.coords.row(i).norm();
    if (norm > 0.0) e.coords.row(i) /= norm;
  }
  return e;
}

namespace {

struct Run {
  std::vector<int> labels;
  double inertia = 0.0;
};

double squared_distance(const Eigen::MatrixXd& x, Eigen::Index i, const Eigen::MatrixXd& c, Eigen::Index k) {
  return (x.row(i) - c.row(k)).squaredNorm();
}

Eigen::MatrixXd plus_plus_init(const Eigen::MatrixXd& x, Eigen::Index k, Rng& rng) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd centers(k, x.cols());
  auto first = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::uint64_t>(n)));
  centers.row(0) = x.row(first);
  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = squared_distance(x, i, centers, 0);
  for (Eigen::Index c = 1; c < k; ++c) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    Eigen::Index pick = n - 1;
    if (total > 0.0) {
      const double target = uniform01(rng) * total;
      double cum = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double w = d2[static_cast<std::size_t>(i)];
        if (w <= 0.0) continue;
        cum += w;
        if (cum > target) {
          pick = i;
          break;
        }
      }
      // Rounding can leave target == cum at the end; take the last weighted point.
      if (cum <= target) {
        for (Eigen::Index i = n - 1; i >= 0; --i) {
          if (d2[static_cast<std::size_t>(i)] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::uint64_t>(n)));
    }
    centers.row(c) = x.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& v = d2[static_cast<std::size_t>(i)];
      v = std::min(v, squared_distance(x, i, centers, c));
    }
  }
  return centers;
}

Run lloyd(const Eigen::MatrixXd& x, Eigen::MatrixXd centers, int max_iterations) {
  const Eigen::Index n = x.rows();
  const Eigen::Index k = centers.rows();
  std::vector<int> labels(static_cast<std::size_t>(n), -1);
  std::vector<double> dist(static_cast<std::size_t>(n), 0.0);

  auto assign = [&]() {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(x, i, centers, 0);
      for (Eigen::Index c = 1; c < k; ++c) {
        const double d = squared_distance(x, i, centers, c);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      auto& l = labels[static_cast<std::size_t>(i)];
      if (l != best) changed = true;
      l = best;
      dist[static_cast<std::size_t>(i)] = best_d;
    }
    return changed;
  };

  assign();
  for (int iter = 0; iter < max_iterations; ++iter) {
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto l = labels[static_cast<std::size_t>(i)];
      sums.row(l) += x.row(i);
      ++counts[static_cast<std::size_t>(l)];
    }
    for (Eigen::Index c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      // Empty cluster: move the worst-fit point into it.
      Eigen::Index far = 0;
      for (Eigen::Index i = 1; i < n; ++i) {
        if (dist[static_cast<std::size_t>(i)] > dist[static_cast<std::size_t>(far)]) far = i;
      }
      centers.row(c) = x.row(far);
      --counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(far)])];
      labels[static_cast<std::size_t>(far)] = static_cast<int>(c);
      counts[static_cast<std::size_t>(c)] = 1;
      dist[static_cast<std::size_t>(far)] = 0.0;
    }
    if (!assign()) break;
  }

  Run run;
  run.labels = std::move(labels);
  for (Eigen::Index i = 0; i < n; ++i) {
    run.inertia += squared_distance(x, i, centers, run.labels[static_cast<std::size_t>(i)]);
  }
  return run;
}

void renumber_by_first_appearance(std::vector<int>& labels) {
  std::vector<int> remap;
  int next = 0;
  for (auto& l : labels) {
    if (static_cast<std::size_t>(l) >= remap.size()) remap.resize(static_cast<std::size_t>(l) + 1, -1);
    auto& r = remap[static_cast<std::size_t>(l)];
    if (r < 0) r = next++;
    l = r;
  }
}

}  // namespace

ClusterAssignment kmeans(const Eigen::MatrixXd& points, std::size_t k, std::uint64_t seed,
                         const KMeansOptions& options) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (k < 1) throw ConfigError("number of clusters must be positive");
  if (k > n) throw ConfigError("number of clusters " + std::to_string(k) + " exceeds point count " + std::to_string(n));
  if (!points.allFinite()) throw NumericalError("k-means input contains non-finite values");

  Rng rng(seed);
  Run best;
  bool have_best = false;
  for (int r = 0; r < std::max(1, options.restarts); ++r) {
    auto centers = plus_plus_init(points, static_cast<Eigen::Index>(k), rng);
    Run run = lloyd(points, std::move(centers), options.max_iterations);
    if (!have_best || run.inertia < best.inertia) {
      best = std::move(run);
      have_best = true;
    }
  }
  renumber_by_first_appearance(best.labels);
  ClusterAssignment out;
  out.labels = std::move(best.labels);
  out.inertia = best.inertia;
  return out;
}

ClusterAssignment cluster(const DistanceMatrix& distances, std::size_t k, std::size_t k_neighbors, std::uint64_t seed,
                          const KMeansOptions& options) {
  if (k < 1 || k > distances.size()) {
    throw ConfigError("cluster count must be in [1, n], got " + std::to_string(k) + " with n = " +
                      std::to_string(distances.size()));
  }
  const auto graph = knn_graph(distances, k_neighbors);
  const auto lap = normalized_laplacian(graph);
  const auto embedding = spectral_embedding(lap, k);
  auto assignment = kmeans(embedding.coords, k, seed, options);
  assignment.unit_ids = distances.unit_ids;
  return assignment;
}

std::string format_assignment_csv(const ClusterAssignment& assignment) {
  CsvTable table;
  table.header = {"unit_id", "label"};
  for (std::size_t i = 0; i < assignment.labels.size(); ++i) {
    table.rows.push_back({assignment.unit_ids.at(i), std::to_string(assignment.labels[i])});
  }
  return format_csv(table);
}

}  // namespace formeclust
