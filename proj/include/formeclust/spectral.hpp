#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "formeclust/kernel.hpp"

namespace formeclust {

/// Symmetric 0/1 adjacency with zero diagonal, row-major.
struct AffinityGraph {
  std::size_t n = 0;
  std::vector<std::uint8_t> a;

  std::uint8_t at(std::size_t i, std::size_t j) const { return a[i * n + j]; }
  std::size_t degree(std::size_t i) const;
};

struct Embedding {
  Eigen::MatrixXd coords;       // n x d, rows normalized to unit length when nonzero
  Eigen::VectorXd eigenvalues;  // the d smallest, ascending
};

struct ClusterAssignment {
  std::vector<std::string> unit_ids;
  std::vector<int> labels;
  double inertia = 0.0;  // k-means objective of the kept restart
};

/// Union-symmetrized kNN: i~j when j is among i's k nearest or vice versa.
/// Equal distances prefer the lower index.
AffinityGraph knn_graph(const DistanceMatrix& distances, std::size_t k_neighbors);

/// L = I - D^{-1/2} A D^{-1/2}; isolated vertices get a unit diagonal.
Eigen::MatrixXd normalized_laplacian(const AffinityGraph& graph);

/// Eigenvectors of the d smallest eigenvalues of a symmetric matrix.
Embedding spectral_embedding(const Eigen::MatrixXd& laplacian, std::size_t d);

struct KMeansOptions {
  int restarts = 5;
  int max_iterations = 300;
};

/// k-means++ seeding from an mt19937_64 stream, Lloyd iterations, empty
/// clusters reseeded to the point farthest from its centroid. The restart with
/// the lowest inertia wins. Labels are renumbered by first appearance.
ClusterAssignment kmeans(const Eigen::MatrixXd& points, std::size_t k, std::uint64_t seed,
                         const KMeansOptions& options = {});

/// knn_graph -> normalized_laplacian -> spectral_embedding(d = k) -> kmeans.
ClusterAssignment cluster(const DistanceMatrix& distances, std::size_t k, std::size_t k_neighbors, std::uint64_t seed,
                          const KMeansOptions& options = {});

std::string format_assignment_csv(const ClusterAssignment& assignment);

}  // namespace formeclust
