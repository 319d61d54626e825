#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "formeclust/profiling.hpp"

namespace formeclust {

/// A clustering unit with one optional title per slot (absent = blank page).
struct ClusterUnit {
  std::string id;
  std::vector<std::optional<QuantizedTitle>> slots;
};

/// Dense symmetric distance matrix, row-major.
struct DistanceMatrix {
  std::vector<std::string> unit_ids;
  std::vector<double> d;

  std::size_t size() const noexcept { return unit_ids.size(); }
  double& at(std::size_t i, std::size_t j) { return d[i * size() + j]; }
  double at(std::size_t i, std::size_t j) const { return d[i * size() + j]; }

  friend bool operator==(const DistanceMatrix&, const DistanceMatrix&) = default;
};

struct KernelOptions {
  double p = 4.0;  // reduction order; std::numeric_limits<double>::infinity() for max
  bool normalize = false;  // divide title distances by the longer title's length
};

inline constexpr double kInfNorm = std::numeric_limits<double>::infinity();

/// Unit-cost edit distance. Bit-parallel over the shorter string, 64 rows per
/// machine word; exactly equal to levenshtein_reference.
std::size_t levenshtein(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

/// Two-row dynamic program, kept as the reference for levenshtein.
std::size_t levenshtein_reference(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

/// Title-level distance. One side absent costs the present title's length
/// (1 when normalized); both absent cost 0.
double title_distance(const std::optional<QuantizedTitle>& x, const std::optional<QuantizedTitle>& y,
                      bool normalize = false);

/// p-norm of a vector of nonnegative per-position distances.
double p_norm(std::span<const double> d, double p);

/// Position-aligned reduction: slot k of u is compared only with slot k of v.
double unit_distance(const ClusterUnit& u, const ClusterUnit& v, const KernelOptions& options = {});

/// Pairwise distances; the upper triangle is computed once and mirrored.
/// Runs the pair loop under OpenMP; bit-identical to distance_matrix_reference.
DistanceMatrix distance_matrix(std::span<const ClusterUnit> units, const KernelOptions& options = {});

/// Sequential fill kept as the reference for the parallel version.
DistanceMatrix distance_matrix_reference(std::span<const ClusterUnit> units, const KernelOptions& options = {});

/// Header row of unit ids, then one row per unit.
std::string format_distance_csv(const DistanceMatrix& m);
DistanceMatrix parse_distance_csv(std::string_view csv_text);

}  // namespace formeclust
