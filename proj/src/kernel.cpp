#include "formeclust/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "formeclust/csv.hpp"
#include "formeclust/error.hpp"

namespace formeclust {

std::size_t levenshtein_reference(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() < b.size()) std::swap(a, b);
  // b is the shorter string; row holds distances from a[0..i) to b[0..j).
  const std::size_t m = b.size();
  if (m == 0) return a.size();
  std::vector<std::uint32_t> row(m + 1);
  std::iota(row.begin(), row.end(), 0u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::uint32_t diag = row[0];
    row[0] = static_cast<std::uint32_t>(i + 1);
    const std::uint8_t ca = a[i];
    for (std::size_t j = 0; j < m; ++j) {
      const std::uint32_t up = row[j + 1];
      const std::uint32_t sub = diag + (ca != b[j] ? 1u : 0u);
      const std::uint32_t indel = std::min(up, row[j]) + 1u;
      row[j + 1] = std::min(sub, indel);
      diag = up;
    }
  }
  return row[m];
}

// Myers' bit-vector recurrence in Hyyro's blocked form: the DP column over
// the shorter string is kept as vertical +1/-1 delta bit masks, 64 rows per
// word, and one character of the longer string is consumed per step.
std::size_t levenshtein(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() < b.size()) std::swap(a, b);
  const std::size_t m = b.size();
  if (m == 0) return a.size();
  const std::size_t words = (m + 63) / 64;
  const std::size_t alphabet = static_cast<std::size_t>(*std::max_element(b.begin(), b.end())) + 1;

  // peq[c * words + w] has bit r set when b[64 w + r] == c; the last row is all zero.
  std::vector<std::uint64_t> peq((alphabet + 1) * words, 0);
  for (std::size_t j = 0; j < m; ++j) peq[b[j] * words + j / 64] |= std::uint64_t{1} << (j % 64);
  std::vector<std::uint64_t> pv(words, ~std::uint64_t{0});
  std::vector<std::uint64_t> mv(words, 0);

  constexpr std::uint64_t kHigh = std::uint64_t{1} << 63;
  const std::uint64_t last = std::uint64_t{1} << ((m - 1) % 64);
  std::size_t score = m;
  for (const std::uint8_t c : a) {
    const std::uint64_t* eq_row = &peq[std::min<std::size_t>(c, alphabet) * words];
    int hin = 1;  // the top boundary row grows by one per column
    for (std::size_t w = 0; w < words; ++w) {
      const std::uint64_t hneg = hin < 0 ? 1 : 0;
      std::uint64_t eq = eq_row[w];
      const std::uint64_t xv = eq | mv[w];
      eq |= hneg;
      const std::uint64_t xh = (((eq & pv[w]) + pv[w]) ^ pv[w]) | eq;
      std::uint64_t ph = mv[w] | ~(xh | pv[w]);
      std::uint64_t mh = pv[w] & xh;
      const std::uint64_t bottom = w + 1 == words ? last : kHigh;
      const int hout = (ph & bottom) ? 1 : ((mh & bottom) ? -1 : 0);
      ph <<= 1;
      mh <<= 1;
      mh |= hneg;
      if (hin > 0) ph |= 1;
      pv[w] = mh | ~(xv | ph);
      mv[w] = ph & xv;
      hin = hout;
    }
    score = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(score) + hin);
  }
  return score;
}

namespace {

void check_compatible(const QuantizedTitle& x, const QuantizedTitle& y) {
  if (x.n_bins != y.n_bins || x.strategy != y.strategy) {
    throw ConfigError("mismatched binning configs: " + std::to_string(x.n_bins) + "/" +
                      std::string(strategy_name(x.strategy)) + " vs " + std::to_string(y.n_bins) + "/" +
                      std::string(strategy_name(y.strategy)));
  }
}

double title_distance_unchecked(const std::optional<QuantizedTitle>& x, const std::optional<QuantizedTitle>& y,
                                bool normalize) {
  if (!x && !y) return 0.0;
  if (!x || !y) {
    const std::size_t len = x ? x->symbols.size() : y->symbols.size();
    if (normalize) return len > 0 ? 1.0 : 0.0;
    return static_cast<double>(len);
  }
  const double raw = static_cast<double>(levenshtein(x->symbols, y->symbols));
  if (!normalize) return raw;
  const std::size_t longest = std::max(x->symbols.size(), y->symbols.size());
  return longest > 0 ? raw / static_cast<double>(longest) : 0.0;
}

double unit_distance_unchecked(const ClusterUnit& u, const ClusterUnit& v, const KernelOptions& options) {
  std::vector<double> d(u.slots.size());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = title_distance_unchecked(u.slots[k], v.slots[k], options.normalize);
  return p_norm(d, options.p);
}

void check_p(double p) {
  if (std::isnan(p) || p < 1.0) throw ConfigError("reduction order p must be in [1, inf]");
}

void validate_units(std::span<const ClusterUnit> units, const KernelOptions& options) {
  check_p(options.p);
  if (units.size() < 2) throw ConfigError("distance matrix needs at least 2 units, got " + std::to_string(units.size()));
  const std::size_t slots = units.front().slots.size();
  const QuantizedTitle* first = nullptr;
  for (const auto& u : units) {
    if (u.slots.size() != slots) {
      throw ConfigError("slot-count mismatch: unit '" + u.id + "' has " + std::to_string(u.slots.size()) +
                        " slots, expected " + std::to_string(slots));
    }
    for (const auto& s : u.slots) {
      if (!s) continue;
      if (!first) {
        first = &*s;
      } else {
        check_compatible(*first, *s);
      }
    }
  }
}

DistanceMatrix empty_matrix(std::span<const ClusterUnit> units) {
  DistanceMatrix m;
  m.unit_ids.reserve(units.size());
  for (const auto& u : units) m.unit_ids.push_back(u.id);
  m.d.assign(units.size() * units.size(), 0.0);
  return m;
}

}  // namespace

double title_distance(const std::optional<QuantizedTitle>& x, const std::optional<QuantizedTitle>& y,
                      bool normalize) {
  if (x && y) check_compatible(*x, *y);
  return title_distance_unchecked(x, y, normalize);
}

double p_norm(std::span<const double> d, double p) {
  if (d.empty()) return 0.0;
  const double largest = *std::max_element(d.begin(), d.end());
  if (std::isinf(p)) return largest;
  if (p == 1.0) return std::accumulate(d.begin(), d.end(), 0.0);
  if (largest == 0.0) return 0.0;
  // Scale by the maximum so a single nonzero term comes back exactly.
  double sum = 0.0;
  for (double x : d) sum += std::pow(x / largest, p);
  return largest * std::pow(sum, 1.0 / p);
}

double unit_distance(const ClusterUnit& u, const ClusterUnit& v, const KernelOptions& options) {
  check_p(options.p);
  if (u.slots.size() != v.slots.size()) {
    throw ConfigError("slot-count mismatch: " + std::to_string(u.slots.size()) + " vs " +
                      std::to_string(v.slots.size()));
  }
  for (std::size_t k = 0; k < u.slots.size(); ++k) {
    if (u.slots[k] && v.slots[k]) check_compatible(*u.slots[k], *v.slots[k]);
  }
  return unit_distance_unchecked(u, v, options);
}

DistanceMatrix distance_matrix_reference(std::span<const ClusterUnit> units, const KernelOptions& options) {
  validate_units(units, options);
  DistanceMatrix m = empty_matrix(units);
  const std::size_t n = units.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = unit_distance_unchecked(units[i], units[j], options);
      m.at(i, j) = v;
      m.at(j, i) = v;
    }
  }
  return m;
}

DistanceMatrix distance_matrix(std::span<const ClusterUnit> units, const KernelOptions& options) {
  validate_units(units, options);
  DistanceMatrix m = empty_matrix(units);
  const auto n = static_cast<std::ptrdiff_t>(units.size());
  // Row i owns cells (i, j>i) and their mirrors; rows shrink, so schedule dynamically.
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    for (std::ptrdiff_t j = i + 1; j < n; ++j) {
      const double v = unit_distance_unchecked(units[static_cast<std::size_t>(i)], units[static_cast<std::size_t>(j)],
                                               options);
      m.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = v;
      m.at(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) = v;
    }
  }
  return m;
}

std::string format_distance_csv(const DistanceMatrix& m) {
  CsvTable table;
  table.header = m.unit_ids;
  for (std::size_t i = 0; i < m.size(); ++i) {
    std::vector<std::string> row;
    row.reserve(m.size());
    for (std::size_t j = 0; j < m.size(); ++j) row.push_back(format_double(m.at(i, j)));
    table.rows.push_back(std::move(row));
  }
  return format_csv(table);
}

DistanceMatrix parse_distance_csv(std::string_view csv_text) {
  const auto table = parse_csv(csv_text);
  DistanceMatrix m;
  m.unit_ids = table.header;
  const std::size_t n = m.unit_ids.size();
  if (table.rows.size() != n) throw ConfigError("distance csv must be square");
  m.d.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m.at(i, j) = parse_double(table.rows[i][j]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (m.at(i, i) != 0.0) throw ConfigError("distance csv diagonal must be zero");
    for (std::size_t j = 0; j < n; ++j) {
      const double v = m.at(i, j);
      if (!std::isfinite(v) || v < 0.0 || v != m.at(j, i)) {
        throw ConfigError("distance csv must be symmetric, finite and nonnegative");
      }
    }
  }
  return m;
}

}  // namespace formeclust
