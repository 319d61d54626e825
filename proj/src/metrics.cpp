#include "formeclust/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "formeclust/error.hpp"
#include "formeclust/hungarian.hpp"
#include "formeclust/rng.hpp"

namespace formeclust {

namespace {

void check_lengths(std::span<const int> gold, std::span<const int> pred) {
  if (gold.size() != pred.size()) {
    throw ConfigError("label length mismatch: gold has " + std::to_string(gold.size()) + ", pred has " +
                      std::to_string(pred.size()));
  }
  if (gold.empty()) throw ConfigError("label vectors must not be empty");
}

std::vector<int> distinct_sorted(std::span<const int> labels) {
  std::vector<int> v(labels.begin(), labels.end());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::size_t index_of(const std::vector<int>& sorted, int label) {
  return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), label) - sorted.begin());
}

// Entropy terms are summed in sorted order so the result depends only on the
// multiset of counts, never on label values.
double entropy(std::vector<long long> counts, long long n) {
  std::sort(counts.begin(), counts.end());
  double h = 0.0;
  for (long long c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(n);
    h -= p * std::log(p);
  }
  return h;
}

// H(target | given) from (cell count, given-cluster size) pairs.
double conditional_entropy(std::vector<std::pair<long long, long long>> cells, long long n) {
  std::sort(cells.begin(), cells.end());
  double h = 0.0;
  for (const auto& [c, given] : cells) {
    if (c == 0) continue;
    h -= static_cast<double>(c) / static_cast<double>(n) * std::log(static_cast<double>(c) / static_cast<double>(given));
  }
  return h;
}

// 1 - H(target|given)/H(target): homogeneity when target=gold, completeness when target=pred.
double conditional_score(std::span<const int> target, std::span<const int> given) {
  const auto t = contingency_table(target, given);  // rows: given, cols: target
  std::vector<long long> target_counts(t.gold_labels.size(), 0);
  std::vector<std::pair<long long, long long>> cells;
  for (const auto& row : t.counts) {
    const long long row_total = std::accumulate(row.begin(), row.end(), 0LL);
    for (std::size_t j = 0; j < row.size(); ++j) {
      target_counts[j] += row[j];
      if (row[j] > 0) cells.emplace_back(row[j], row_total);
    }
  }
  const double h_target = entropy(target_counts, t.n);
  if (h_target == 0.0) return 1.0;
  return 1.0 - conditional_entropy(std::move(cells), t.n) / h_target;
}

}  // namespace

Contingency contingency_table(std::span<const int> gold, std::span<const int> pred) {
  check_lengths(gold, pred);
  Contingency t;
  t.gold_labels = distinct_sorted(gold);
  t.pred_labels = distinct_sorted(pred);
  t.counts.assign(t.pred_labels.size(), std::vector<long long>(t.gold_labels.size(), 0));
  for (std::size_t i = 0; i < gold.size(); ++i) {
    ++t.counts[index_of(t.pred_labels, pred[i])][index_of(t.gold_labels, gold[i])];
  }
  t.n = static_cast<long long>(gold.size());
  return t;
}

double v_measure(std::span<const int> gold, std::span<const int> pred) {
  check_lengths(gold, pred);
  const double h = conditional_score(gold, pred);
  const double c = conditional_score(pred, gold);
  if (h + c == 0.0) return 0.0;
  return 2.0 * h * c / (h + c);
}

namespace {

// Matched count and pred->gold pairs of the optimal injective mapping.
std::pair<long long, std::vector<std::pair<int, int>>> best_injective_mapping(const Contingency& t) {
  const std::size_t kp = t.pred_labels.size();
  const std::size_t kg = t.gold_labels.size();
  const std::size_t size = std::max(kp, kg);
  long long max_count = 0;
  for (const auto& row : t.counts) {
    for (long long c : row) max_count = std::max(max_count, c);
  }
  std::vector<std::vector<long long>> cost(size, std::vector<long long>(size, max_count));
  for (std::size_t i = 0; i < kp; ++i) {
    for (std::size_t j = 0; j < kg; ++j) cost[i][j] = max_count - t.counts[i][j];
  }
  const auto assignment = min_cost_assignment(cost);
  long long matched = 0;
  std::vector<std::pair<int, int>> mapping;
  for (std::size_t i = 0; i < kp; ++i) {
    const std::size_t j = assignment[i];
    if (j >= kg) continue;
    matched += t.counts[i][j];
    mapping.emplace_back(t.pred_labels[i], t.gold_labels[j]);
  }
  return {matched, std::move(mapping)};
}

}  // namespace

double one_to_one(std::span<const int> gold, std::span<const int> pred) {
  const auto t = contingency_table(gold, pred);
  return static_cast<double>(best_injective_mapping(t).first) / static_cast<double>(t.n);
}

double many_to_one(std::span<const int> gold, std::span<const int> pred) {
  const auto t = contingency_table(gold, pred);
  long long correct = 0;
  for (const auto& row : t.counts) correct += *std::max_element(row.begin(), row.end());
  return static_cast<double>(correct) / static_cast<double>(t.n);
}

EvalReport evaluate(std::span<const int> gold, std::span<const int> pred) {
  EvalReport r;
  r.contingency = contingency_table(gold, pred);
  r.n = r.contingency.n;
  r.homogeneity = conditional_score(gold, pred);
  r.completeness = conditional_score(pred, gold);
  r.v_measure = v_measure(gold, pred);
  auto [matched, mapping] = best_injective_mapping(r.contingency);
  r.one_to_one = static_cast<double>(matched) / static_cast<double>(r.n);
  r.mapping = std::move(mapping);
  r.many_to_one = many_to_one(gold, pred);
  return r;
}

std::string_view baseline_name(BaselineKind kind) noexcept {
  switch (kind) {
    case BaselineKind::random_uniform:
      return "random_uniform";
    case BaselineKind::assign_majority:
      return "assign_majority";
    case BaselineKind::shuffle_gold:
      return "shuffle_gold";
  }
  return "";
}

std::vector<int> baseline(std::span<const int> gold, BaselineKind kind, std::uint64_t seed) {
  if (gold.empty()) throw ConfigError("baseline needs a nonempty gold labeling");
  Rng rng(seed);
  std::vector<int> out(gold.begin(), gold.end());
  switch (kind) {
    case BaselineKind::random_uniform: {
      const auto k = distinct_sorted(gold).size();
      for (auto& l : out) l = static_cast<int>(uniform_index(rng, k));
      break;
    }
    case BaselineKind::assign_majority: {
      std::map<int, long long> freq;
      for (int g : gold) ++freq[g];
      int majority = freq.begin()->first;
      long long best = 0;
      for (const auto& [label, count] : freq) {
        if (count > best) {
          best = count;
          majority = label;
        }
      }
      std::fill(out.begin(), out.end(), majority);
      break;
    }
    case BaselineKind::shuffle_gold:
      for (std::size_t i = out.size() - 1; i > 0; --i) {
        std::swap(out[i], out[uniform_index(rng, i + 1)]);
      }
      break;
  }
  return out;
}

LabelCodes encode_labels(std::span<const std::string> labels) {
  LabelCodes out;
  out.names.assign(labels.begin(), labels.end());
  std::sort(out.names.begin(), out.names.end());
  out.names.erase(std::unique(out.names.begin(), out.names.end()), out.names.end());
  out.codes.reserve(labels.size());
  for (const auto& l : labels) {
    out.codes.push_back(static_cast<int>(std::lower_bound(out.names.begin(), out.names.end(), l) - out.names.begin()));
  }
  return out;
}

}  // namespace formeclust
