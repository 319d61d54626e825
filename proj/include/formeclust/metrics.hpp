#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace formeclust {

/// Counts of (predicted cluster, gold cluster) pairs. Row/column i refers to
/// the i-th smallest distinct label value of pred/gold.
struct Contingency {
  std::vector<int> pred_labels;
  std::vector<int> gold_labels;
  std::vector<std::vector<long long>> counts;  // [pred][gold]
  long long n = 0;
};

Contingency contingency_table(std::span<const int> gold, std::span<const int> pred);

struct EvalReport {
  double v_measure = 0.0;
  double homogeneity = 0.0;
  double completeness = 0.0;
  double one_to_one = 0.0;
  double many_to_one = 0.0;
  std::vector<std::pair<int, int>> mapping;  // predicted label -> gold label (1-to-1 assignment)
  Contingency contingency;
  long long n = 0;
};

/// Harmonic mean of homogeneity and completeness, natural-log entropies.
double v_measure(std::span<const int> gold, std::span<const int> pred);

/// Accuracy under the best injective pred->gold mapping (Hungarian on the
/// zero-padded contingency table).
double one_to_one(std::span<const int> gold, std::span<const int> pred);

/// Accuracy when each predicted cluster takes its most frequent gold label
/// (ties -> smaller gold label).
double many_to_one(std::span<const int> gold, std::span<const int> pred);

EvalReport evaluate(std::span<const int> gold, std::span<const int> pred);

enum class BaselineKind { random_uniform, assign_majority, shuffle_gold };
std::string_view baseline_name(BaselineKind kind) noexcept;

/// random_uniform draws i.i.d. labels in [0, K) with K = distinct gold labels;
/// assign_majority repeats the most frequent gold label; shuffle_gold permutes gold.
std::vector<int> baseline(std::span<const int> gold, BaselineKind kind, std::uint64_t seed);

/// Dense integer codes for string labels, in sorted order of the distinct
/// strings. `names[code]` recovers the string.
struct LabelCodes {
  std::vector<int> codes;
  std::vector<std::string> names;
};
LabelCodes encode_labels(std::span<const std::string> labels);

}  // namespace formeclust
