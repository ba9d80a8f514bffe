#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "facloc/metrics.hpp"

namespace facloc {

namespace {

void require_paired(std::span<const Index> pred, std::span<const Index> truth) {
  if (pred.size() != truth.size())
    throw dimension_mismatch("labelings differ in length: " + std::to_string(pred.size()) +
                             " vs " + std::to_string(truth.size()));
  if (pred.empty()) throw validation_error("labelings are empty");
}

std::vector<Index> distinct_sorted(std::span<const Index> xs) {
  std::vector<Index> v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Exact min-cost perfect assignment on a square cost matrix (potentials
// method, O(n^3)). Returns row -> column.
std::vector<int> hungarian(const std::vector<std::vector<long long>>& a) {
  const int n = static_cast<int>(a.size());
  const long long kInf = std::numeric_limits<long long>::max() / 4;
  std::vector<long long> u(n + 1, 0), v(n + 1, 0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<long long> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      long long delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const long long cur = a[i0 - 1][j - 1] - u[i0] - v[j];
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
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace

std::vector<std::vector<Index>> contingency_table(std::span<const Index> pred,
                                                  std::span<const Index> truth) {
  require_paired(pred, truth);
  const auto rows = distinct_sorted(pred);
  const auto cols = distinct_sorted(truth);
  std::map<Index, std::size_t> rpos, cpos;
  for (std::size_t i = 0; i < rows.size(); ++i) rpos[rows[i]] = i;
  for (std::size_t j = 0; j < cols.size(); ++j) cpos[cols[j]] = j;
  std::vector<std::vector<Index>> table(rows.size(), std::vector<Index>(cols.size(), 0));
  for (std::size_t t = 0; t < pred.size(); ++t) ++table[rpos[pred[t]]][cpos[truth[t]]];
  return table;
}

double clustering_accuracy(std::span<const Index> pred, std::span<const Index> truth) {
  const auto table = contingency_table(pred, truth);
  const std::size_t n = std::max(table.size(), table[0].size());
  std::vector<std::vector<long long>> cost(n, std::vector<long long>(n, 0));
  for (std::size_t i = 0; i < table.size(); ++i)
    for (std::size_t j = 0; j < table[i].size(); ++j)
      cost[i][j] = -static_cast<long long>(table[i][j]);  // maximize matches
  const auto match = hungarian(cost);
  long long agree = 0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto j = static_cast<std::size_t>(match[i]);
    if (j < table[i].size()) agree += table[i][j];
  }
  return static_cast<double>(agree) / static_cast<double>(pred.size());
}

double nmi(std::span<const Index> pred, std::span<const Index> truth) {
  const auto table = contingency_table(pred, truth);
  const double n = static_cast<double>(pred.size());
  std::vector<double> a(table.size(), 0.0), b(table[0].size(), 0.0);
  for (std::size_t i = 0; i < table.size(); ++i)
    for (std::size_t j = 0; j < table[i].size(); ++j) {
      a[i] += static_cast<double>(table[i][j]);
      b[j] += static_cast<double>(table[i][j]);
    }
  double hp = 0.0, ht = 0.0;
  for (double ai : a)
    if (ai > 0.0) hp -= ai / n * std::log(ai / n);
  for (double bj : b)
    if (bj > 0.0) ht -= bj / n * std::log(bj / n);
  if (hp == 0.0 && ht == 0.0) return 1.0;  // both labelings constant
  if (hp == 0.0 || ht == 0.0) return 0.0;
  double mi = 0.0;
  for (std::size_t i = 0; i < table.size(); ++i)
    for (std::size_t j = 0; j < table[i].size(); ++j) {
      const double nij = static_cast<double>(table[i][j]);
      if (nij > 0.0) mi += nij / n * std::log(n * nij / (a[i] * b[j]));
    }
  double value = mi / std::sqrt(hp * ht);
  if (value < 0.0) value = 0.0;
  if (value > 1.0) value = 1.0;
  return value;
}

double ari(std::span<const Index> pred, std::span<const Index> truth) {
  const auto table = contingency_table(pred, truth);
  using int128 = __int128;
  const auto comb2 = [](long long x) -> int128 {
    return static_cast<int128>(x) * (x - 1) / 2;
  };
  int128 sum_cells = 0;
  std::vector<long long> a(table.size(), 0), b(table[0].size(), 0);
  for (std::size_t i = 0; i < table.size(); ++i)
    for (std::size_t j = 0; j < table[i].size(); ++j) {
      sum_cells += comb2(table[i][j]);
      a[i] += table[i][j];
      b[j] += table[i][j];
    }
  int128 sa = 0, sb = 0;
  for (long long ai : a) sa += comb2(ai);
  for (long long bj : b) sb += comb2(bj);
  const int128 c2 = comb2(static_cast<long long>(pred.size()));
  // ari = (sum_cells - sa*sb/c2) / ((sa+sb)/2 - sa*sb/c2), kept integral:
  const int128 num = 2 * (sum_cells * c2 - sa * sb);
  const int128 den = (sa + sb) * c2 - 2 * sa * sb;
  if (den == 0) return 1.0;  // both partitions degenerate, hence identical
  return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
}

double assignment_entropy(std::span<const Index> labels, Index k) {
  if (k < 1) throw validation_error("assignment_entropy: k must be at least 1");
  std::vector<Index> counts(static_cast<std::size_t>(k), 0);
  for (Index l : labels) {
    if (l < 0 || l >= k)
      throw validation_error("assignment_entropy: label " + std::to_string(l) +
                             " outside [0, " + std::to_string(k) + ")");
    ++counts[static_cast<std::size_t>(l)];
  }
  const double n = static_cast<double>(labels.size());
  if (n == 0.0) throw validation_error("assignment_entropy: empty labeling");
  double h = 0.0;
  for (Index c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return h;
}

MetricsReport evaluate_clustering(std::span<const Index> pred, std::span<const Index> truth,
                                  Index k_pred, double loss) {
  require_paired(pred, truth);
  MetricsReport r;
  r.acc = clustering_accuracy(pred, truth);
  r.nmi = nmi(pred, truth);
  r.ari = ari(pred, truth);
  r.entropy = assignment_entropy(pred, k_pred);
  r.loss = loss;
  r.contingency = contingency_table(pred, truth);
  return r;
}

}  // namespace facloc
