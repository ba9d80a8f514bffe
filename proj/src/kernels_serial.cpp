#include <cmath>
#include <limits>

#include "facloc/kernels.hpp"

namespace facloc::kernels {

double sum_ordered(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s;
}

namespace serial {

void normalize_rows(Matrix& m) {
  for (Index i = 0; i < m.rows; ++i) {
    auto r = m.row(i);
    double ss = 0.0;
    for (double v : r) ss += v * v;
    if (ss == 0.0) throw zero_vector_error(i);
    const double inv = 1.0 / std::sqrt(ss);
    for (double& v : r) v *= inv;
  }
}

namespace {

inline double row_sqdist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    const double d = a[t] - b[t];
    s += d * d;
  }
  return s;
}

}  // namespace

void nearest_among(const Matrix& points, const Matrix& sites, std::span<const Index> candidates,
                   std::span<Index> out_choice, std::span<double> out_sqdist) {
  for (Index i = 0; i < points.rows; ++i) {
    const auto p = points.row(i);
    Index best = kNoSite;
    double bestd = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const double d = row_sqdist(p, sites.row(candidates[c]));
      if (d < bestd) {
        bestd = d;
        best = static_cast<Index>(c);
      }
    }
    out_choice[i] = best;
    if (!out_sqdist.empty()) out_sqdist[i] = bestd;
  }
}

void nearest_two(const Matrix& points, const Matrix& sites, std::span<const Index> candidates,
                 std::span<Index> out1, std::span<double> d1, std::span<Index> out2,
                 std::span<double> d2) {
  for (Index i = 0; i < points.rows; ++i) {
    const auto p = points.row(i);
    Index b1 = kNoSite, b2 = kNoSite;
    double v1 = std::numeric_limits<double>::infinity();
    double v2 = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const double d = row_sqdist(p, sites.row(candidates[c]));
      if (d < v1) {
        v2 = v1;
        b2 = b1;
        v1 = d;
        b1 = static_cast<Index>(c);
      } else if (d < v2) {
        v2 = d;
        b2 = static_cast<Index>(c);
      }
    }
    out1[i] = b1;
    d1[i] = v1;
    out2[i] = b2;
    d2[i] = v2;
  }
}

void pairwise_sqdist(const Matrix& a, const Matrix& b, Matrix& out) {
  for (Index i = 0; i < a.rows; ++i) {
    const auto ra = a.row(i);
    for (Index j = 0; j < b.rows; ++j) {
      out.at(i, j) = row_sqdist(ra, b.row(j));
    }
  }
}

void cluster_sums(const Matrix& points, std::span<const Index> labels, Index k, Matrix& sums,
                  std::vector<Index>& counts) {
  counts.assign(static_cast<std::size_t>(k), 0);
  std::fill(sums.data.begin(), sums.data.end(), 0.0);
  for (Index j = 0; j < k; ++j) {
    auto acc = sums.row(j);
    for (Index i = 0; i < points.rows; ++i) {
      if (labels[i] != j) continue;
      const auto p = points.row(i);
      for (std::size_t t = 0; t < p.size(); ++t) acc[t] += p[t];
      ++counts[static_cast<std::size_t>(j)];
    }
  }
}

void greedy_scores(const Matrix& points, const Matrix& sites, std::span<const double> best_sqdist,
                   std::span<const char> open_mask, std::span<double> out_scores) {
  for (Index j = 0; j < sites.rows; ++j) {
    if (open_mask[j]) {
      out_scores[j] = std::numeric_limits<double>::infinity();
      continue;
    }
    const auto s = sites.row(j);
    double total = 0.0;
    for (Index i = 0; i < points.rows; ++i) {
      const double d = row_sqdist(points.row(i), s);
      total += d < best_sqdist[i] ? d : best_sqdist[i];
    }
    out_scores[j] = total;
  }
}

void swap_scores(const Matrix& points, const Matrix& sites, std::span<const Index> choice,
                 std::span<const double> d1, std::span<const double> d2, Index removed_pos,
                 std::span<const char> open_mask, std::span<double> out_scores) {
  for (Index j = 0; j < sites.rows; ++j) {
    if (open_mask[j]) {
      out_scores[j] = std::numeric_limits<double>::infinity();
      continue;
    }
    const auto s = sites.row(j);
    double total = 0.0;
    for (Index i = 0; i < points.rows; ++i) {
      const double keep = choice[i] == removed_pos ? d2[i] : d1[i];
      const double d = row_sqdist(points.row(i), s);
      total += d < keep ? d : keep;
    }
    out_scores[j] = total;
  }
}

}  // namespace serial
}  // namespace facloc::kernels
